#include <gtest/gtest.h>

#include <cmath>

#include "fnls/admissibility.hpp"
#include "fnls/errors.hpp"

using namespace fnls;

namespace {

ExponentPair pair(const std::string& q, const std::string& r) {
  return ExponentPair::make(Exponent::parse(q), Exponent::parse(r));
}

}  // namespace

TEST(Rational, Parsing) {
  EXPECT_EQ(parse_rational("0.8"), Rational(4, 5));
  EXPECT_EQ(parse_rational("4/5"), Rational(4, 5));
  EXPECT_EQ(parse_rational("-1.25"), Rational(-5, 4));
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_THROW(parse_rational("abc"), ValidationError);
  EXPECT_THROW(parse_rational("1/0"), ValidationError);
  EXPECT_THROW(parse_rational("0.8x"), ValidationError);
  EXPECT_TRUE(Exponent::parse("inf").is_infinite());
  EXPECT_EQ(Exponent::parse("inf").reciprocal(), Rational(0));
  EXPECT_THROW(pair("1.5", "2"), ValidationError);
}

TEST(Radial, Examples) {
  const auto endpoint = pair("inf", "2");
  EXPECT_FALSE(is_radial_admissible(endpoint, 2));
  EXPECT_TRUE(is_radial_admissible_boundary(endpoint, 2));
  EXPECT_FALSE(is_radial_admissible_boundary(pair("2", "6"), 2));
  EXPECT_FALSE(is_radial_admissible_boundary(pair("2", "10/3"), 3));
  // 1/2 < (3/2)(1/2 - 1/8) = 9/16
  EXPECT_TRUE(is_radial_admissible(pair("2", "8"), 2));
}

TEST(Alpha, Examples) {
  for (int n : {2, 3}) {
    for (const char* a : {"0.7", "0.8", "0.95"}) {
      EXPECT_TRUE(is_alpha_admissible(pair("inf", "2"), n, parse_rational(a)));
    }
  }
  // N = 2, a = 4/5: (18, 2N(N+2a)/(N^2+4a^2)) = (18, 90/41).
  const Rational r = Rational(2 * 2) * (2 + Rational(8, 5)) / (4 + 4 * Rational(16, 25));
  EXPECT_EQ(r, Rational(90, 41));
  EXPECT_TRUE(is_alpha_admissible(ExponentPair::make(Exponent::of(18), Exponent::of(r)), 2, Rational(4, 5)));
  EXPECT_FALSE(is_alpha_admissible(ExponentPair::make(Exponent::of(18), Exponent::of(3)), 2, Rational(4, 5)));
  EXPECT_TRUE(is_alpha_admissible(18.0, 90.0 / 41.0, 2, 0.8));
  EXPECT_TRUE(is_alpha_admissible(INFINITY, 2.0, 3, 0.7));
  EXPECT_FALSE(is_alpha_admissible(18.0, 2.2, 2, 0.8));
}

TEST(Alpha, TermOrderDoesNotMatter) {
  const auto p = ExponentPair::make(Exponent::of(18), Exponent::of(Rational(90, 41)));
  const Rational a(4, 5);
  const Rational x = 2 * a * p.q.reciprocal() + 2 * p.r.reciprocal();
  const Rational y = 2 * p.r.reciprocal() + p.q.reciprocal() * a * 2;
  EXPECT_EQ(x, y);
}

TEST(Gap, Examples) {
  const Rational a(4, 5);
  const auto adm = ExponentPair::make(Exponent::of(18), Exponent::of(Rational(90, 41)));
  const auto g0 = gap_condition(adm, pair("inf", "2"), 2, a, Rational(0));
  EXPECT_TRUE(g0.all());

  const ExponentPair p{Exponent::infinity(), Exponent::of(Rational(2 * 2) / (2 - 2 * a))};
  const ExponentPair pt{Exponent::infinity(), Exponent::of(Rational(2 * 2) / (2 + 2 * a))};
  const auto g1 = gap_condition(p, pt, 2, a, a);
  EXPECT_TRUE(g1.first);
  EXPECT_TRUE(g1.second);
  EXPECT_TRUE(g1.ordering);

  const auto two = pair("2", "10");
  EXPECT_FALSE(gap_condition(two, two, 2, a, Rational(0)).ordering);
}

TEST(SW, ReferenceValuesAndIdentities) {
  const auto sw = sw_exponents(2, Rational(4, 5));
  EXPECT_EQ(sw.q_S.value(), Rational(18));
  EXPECT_EQ(sw.r_S.value(), Rational(18));
  EXPECT_NEAR(sw.r_W.to_double(), 2.19512, 1e-5);
  EXPECT_TRUE(is_alpha_admissible(ExponentPair{sw.q_W, sw.r_W}, 2, Rational(4, 5)));
  EXPECT_THROW(sw_exponents(2, Rational(1)), ValidationError);
}

TEST(SW, SweepOverValidParameters) {
  int checked = 0;
  for (int n : {2, 3}) {
    const Rational lo = std::max(Rational(n, 2 * n - 1), Rational(n, 6));
    for (int k = 1; k <= 50; ++k) {
      const Rational a = lo + (1 - lo) * Rational(k, 51);
      const auto sw = sw_exponents(n, a);
      const ExponentPair w{sw.q_W, sw.r_W};
      EXPECT_TRUE(is_alpha_admissible(w, n, a));
      EXPECT_TRUE(is_radial_admissible(w, n));
      // p + 2 = 2* and q_S = (p+2)(N+2a)/N.
      const Rational p = 4 * a / (n - 2 * a);
      const Rational two_star = Rational(2 * n) / (n - 2 * a);
      EXPECT_EQ(p + 2, two_star);
      EXPECT_EQ(sw.q_S.value(), two_star * (n + 2 * a) / n);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 100);
}

TEST(Enumerate, SelfConsistent) {
  const Rational a(4, 5);
  const auto list = enumerate_admissible(2, a, 20);
  ASSERT_FALSE(list.empty());
  for (std::size_t i = 0; i < list.size(); ++i) {
    EXPECT_TRUE(is_alpha_admissible(list[i], 2, a));
    EXPECT_TRUE(is_radial_admissible(list[i], 2));
    EXPECT_EQ(list[i].q.reciprocal() + list[i].q.conjugate().reciprocal(), Rational(1));
    if (i > 0) EXPECT_FALSE(list[i].q < list[i - 1].q);
  }
  const auto boundary = enumerate_admissible(2, a, 20, true);
  EXPECT_EQ(boundary.back(), pair("inf", "2"));
  EXPECT_THROW(enumerate_admissible(2, a, 1), ValidationError);
}
