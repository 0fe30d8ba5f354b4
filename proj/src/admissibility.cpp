#include "fnls/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fnls/errors.hpp"

namespace fnls {

Rational parse_rational(const std::string& text) {
  auto fail = [&]() -> Rational { throw ValidationError("not a rational number: '" + text + "'"); };
  if (text.empty()) return fail();
  try {
    if (auto slash = text.find('/'); slash != std::string::npos) {
      std::size_t used = 0;
      const long long num = std::stoll(text.substr(0, slash), &used);
      if (used != slash) return fail();
      const std::string den_text = text.substr(slash + 1);
      const long long den = std::stoll(den_text, &used);
      if (used != den_text.size() || den == 0) return fail();
      return Rational(num, den);
    }
    const auto dot = text.find('.');
    const std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
    const std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (frac.size() > 15 || frac.find_first_not_of("0123456789") != std::string::npos) return fail();
    const bool negative = !whole.empty() && whole[0] == '-';
    std::size_t used = 0;
    const long long w = whole.empty() || whole == "-" ? 0 : std::stoll(whole, &used);
    if (!whole.empty() && whole != "-" && used != whole.size()) return fail();
    long long scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const long long f = frac.empty() ? 0 : std::stoll(frac);
    Rational out(w);
    out += Rational(negative ? -f : f, scale);
    return out;
  } catch (const std::logic_error&) {
    return fail();
  }
}

Exponent Exponent::of(Rational value) {
  if (value < Rational(1)) throw ValidationError("exponent must be >= 1");
  return Exponent(false, value);
}

Exponent Exponent::parse(const std::string& text) {
  if (text == "inf" || text == "infinity") return infinity();
  return of(parse_rational(text));
}

Rational Exponent::value() const {
  if (infinite_) throw ValidationError("infinite exponent has no finite value");
  return value_;
}

double Exponent::to_double() const {
  return infinite_ ? INFINITY : boost::rational_cast<double>(value_);
}

Exponent Exponent::conjugate() const {
  const Rational inv = Rational(1) - reciprocal();
  return inv == Rational(0) ? infinity() : of(Rational(1) / inv);
}

std::string Exponent::str() const {
  if (infinite_) return "inf";
  if (value_.denominator() == 1) return std::to_string(value_.numerator());
  return std::to_string(value_.numerator()) + "/" + std::to_string(value_.denominator());
}

ExponentPair ExponentPair::make(Exponent q, Exponent r) {
  if (q.reciprocal() > Rational(1, 2) || r.reciprocal() > Rational(1, 2)) {
    throw ValidationError("exponent pair needs q, r in [2, inf]");
  }
  return ExponentPair{q, r};
}

bool is_radial_admissible(const ExponentPair& p, int dim) {
  const Rational rhs = (Rational(dim) - Rational(1, 2)) * (Rational(1, 2) - p.r.reciprocal());
  return p.q.reciprocal() < rhs;
}

bool is_radial_admissible_boundary(const ExponentPair& p, int dim) {
  if (dim >= 2 && !p.q.is_infinite() && p.q.value() == Rational(2) && !p.r.is_infinite() &&
      p.r.value() == Rational(4 * dim - 2, 2 * dim - 3)) {
    return false;
  }
  const Rational rhs = (Rational(dim) - Rational(1, 2)) * (Rational(1, 2) - p.r.reciprocal());
  return p.q.reciprocal() <= rhs;
}

bool is_alpha_admissible(const ExponentPair& p, int dim, Rational alpha) {
  return 2 * alpha * p.q.reciprocal() + dim * p.r.reciprocal() == Rational(dim, 2);
}

bool is_alpha_admissible(double q, double r, int dim, double alpha) {
  if (!(q >= 2.0) || !(r >= 2.0)) return false;
  const double lhs = 2.0 * alpha / q + dim / r;
  return std::abs(lhs - 0.5 * dim) <= 1e-12 * std::max(1.0, 0.5 * dim);
}

GapResult gap_condition(const ExponentPair& p, const ExponentPair& pt, int dim, Rational alpha,
                        Rational gamma) {
  GapResult g;
  const Rational half = Rational(dim, 2);
  g.first = 2 * alpha * p.q.reciprocal() + dim * p.r.reciprocal() == half - gamma;
  g.second = 2 * alpha * pt.q.reciprocal() + dim * pt.r.reciprocal() == half + gamma;
  // qt' < q  <=>  1/qt' > 1/q.
  g.ordering = Rational(1) - pt.q.reciprocal() > p.q.reciprocal();
  return g;
}

SwExponents sw_exponents(int dim, Rational alpha) {
  if (!(Rational(dim) > 2 * alpha)) throw ValidationError("S/W exponents need N > 2 alpha");
  const Rational n(dim);
  const Exponent qs = Exponent::of(2 * (n + 2 * alpha) / (n - 2 * alpha));
  const Exponent rw = Exponent::of(2 * n * (n + 2 * alpha) / (n * n + 4 * alpha * alpha));
  return {qs, qs, qs, rw};
}

std::vector<ExponentPair> enumerate_admissible(int dim, Rational alpha, int denominator_bound,
                                               bool boundary_variant) {
  if (denominator_bound < 2) throw ValidationError("denominator bound must be >= 2");
  std::vector<Rational> inv_q{Rational(0)};
  for (int k = 1; k <= denominator_bound; ++k) {
    for (int j = 1; 2 * j <= k; ++j) {
      if (std::gcd(j, k) == 1) inv_q.emplace_back(j, k);
    }
  }
  std::vector<ExponentPair> out;
  for (const Rational& a : inv_q) {
    const Rational inv_r = Rational(1, 2) - 2 * alpha * a / dim;
    if (inv_r < Rational(0) || inv_r > Rational(1, 2)) continue;
    const Exponent q = a == Rational(0) ? Exponent::infinity() : Exponent::of(1 / a);
    const Exponent r = inv_r == Rational(0) ? Exponent::infinity() : Exponent::of(1 / inv_r);
    const ExponentPair pair{q, r};
    const bool ok = boundary_variant ? is_radial_admissible_boundary(pair, dim) : is_radial_admissible(pair, dim);
    if (ok) out.push_back(pair);
  }
  std::sort(out.begin(), out.end(), [](const ExponentPair& x, const ExponentPair& y) { return x.q < y.q; });
  return out;
}

}  // namespace fnls
