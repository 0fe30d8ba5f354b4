#pragma once

#include <boost/rational.hpp>
#include <string>
#include <vector>

namespace fnls {

using Rational = boost::rational<long long>;

/// Parses "4/5", "0.8", "2" or "inf" exactly.
Rational parse_rational(const std::string& text);

/// A Lebesgue exponent in [1, inf]; infinity has reciprocal 0.
class Exponent {
 public:
  static Exponent infinity() { return Exponent(true, Rational(0)); }
  static Exponent of(Rational value);
  /// Parses like parse_rational, also accepting "inf".
  static Exponent parse(const std::string& text);

  bool is_infinite() const { return infinite_; }
  Rational value() const;
  Rational reciprocal() const { return infinite_ ? Rational(0) : Rational(1) / value_; }
  double to_double() const;
  /// Hoelder conjugate q' with 1/q + 1/q' = 1.
  Exponent conjugate() const;
  std::string str() const;

  friend bool operator==(const Exponent& a, const Exponent& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend bool operator<(const Exponent& a, const Exponent& b) { return a.reciprocal() > b.reciprocal(); }

 private:
  Exponent(bool inf, Rational v) : infinite_(inf), value_(v) {}
  bool infinite_;
  Rational value_;
};

struct ExponentPair {
  Exponent q = Exponent::infinity();
  Exponent r = Exponent::of(2);

  /// Requires q, r in [2, inf].
  static ExponentPair make(Exponent q, Exponent r);
  friend bool operator==(const ExponentPair&, const ExponentPair&) = default;
};

/// 1/q < (N - 1/2)(1/2 - 1/r).
bool is_radial_admissible(const ExponentPair& p, int dim);
/// Same with <=, except the endpoint (2, (4N-2)/(2N-3)).
bool is_radial_admissible_boundary(const ExponentPair& p, int dim);

/// 2a/q + N/r = N/2, exactly.
bool is_alpha_admissible(const ExponentPair& p, int dim, Rational alpha);
/// Floating-point variant with tolerance 1e-12 (q or r may be infinite).
bool is_alpha_admissible(double q, double r, int dim, double alpha);

struct GapResult {
  bool first = false;
  bool second = false;
  bool ordering = false;
  bool all() const { return first && second && ordering; }
};

/// 2a/q + N/r = N/2 - gamma, 2a/qt + N/rt = N/2 + gamma, qt' < q.
GapResult gap_condition(const ExponentPair& p, const ExponentPair& pt, int dim, Rational alpha,
                        Rational gamma);

struct SwExponents {
  Exponent q_S, r_S, q_W, r_W;
};

/// q_S = r_S = 2(N+2a)/(N-2a), q_W = q_S, r_W = 2N(N+2a)/(N^2+4a^2).
SwExponents sw_exponents(int dim, Rational alpha);

/// Pairs with 1/q in the Farey set of order denominator_bound (1/q <= 1/2),
/// r fixed by alpha-admissibility, kept when r in [2, inf] and radially
/// admissible (strict, or boundary variant).  Sorted by increasing q.
std::vector<ExponentPair> enumerate_admissible(int dim, Rational alpha, int denominator_bound,
                                               bool boundary_variant = false);

}  // namespace fnls
