#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fnls/grid.hpp"

namespace fnls {

using cplx = std::complex<double>;

enum class Space { physical, frequency };

/// Complex samples of a function on a Grid, in one of two representations.
///
/// Frequency coefficients approximate the continuous transform
/// \f$\hat f(\xi) = \int f(x) e^{-i\xi\cdot x}\,dx\f$, i.e.
/// \f$\hat f_k = h^N \sum_j f_j e^{-i\xi_k\cdot x_j}\f$, so that
/// \f$\sum_j |f_j|^2 h^N = L^{-N}\sum_k |\hat f_k|^2\f$.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, Space space = Space::physical);
  Field(const Grid& grid, std::vector<cplx> values, Space space = Space::physical);

  /// Samples fn(x) at every physical grid point; x has grid.dim entries.
  static Field sample(const Grid& grid, const std::function<cplx(std::span<const double>)>& fn);
  /// Samples a radial function fn(|x|).
  static Field sample_radial(const Grid& grid, const std::function<cplx(double)>& fn);

  const Grid& grid() const { return grid_; }
  Space space() const { return space_; }
  std::size_t size() const { return values_.size(); }

  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx scale);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, cplx s) { return a *= s; }
  friend Field operator*(cplx s, Field a) { return a *= s; }

  /// Pointwise product of two physical fields.
  Field pointwise(const Field& other) const;
  Field conjugate() const;
  /// Largest |Im| relative to largest |value|; 0 for the zero field.
  double imaginary_fraction() const;

 private:
  void require_compatible(const Field& other) const;

  Grid grid_{};
  Space space_ = Space::physical;
  std::vector<cplx> values_;
};

/// One sample of a trajectory.
struct Snapshot {
  double t = 0.0;
  Field u;
};

}  // namespace fnls
