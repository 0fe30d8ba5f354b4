#include "fnls/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fnls/errors.hpp"

namespace fnls {

Field::Field(const Grid& grid, Space space)
    : grid_(grid), space_(space), values_(grid.size(), cplx{0.0, 0.0}) {}

Field::Field(const Grid& grid, std::vector<cplx> values, Space space)
    : grid_(grid), space_(space), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ValidationError("field has " + std::to_string(values_.size()) + " values, grid needs " +
                          std::to_string(grid_.size()));
  }
}

Field Field::sample(const Grid& grid, const std::function<cplx(std::span<const double>)>& fn) {
  Field f(grid);
  std::array<double, 3> x{};
  for (std::size_t n = 0; n < f.size(); ++n) {
    const auto idx = grid.unflatten(n);
    for (int d = 0; d < grid.dim; ++d) x[d] = grid.coordinate(idx[d]);
    f.values_[n] = fn(std::span<const double>(x.data(), grid.dim));
  }
  return f;
}

Field Field::sample_radial(const Grid& grid, const std::function<cplx(double)>& fn) {
  return sample(grid, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return fn(std::sqrt(r2));
  });
}

void Field::require_compatible(const Field& other) const {
  if (!(grid_ == other.grid_) || space_ != other.space_) {
    throw ValidationError("fields live on different grids or representations");
  }
}

Field& Field::operator+=(const Field& other) {
  require_compatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_compatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(cplx scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

Field Field::pointwise(const Field& other) const {
  require_compatible(other);
  if (space_ != Space::physical) throw ValidationError("pointwise product needs physical fields");
  Field out(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] *= other.values_[i];
  return out;
}

Field Field::conjugate() const {
  Field out(*this);
  for (auto& v : out.values_) v = std::conj(v);
  return out;
}

double Field::imaginary_fraction() const {
  double peak = 0.0;
  double imag = 0.0;
  for (const auto& v : values_) {
    peak = std::max(peak, std::abs(v));
    imag = std::max(imag, std::abs(v.imag()));
  }
  return peak > 0.0 ? imag / peak : 0.0;
}

}  // namespace fnls
