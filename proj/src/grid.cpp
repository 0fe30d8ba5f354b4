#include "fnls/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fnls/errors.hpp"

namespace fnls {

Grid Grid::make(int dim, double box_length, int points) {
  if (dim != 2 && dim != 3) {
    throw ValidationError("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) {
    throw ValidationError("box length must be positive and finite");
  }
  if (points < 8 || (points & (points - 1)) != 0) {
    throw ValidationError("points per axis must be a power of two >= 8, got " +
                          std::to_string(points));
  }
  return Grid{dim, box_length, points};
}

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points);
  return n;
}

double Grid::cell_volume() const { return std::pow(spacing(), dim); }

double Grid::volume() const { return std::pow(box_length, dim); }

double Grid::frequency_step() const { return 2.0 * std::numbers::pi / box_length; }

double Grid::nyquist_frequency() const { return std::numbers::pi * points / box_length; }

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  const auto m = static_cast<std::size_t>(points);
  for (int d = dim - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % m);
    flat /= m;
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim; ++d) flat = flat * static_cast<std::size_t>(points) + idx[d];
  return flat;
}

}  // namespace fnls
