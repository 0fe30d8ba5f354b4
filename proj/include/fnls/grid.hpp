#pragma once

#include <array>
#include <cstddef>

namespace fnls {

/// Uniform periodic box [-L/2, L/2)^N sampled with M points per axis.
///
/// Physical index i on an axis maps to x_i = -L/2 + i*h.  Frequency index i
/// follows FFT ordering: k = i for i < M/2 and k = i - M otherwise, so the
/// single Nyquist mode sits at i = M/2 (k = -M/2).
struct Grid {
  int dim = 2;
  double box_length = 100.0;
  int points = 256;

  /// Validating constructor; throws ValidationError.
  static Grid make(int dim, double box_length, int points);

  std::size_t size() const;
  double spacing() const { return box_length / points; }
  double cell_volume() const;
  /// Volume of the box, L^N.
  double volume() const;
  /// Frequency lattice spacing 2*pi/L.
  double frequency_step() const;
  /// Largest per-axis wavenumber, pi*M/L.
  double nyquist_frequency() const;

  double coordinate(int i) const { return -0.5 * box_length + i * spacing(); }
  int signed_mode(int i) const { return i < points / 2 ? i : i - points; }
  double wavenumber(int i) const { return signed_mode(i) * frequency_step(); }
  bool is_nyquist(int i) const { return i == points / 2; }

  /// Multi-index of a flat row-major offset; unused trailing entries are 0.
  std::array<int, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, 3>& idx) const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace fnls
