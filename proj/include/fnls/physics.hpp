#pragma once

namespace fnls {

/// Dimension, order and sign of the energy-critical fractional NLS
///   i u_t + (-Delta)^alpha u + mu |u|^p u = 0,   p = 4 alpha / (N - 2 alpha).
struct PhysicsParams {
  int dim = 2;
  double alpha = 0.8;
  int mu = -1;

  /// Enforces 2a < N < 6a, a in (N/(2N-1), 1) and mu = +-1.
  static PhysicsParams make(int dim, double alpha, int mu);

  double p() const { return 4.0 * alpha / (dim - 2.0 * alpha); }
  /// Critical Sobolev exponent 2N/(N - 2 alpha); equals p + 2.
  double two_star() const { return 2.0 * dim / (dim - 2.0 * alpha); }
  /// Energy-critical scaling weight (N - 2 alpha)/2.
  double scaling_weight() const { return 0.5 * (dim - 2.0 * alpha); }
  bool focusing() const { return mu < 0; }
};

}  // namespace fnls
