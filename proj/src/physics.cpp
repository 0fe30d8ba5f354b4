#include "fnls/physics.hpp"

#include <cmath>
#include <sstream>

#include "fnls/errors.hpp"

namespace fnls {

PhysicsParams PhysicsParams::make(int dim, double alpha, int mu) {
  std::ostringstream msg;
  if (dim < 2) {
    msg << "dimension N = " << dim << " is unsupported; need N >= 2";
    throw ValidationError(msg.str());
  }
  if (!std::isfinite(alpha) || !(2.0 * alpha < dim)) {
    msg << "alpha = " << alpha << " violates 2*alpha < N (N = " << dim << ")";
    throw ValidationError(msg.str());
  }
  if (!(dim < 6.0 * alpha)) {
    msg << "alpha = " << alpha << " violates N < 6*alpha (N = " << dim
        << "); global well-posedness requires 2*alpha < N < 6*alpha";
    throw ValidationError(msg.str());
  }
  const double lower = dim / (2.0 * dim - 1.0);
  if (!(alpha > lower && alpha < 1.0)) {
    msg << "alpha = " << alpha << " is outside (N/(2N-1), 1) = (" << lower
        << ", 1) required for radial Strichartz admissibility";
    throw ValidationError(msg.str());
  }
  if (mu != 1 && mu != -1) {
    msg << "mu must be +1 (defocusing) or -1 (focusing), got " << mu;
    throw ValidationError(msg.str());
  }
  return PhysicsParams{dim, alpha, mu};
}

}  // namespace fnls
