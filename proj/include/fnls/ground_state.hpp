#pragma once

#include <array>
#include <optional>

#include "fnls/field.hpp"
#include "fnls/physics.hpp"

namespace fnls {

/// Member e^{i theta0} lambda0^{(N-2a)/2} C1 (1 + C2 lambda0^2 |x - x0|^2)^{-(N-2a)/2}
/// of the ground-state family.
struct GroundStateSpec {
  PhysicsParams params{};
  double C1 = 1.0;
  double C2 = 1.0;
  double lambda0 = 1.0;
  double theta0 = 0.0;
  std::array<double, 3> x0{0.0, 0.0, 0.0};

  static GroundStateSpec make(const PhysicsParams& params, double C1, double C2 = 1.0,
                              double lambda0 = 1.0, double theta0 = 0.0,
                              std::array<double, 3> x0 = {0.0, 0.0, 0.0});
  /// C2 = 1 and C1 = kappa^{(N-2a)/(4a)} from calibrate_kappa.
  static GroundStateSpec calibrated(const PhysicsParams& params, int quad_points = 1 << 15);

  GroundStateSpec with_scale(double lambda) const;
  GroundStateSpec with_phase(double theta) const;
  /// Amplitude at x0, C1 lambda0^{(N-2a)/2}.
  double peak() const;
};

/// kappa with (-Delta)^a f = kappa f^{(N+2a)/(N-2a)} for f = (1+|x|^2)^{-(N-2a)/2},
/// from the singular-integral form of (-Delta)^a f(0).  Throws NumericalError if
/// doubling quad_points changes the result by more than 1e-8 relative.
double calibrate_kappa(const PhysicsParams& params, int quad_points = 1 << 15);

Field profile(const Grid& grid, const GroundStateSpec& spec);

/// Box extension used to resolve the algebraic tail of W.
inline constexpr int kDefaultExtension = 8;

/// (-Delta)^a of the closed-form profile computed on a box `extension` times
/// larger (same spacing), restricted to `grid`.  extension must be a power of two.
Field tail_corrected_laplacian(const Grid& grid, const GroundStateSpec& spec,
                               int extension = kDefaultExtension);

/// Frozen far field for data near amplitude * W: F = amplitude * (the part of
/// (-Delta)^a W generated outside the periodic box).  Adding F to the box
/// operator keeps W stationary.  The corrected quadratic form
///   Q(u) = Re<u, (-Delta)^a u> + 2 Re<u, F> - Re<amplitude W, F>
/// is exact on amplitude * W and to first order for perturbations supported
/// inside the box.
struct FarField {
  Field forcing;
  double amplitude = 1.0;
  double baseline = 0.0;
};

FarField far_field_closure(const Grid& grid, const GroundStateSpec& spec, double amplitude = 1.0,
                           int extension = kDefaultExtension);

/// ||(-Delta)^a W - |W|^p W||_2 / ||(-Delta)^a W||_2 with the periodic box operator.
double elliptic_residual(const Field& W, const PhysicsParams& params);
/// Same, with a supplied (-Delta)^a W (e.g. tail_corrected_laplacian).
double elliptic_residual(const Field& W, const Field& laplacian_W, const PhysicsParams& params);

/// ||W||_{2*} / ||D^a W||_2 with the periodic box seminorm.
double sobolev_constant(const Field& W, const PhysicsParams& params);

struct GroundStateConstants {
  double kappa = 0.0;
  double C1 = 0.0;
  double sobolev_const = 0.0;
  double grad_norm_sq = 0.0;
  double potential_integral = 0.0;
  double energy_focusing = 0.0;
  double energy_defocusing = 0.0;
  double residual = 0.0;
  /// Box-truncated mass; W is not in L^2 when N <= 4a.
  double box_mass = 0.0;
  bool mass_divergent = false;
};

/// Constants of the calibrated W on `grid`, with tail-corrected quadratic form.
GroundStateConstants ground_state_constants(const Grid& grid, const PhysicsParams& params,
                                            int extension = kDefaultExtension,
                                            int quad_points = 1 << 15);

struct PetviashviliResult {
  Field W;
  int iterations = 0;
  double last_change = 0.0;
};

/// Fixed-point iteration for (-Delta)^a W + eps W = |W|^p W with stabilizing
/// factor (<LW, W> / <N(W), W>)^{(p+1)/p}.  Starts from `initial` or a
/// Gaussian.  Throws NumericalError on max_iter or collapse.
PetviashviliResult petviashvili_solve(const Grid& grid, const PhysicsParams& params, double eps,
                                      int max_iter, double tol,
                                      const std::optional<Field>& initial = std::nullopt);

/// Relative l2 distance on |x| <= radius between f and the family member
/// with the same peak value.
double core_profile_mismatch(const Field& f, const GroundStateSpec& base, double radius);

/// ||D^a u||_2^2 on the box, or the corrected form Q(u) of a far-field closure.
double quadratic_form(const Field& u, const PhysicsParams& params, const FarField* closure = nullptr);

/// E_mu from the quadratic form above.
double energy_functional(const Field& u, const PhysicsParams& params, int mu,
                         const FarField* closure = nullptr);

/// K^-(a) for mu = -1, K^+(a) for mu = +1.
bool in_K(const Field& f, const PhysicsParams& params, double a, const GroundStateConstants& W,
          const FarField* closure = nullptr);

}  // namespace fnls
