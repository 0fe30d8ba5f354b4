#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fnls/field.hpp"
#include "fnls/ground_state.hpp"
#include "fnls/physics.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

double mass(const Field& u);
/// int |u|^{p+2}.
double potential(const Field& u, const PhysicsParams& params);
/// E_mu(u) with mu = params.mu; see energy_functional for the closure form.
double energy(const Field& u, const PhysicsParams& params, const FarField* closure = nullptr);

/// A value computed with the unbounded weight x, with the boundary check that
/// qualifies it.
struct FlaggedValue {
  double value = 0.0;
  double boundary_ratio = 0.0;
  bool boundary_clean = true;
};

/// V = Re int i conj(u) x.grad u.  With i u_t + D^{2a} u + mu |u|^p u = 0 this
/// is the sign for which dV/dt = virial_rate_rhs.
FlaggedValue virial(const Field& u);
/// 2a ||D^a u||^2 + N mu p/(p+2) int |u|^{p+2}.  With a far-field closure the
/// flow is i u_t + D^{2a} u + F + mu |u|^p u = 0, which adds
/// 2 Re <x.grad u, F> + N Re <u, F>.
double virial_rate_rhs(const Field& u, const PhysicsParams& params, const FarField* closure = nullptr);

/// I_R = Re int i conj(u) psi_R x.grad u.
double localized_virial(const Field& u, const CutoffSpec& cutoff);

struct LocalizedVirialRhs {
  /// 2a int |D^a u|^2 psi_R
  /// N mu p/(p+2) int |u|^{p+2} psi_R
  /// 2 Re int conj(D^a u) [D^a, psi_R](x.grad u)
  /// mu p/(p+2) int |u|^{p+2} tilde psi_R
  /// N Re int conj(D^a u) [D^a, psi_R] u
  /// Re int conj(D^a u) [D^a, tilde psi_R] u
  std::array<double, 6> terms{};
  /// 2 Re <psi_R x.grad u, F> + Re <(N psi_R + tilde psi_R) u, F>; zero without a closure.
  double forcing = 0.0;
  /// Linear rate 2 Re <D^{2a} u, psi_R x.grad u> + Re <D^{2a} u, (N psi_R + tilde psi_R) u>
  /// minus terms 1, 3, 5, 6.  The expansion uses [D^a, x.grad] u = a D^a u on
  /// the whole box, so this is round-off for data that decays inside the box
  /// and O(1) for algebraically decaying data such as W.
  double dilation_defect = 0.0;
  double sum = 0.0;
  double boundary_ratio = 0.0;
  bool boundary_clean = true;
};

LocalizedVirialRhs localized_virial_rhs(const Field& u, const CutoffSpec& cutoff,
                                        const PhysicsParams& params, const FarField* closure = nullptr);

/// y_R = int |u|^2 psi_R.
double localized_mass(const Field& u, const CutoffSpec& cutoff);

struct TrappingResult {
  /// 1 - Q(u)/Q(W): positive iff the gradient stays below the ground state.
  double grad_margin = 0.0;
  /// (Q(u) - int |u|^{2*}) / Q(u).
  double coercivity_margin = 0.0;
  bool grad_below = false;
  bool coercivity = false;
  /// E_-(u) / Q(u).
  double comparability_ratio = 0.0;
  /// E_-(u) < (1 - delta0) E_-(W).
  bool energy_below = false;
};

/// Q is the corrected quadratic form when a far-field closure is supplied.
TrappingResult trapping_check(const Field& u, const PhysicsParams& params,
                              const GroundStateConstants& W, double delta0,
                              const FarField* closure = nullptr);

/// ||[D^a, psi_R] f||_2, ||[D^a, psi_R](x.grad f)||_2 and the latter on |x| < R^{1-eps},
/// each next to its bounding quantity.
struct CommutatorRow {
  double radius = 0.0;
  double cutoff_comm_lhs = 0.0;
  double cutoff_comm_rhs = 0.0;
  double dilation_comm_lhs = 0.0;
  double dilation_comm_rhs = 0.0;
  double dilation_comm_inner_lhs = 0.0;
  double dilation_comm_inner_rhs = 0.0;
  double g_exterior = 0.0;
  double cutoff_comm_ratio() const { return cutoff_comm_lhs / cutoff_comm_rhs; }
  double dilation_comm_ratio() const { return dilation_comm_lhs / dilation_comm_rhs; }
  double dilation_comm_inner_ratio() const { return dilation_comm_inner_lhs / dilation_comm_inner_rhs; }
};

/// Commutator norms and their bounding quantities over a sweep of radii, with
/// g = F^{-1}|F f| and exterior region |x| >= R^{1-eps}.
std::vector<CommutatorRow> commutator_norm_report(const Field& f, const std::vector<double>& radii,
                                                  const PhysicsParams& params, double eps);

struct DiagnosticsContext {
  CutoffSpec cutoff{};
  const FarField* closure = nullptr;
  const GroundStateConstants* ground_state = nullptr;
  double delta0 = 0.0;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double hdot_alpha_sq = 0.0;
  double potential = 0.0;
  double virial = 0.0;
  double virial_rate_rhs = 0.0;
  double localized_virial = 0.0;
  double localized_virial_rhs = 0.0;
  double localized_mass = 0.0;
  std::optional<bool> grad_below;
  std::optional<bool> coercivity;
  std::optional<double> comparability_ratio;
  double boundary_ratio = 0.0;
};

DiagnosticsRecord make_record(double t, const Field& u, const PhysicsParams& params,
                              const DiagnosticsContext& ctx);

/// Column names in record order.
const std::vector<std::string>& record_columns();
/// One row per record, 17 significant digits; missing trapping values are "NA".
void write_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_csv(std::istream& in);

}  // namespace fnls
