#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnls/diagnostics.hpp"
#include "fnls/field.hpp"
#include "fnls/ground_state.hpp"
#include "fnls/physics.hpp"

namespace fnls {

enum class Scheme { strang_split, etdrk4 };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

/// Multiplicative absorption e^{-strength dt s(x)}, s rising smoothly from 0 to 1
/// across the outer width_fraction of each half-axis.
struct SpongeConfig {
  double width_fraction = 0.1;
  double strength = 1.0;
};

struct IntegratorConfig {
  Scheme scheme = Scheme::strang_split;
  double dt = 1e-3;
  double t_end = 1.0;
  /// 2/3-rule mask on the nonlinear increment.
  bool dealias = true;
  std::optional<SpongeConfig> sponge;
  /// Multiplies mu; 0 gives the linear flow.
  double nonlinearity_scale = 1.0;

  void validate() const;
  long steps() const;
};

struct Monitors {
  double hdot_alpha = 0.0;
  double boundary_mass_fraction = 0.0;
  double radiality_defect = 0.0;
  /// Share of ||D^a u||^2 carried by |xi| > xi_Nyquist / 2.
  double spectral_tail_fraction = 0.0;
};

struct SimState {
  double t = 0.0;
  Field u;
  long step_count = 0;
  Monitors monitors;
};

/// e^{i tau D^{2a}} f.
Field linear_propagator(const Field& f, double tau, double alpha);
/// f e^{i mu tau |f|^p}, the exact flow of i u_t + mu |u|^p u = 0.
Field nonlinear_phase_step(const Field& f, double tau, const PhysicsParams& params, double scale = 1.0);

double boundary_mass_fraction(const Field& u, double shell_fraction = 0.1);
double spectral_tail_fraction(const Field& u, double alpha);
Monitors compute_monitors(const Field& u, double alpha);
Field sponge_profile(const Grid& grid, const SpongeConfig& sponge);

/// Advances physical fields by one step of the configured scheme.  dt may be
/// negative (time reversal).  With a far-field closure the linear part is
/// u_t = i(D^{2a} u + F), integrated exactly.
class Stepper {
 public:
  Stepper(const Grid& grid, const PhysicsParams& params, const IntegratorConfig& cfg,
          const FarField* closure = nullptr, std::optional<double> dt = std::nullopt);

  /// Returns false if the state became non-finite.
  bool step(Field& u) const;
  double dt() const { return dt_; }

 private:
  void nonlinear_inplace(std::vector<cplx>& u, double tau) const;
  void fft(std::vector<cplx>& v) const;
  void ifft(std::vector<cplx>& v) const;
  void strang(std::vector<cplx>& u) const;
  void etdrk4(std::vector<cplx>& u) const;
  void nonlinear_term(const std::vector<cplx>& v_hat, std::vector<cplx>& out_hat) const;

  Grid grid_;
  PhysicsParams params_;
  IntegratorConfig cfg_;
  double dt_;
  double coupling_;
  bool forced_ = false;
  std::vector<cplx> prop_;
  std::vector<cplx> forcing_term_;
  std::vector<cplx> forcing_hat_;
  std::vector<unsigned char> keep_;
  std::vector<double> damping_;
  // ETDRK4 coefficients.
  std::vector<cplx> e2_, q_, f1_, f2_, f3_;
};

/// One Strang step (half nonlinear, full linear, half nonlinear).
SimState strang_step(const SimState& state, const IntegratorConfig& cfg, const PhysicsParams& params,
                     const FarField* closure = nullptr);

enum class Termination { completed, blowup, contamination };
std::string to_string(Termination t);

struct EvolveOptions {
  /// Steps between trajectory samples and diagnostics records.
  long cadence = 100;
  /// Steps between monitor evaluations (blow-up and contamination checks).
  long monitor_every = 10;
  bool keep_fields = true;
  bool record_diagnostics = true;
  DiagnosticsContext diagnostics{};
  /// Frozen far field for W-family data; also used by the diagnostics.
  const FarField* closure = nullptr;
  bool enforce_radial = false;
  double contamination_threshold = 1e-3;
  double blowup_growth = 1e3;
  double tail_threshold = 0.1;
};

struct MonitorSample {
  double t = 0.0;
  Monitors monitors;
};

struct EvolveResult {
  std::vector<Snapshot> trajectory;
  std::vector<DiagnosticsRecord> records;
  std::vector<MonitorSample> monitor_log;
  SimState final_state;
  Termination termination = Termination::completed;
  double flag_time = 0.0;
  std::string flag_reason;
};

EvolveResult evolve(const Field& u0, const IntegratorConfig& cfg, const PhysicsParams& params,
                    const EvolveOptions& options = {});

}  // namespace fnls
