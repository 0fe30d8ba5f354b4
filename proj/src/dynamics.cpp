#include "fnls/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "fnls/errors.hpp"
#include "fnls/norms.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

std::string to_string(Scheme s) { return s == Scheme::strang_split ? "strang_split" : "etdrk4"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "strang_split") return Scheme::strang_split;
  if (name == "etdrk4") return Scheme::etdrk4;
  throw ValidationError("unknown scheme '" + name + "' (expected strang_split or etdrk4)");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::blowup: return "blowup";
    case Termination::contamination: return "contamination";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!(t_end >= dt) || !std::isfinite(t_end)) throw ValidationError("t_end must be >= dt");
  if (sponge) {
    if (!(sponge->width_fraction > 0.0 && sponge->width_fraction < 0.3)) {
      throw ValidationError("sponge width fraction must lie in (0, 0.3)");
    }
    if (!(sponge->strength > 0.0)) throw ValidationError("sponge strength must be positive");
  }
  if (!std::isfinite(nonlinearity_scale)) throw ValidationError("nonlinearity scale must be finite");
}

long IntegratorConfig::steps() const { return std::lround(t_end / dt); }

Field linear_propagator(const Field& f, double tau, double alpha) {
  const bool freq = f.space() == Space::frequency;
  Field hat = to_frequency(f);
  const auto xi2 = detail::wavenumber_squared(f.grid());
  for (std::size_t n = 0; n < hat.size(); ++n) hat[n] *= std::polar(1.0, tau * std::pow(xi2[n], alpha));
  return freq ? hat : inverse_transform(hat);
}

Field nonlinear_phase_step(const Field& f, double tau, const PhysicsParams& params, double scale) {
  const bool freq = f.space() == Space::frequency;
  Field u = to_physical(f);
  const double p = params.p();
  for (auto& v : u.values()) v *= std::polar(1.0, params.mu * scale * tau * std::pow(std::abs(v), p));
  return freq ? forward_transform(u) : u;
}

double boundary_mass_fraction(const Field& u, double shell_fraction) {
  const Field v = to_physical(u);
  const Grid& g = v.grid();
  const double edge = (0.5 - shell_fraction) * g.box_length;
  double shell = 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) {
    const double m = std::norm(v[n]);
    total += m;
    const auto idx = g.unflatten(n);
    for (int d = 0; d < g.dim; ++d) {
      if (std::abs(g.coordinate(idx[d])) >= edge) {
        shell += m;
        break;
      }
    }
  }
  return total > 0.0 ? shell / total : 0.0;
}

namespace {

std::pair<double, double> hdot_and_tail(const Field& u, double alpha) {
  const Field hat = to_frequency(u);
  const auto xi2 = detail::wavenumber_squared(u.grid());
  const double cut2 = std::pow(0.5 * u.grid().nyquist_frequency(), 2);
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t n = 0; n < hat.size(); ++n) {
    const double w = std::pow(xi2[n], alpha) * std::norm(hat[n]);
    total += w;
    if (xi2[n] > cut2) tail += w;
  }
  return {std::sqrt(total / u.grid().volume()), total > 0.0 ? tail / total : 0.0};
}

}  // namespace

double spectral_tail_fraction(const Field& u, double alpha) { return hdot_and_tail(u, alpha).second; }

Monitors compute_monitors(const Field& u, double alpha) {
  Monitors m;
  const auto [h, tail] = hdot_and_tail(u, alpha);
  m.hdot_alpha = h;
  m.spectral_tail_fraction = tail;
  m.boundary_mass_fraction = boundary_mass_fraction(u);
  m.radiality_defect = radiality_defect(u);
  return m;
}

Field sponge_profile(const Grid& grid, const SpongeConfig& sponge) {
  const double half = 0.5 * grid.box_length;
  const double start = (1.0 - sponge.width_fraction) * half;
  const double width = sponge.width_fraction * half;
  return Field::sample(grid, [&](std::span<const double> x) {
    double s = 0.0;
    for (double xi : x) s = std::max(s, smooth_step((std::abs(xi) - start) / width));
    return cplx{s, 0.0};
  });
}

Stepper::Stepper(const Grid& grid, const PhysicsParams& params, const IntegratorConfig& cfg,
                 const FarField* closure, std::optional<double> dt)
    : grid_(grid), params_(params), cfg_(cfg), dt_(dt.value_or(cfg.dt)),
      coupling_(params.mu * cfg.nonlinearity_scale) {
  if (grid.dim != params.dim) throw ValidationError("grid dimension does not match physics dimension");
  if (dt_ == 0.0 || !std::isfinite(dt_)) throw ValidationError("time step must be finite and nonzero");
  const std::size_t size = grid.size();
  const auto xi2 = detail::wavenumber_squared(grid);
  std::vector<double> lam(size);
  for (std::size_t n = 0; n < size; ++n) lam[n] = std::pow(xi2[n], params.alpha);

  prop_.resize(size);
  for (std::size_t n = 0; n < size; ++n) prop_[n] = std::polar(1.0, dt_ * lam[n]);

  if (closure != nullptr) {
    if (!(closure->forcing.grid() == grid)) throw ValidationError("far-field closure lives on another grid");
    forced_ = true;
    const Field f = to_physical(closure->forcing);
    forcing_hat_.assign(f.values().begin(), f.values().end());
    fft(forcing_hat_);
    forcing_term_.resize(size);
    for (std::size_t n = 0; n < size; ++n) {
      const cplx phi = lam[n] > 0.0 ? (prop_[n] - 1.0) / lam[n] : cplx{0.0, dt_};
      forcing_term_[n] = forcing_hat_[n] * phi;
    }
  }

  keep_.assign(size, 1);
  if (cfg.dealias) {
    for (std::size_t n = 0; n < size; ++n) {
      const auto idx = grid.unflatten(n);
      for (int d = 0; d < grid.dim; ++d) {
        if (3 * std::abs(grid.signed_mode(idx[d])) >= grid.points) keep_[n] = 0;
      }
    }
  }

  if (cfg.sponge) {
    const Field s = sponge_profile(grid, *cfg.sponge);
    damping_.resize(size);
    for (std::size_t n = 0; n < size; ++n) damping_[n] = std::exp(-cfg.sponge->strength * std::abs(dt_) * s[n].real());
  }

  if (cfg.scheme == Scheme::etdrk4) {
    // Contour-integral phi functions (Kassam & Trefethen) for L = i lam.
    constexpr int kContour = 32;
    std::vector<cplx> roots(kContour);
    for (int j = 0; j < kContour; ++j) {
      roots[j] = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / kContour);
    }
    e2_.resize(size);
    q_.resize(size);
    f1_.resize(size);
    f2_.resize(size);
    f3_.resize(size);
    for (std::size_t n = 0; n < size; ++n) {
      const cplx z0{0.0, dt_ * lam[n]};
      e2_[n] = std::exp(0.5 * z0);
      cplx q{}, a{}, b{}, c{};
      for (const auto& r : roots) {
        const cplx z = z0 + r;
        const cplx ez = std::exp(z);
        const cplx z3 = z * z * z;
        q += (std::exp(0.5 * z) - 1.0) / z;
        a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        b += (2.0 + z + ez * (z - 2.0)) / z3;
        c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      q_[n] = dt_ * q / static_cast<double>(kContour);
      f1_[n] = dt_ * a / static_cast<double>(kContour);
      f2_[n] = dt_ * b / static_cast<double>(kContour);
      f3_[n] = dt_ * c / static_cast<double>(kContour);
    }
  }
}

void Stepper::fft(std::vector<cplx>& v) const { detail::fft_inplace(grid_, v, -1); }

void Stepper::ifft(std::vector<cplx>& v) const {
  detail::fft_inplace(grid_, v, +1);
  const double inv = 1.0 / static_cast<double>(v.size());
  for (auto& x : v) x *= inv;
}

void Stepper::nonlinear_inplace(std::vector<cplx>& u, double tau) const {
  const double k = coupling_ * tau;
  if (k == 0.0) return;
  const double half = 0.5 * params_.p();
  const int ihalf = static_cast<int>(std::lround(half));
  const bool integral = std::abs(half - ihalf) < 1e-14 && ihalf >= 1 && ihalf <= 8;
  for (auto& v : u) {
    const double a2 = std::norm(v);
    double w;
    if (integral) {
      w = a2;
      for (int i = 1; i < ihalf; ++i) w *= a2;
    } else {
      w = std::pow(a2, half);
    }
    v *= std::polar(1.0, k * w);
  }
}

void Stepper::strang(std::vector<cplx>& u) const {
  const double half = 0.5 * dt_;
  auto linear = [&](std::vector<cplx>& hat) {
    for (std::size_t n = 0; n < hat.size(); ++n) hat[n] *= prop_[n];
    if (forced_) {
      for (std::size_t n = 0; n < hat.size(); ++n) hat[n] += forcing_term_[n];
    }
  };
  if (!cfg_.dealias) {
    nonlinear_inplace(u, half);
    fft(u);
    linear(u);
    ifft(u);
    nonlinear_inplace(u, half);
    return;
  }
  std::vector<cplx> hat(u);
  fft(hat);
  auto masked_nonlinear = [&]() {
    std::vector<cplx> inc(u);
    nonlinear_inplace(inc, half);
    for (std::size_t n = 0; n < inc.size(); ++n) inc[n] -= u[n];
    fft(inc);
    for (std::size_t n = 0; n < inc.size(); ++n) {
      if (keep_[n]) hat[n] += inc[n];
    }
  };
  masked_nonlinear();
  linear(hat);
  u = hat;
  ifft(u);
  masked_nonlinear();
  u = hat;
  ifft(u);
}

void Stepper::nonlinear_term(const std::vector<cplx>& v_hat, std::vector<cplx>& out_hat) const {
  out_hat = v_hat;
  ifft(out_hat);
  const double p = params_.p();
  for (auto& v : out_hat) v *= cplx{0.0, coupling_ * std::pow(std::abs(v), p)};
  fft(out_hat);
  for (std::size_t n = 0; n < out_hat.size(); ++n) {
    if (!keep_[n]) out_hat[n] = 0.0;
    if (forced_) out_hat[n] += cplx{0.0, 1.0} * forcing_hat_[n];
  }
}

void Stepper::etdrk4(std::vector<cplx>& u) const {
  const std::size_t size = u.size();
  std::vector<cplx> v(u);
  fft(v);
  std::vector<cplx> nv, na, nb, nc, a(size), b(size), c(size);
  nonlinear_term(v, nv);
  for (std::size_t n = 0; n < size; ++n) a[n] = e2_[n] * v[n] + q_[n] * nv[n];
  nonlinear_term(a, na);
  for (std::size_t n = 0; n < size; ++n) b[n] = e2_[n] * v[n] + q_[n] * na[n];
  nonlinear_term(b, nb);
  for (std::size_t n = 0; n < size; ++n) c[n] = e2_[n] * a[n] + q_[n] * (2.0 * nb[n] - nv[n]);
  nonlinear_term(c, nc);
  for (std::size_t n = 0; n < size; ++n) {
    v[n] = prop_[n] * v[n] + f1_[n] * nv[n] + 2.0 * f2_[n] * (na[n] + nb[n]) + f3_[n] * nc[n];
  }
  ifft(v);
  u = std::move(v);
}

bool Stepper::step(Field& u) const {
  if (!(u.grid() == grid_) || u.space() != Space::physical) {
    throw ValidationError("stepper needs a physical field on its grid");
  }
  std::vector<cplx> buf(u.values().begin(), u.values().end());
  if (cfg_.scheme == Scheme::strang_split) {
    strang(buf);
  } else {
    etdrk4(buf);
  }
  if (!damping_.empty()) {
    for (std::size_t n = 0; n < buf.size(); ++n) buf[n] *= damping_[n];
  }
  bool finite = true;
  for (std::size_t n = 0; n < buf.size(); ++n) {
    finite = finite && std::isfinite(buf[n].real()) && std::isfinite(buf[n].imag());
    u[n] = buf[n];
  }
  return finite;
}

SimState strang_step(const SimState& state, const IntegratorConfig& cfg, const PhysicsParams& params,
                     const FarField* closure) {
  IntegratorConfig c = cfg;
  c.scheme = Scheme::strang_split;
  const Stepper stepper(state.u.grid(), params, c, closure);
  SimState next{state.t + cfg.dt, to_physical(state.u), state.step_count + 1, {}};
  if (!stepper.step(next.u)) throw NumericalError("non-finite values after Strang step (blow-up)");
  next.monitors = compute_monitors(next.u, params.alpha);
  return next;
}

EvolveResult evolve(const Field& u0, const IntegratorConfig& cfg, const PhysicsParams& params,
                    const EvolveOptions& options) {
  cfg.validate();
  if (options.cadence < 1 || options.monitor_every < 1) throw ValidationError("cadence must be >= 1");
  Field u = to_physical(u0);
  for (const auto& v : u.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw ValidationError("initial data not finite");
  }
  if (options.enforce_radial && radiality_defect(u) > 1e-8) {
    throw ValidationError("initial data is not radial (radiality defect > 1e-8)");
  }
  const Stepper stepper(u.grid(), params, cfg, options.closure);
  DiagnosticsContext ctx = options.diagnostics;
  if (ctx.closure == nullptr) ctx.closure = options.closure;

  EvolveResult out;
  const Monitors m0 = compute_monitors(u, params.alpha);
  out.monitor_log.push_back({0.0, m0});
  auto sample = [&](double t) {
    if (options.keep_fields) out.trajectory.push_back({t, u});
    if (options.record_diagnostics) out.records.push_back(make_record(t, u, params, ctx));
  };
  sample(0.0);

  const long steps = cfg.steps();
  long step = 0;
  Monitors last = m0;
  while (step < steps) {
    const bool finite = stepper.step(u);
    ++step;
    const double t = static_cast<double>(step) * cfg.dt;
    if (!finite) {
      out.termination = Termination::blowup;
      out.flag_time = t;
      out.flag_reason = "non-finite values";
      break;
    }
    const bool sample_now = step % options.cadence == 0 || step == steps;
    if (step % options.monitor_every == 0 || sample_now) {
      last = compute_monitors(u, params.alpha);
      out.monitor_log.push_back({t, last});
      std::string reason;
      Termination kind = Termination::completed;
      if (m0.hdot_alpha > 0.0 && last.hdot_alpha > options.blowup_growth * m0.hdot_alpha) {
        kind = Termination::blowup;
        reason = "Hdot^alpha norm grew beyond the configured factor";
      } else if (last.spectral_tail_fraction > options.tail_threshold) {
        kind = Termination::blowup;
        reason = "spectral tail fraction above threshold";
      } else if (!cfg.sponge &&
                 last.boundary_mass_fraction - m0.boundary_mass_fraction > options.contamination_threshold) {
        kind = Termination::contamination;
        reason = "boundary mass fraction grew beyond threshold";
      }
      if (kind != Termination::completed) {
        out.termination = kind;
        out.flag_time = t;
        out.flag_reason = reason;
        sample(t);
        break;
      }
    }
    if (sample_now) sample(t);
  }
  out.final_state = SimState{static_cast<double>(step) * cfg.dt, u, step, last};
  return out;
}

}  // namespace fnls
