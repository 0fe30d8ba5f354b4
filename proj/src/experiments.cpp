#include "fnls/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "fnls/errors.hpp"
#include "fnls/field_io.hpp"
#include "fnls/norms.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

namespace fs = std::filesystem;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::defocusing_scatter: return "defocusing_scatter";
    case Scenario::focusing_subthreshold: return "focusing_subthreshold";
    case Scenario::focusing_superthreshold: return "focusing_superthreshold";
    case Scenario::scaling_covariance: return "scaling_covariance";
    case Scenario::stationarity: return "stationarity";
    case Scenario::virial_suite: return "virial_suite";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::defocusing_scatter, Scenario::focusing_subthreshold,
                     Scenario::focusing_superthreshold, Scenario::scaling_covariance, Scenario::stationarity,
                     Scenario::virial_suite}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown scenario '" + name + "'");
}

std::string to_string(InitialFamily f) {
  switch (f) {
    case InitialFamily::gaussian: return "gaussian";
    case InitialFamily::ground_state: return "ground_state";
    case InitialFamily::scaled_ground_state: return "scaled_ground_state";
  }
  return "unknown";
}

InitialFamily parse_initial_family(const std::string& name) {
  for (InitialFamily f : {InitialFamily::gaussian, InitialFamily::ground_state, InitialFamily::scaled_ground_state}) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown initial condition family '" + name +
                        "' (expected gaussian, ground_state or scaled_ground_state)");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ValidationError(label("") + " must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) return need(key, fallback);
    const Json& v = raw(key);
    if (!v.is_number()) throw ValidationError(label(key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(label(key) + " must be finite");
    return d;
  }

  long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) {
    if (!has(key)) return need(key, fallback);
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ValidationError(label(key) + " must be an integer");
    return v.get<long long>();
  }

  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) {
    if (!has(key)) return need(key, fallback);
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ValidationError(label(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) return need(key, fallback);
    const Json& v = raw(key);
    if (!v.is_string()) throw ValidationError(label(key) + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_array()) throw ValidationError(label(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError(label(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::string label(const std::string& key) const {
    if (where_.empty()) return "'" + key + "'";
    return "'" + where_ + (key.empty() ? "" : "." + key) + "'";
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError("unknown key " + label(it.key()));
    }
  }

 private:
  template <typename T>
  T need(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw ValidationError("missing required key " + label(key));
    return *fallback;
  }

  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename F>
auto with_context(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

bool is_power_of_two(long long n) { return n >= 1 && (n & (n - 1)) == 0; }

}  // namespace

ScenarioConfig config_from_json(const Json& j) {
  Reader top(j, "");
  ScenarioConfig cfg;
  const long long version = top.integer("schema_version");
  if (version != ScenarioConfig::kSchemaVersion) {
    throw ValidationError("unsupported schema_version " + std::to_string(version) + " (expected " +
                          std::to_string(ScenarioConfig::kSchemaVersion) + ")");
  }
  if (top.has("scenario")) cfg.scenario = parse_scenario(top.string("scenario"));

  {
    Reader p(top.raw("physics"), "physics");
    const long long dim = p.integer("dim");
    const double alpha = p.number("alpha");
    const long long mu = p.integer("mu");
    p.finish();
    cfg.physics = with_context("physics", [&] {
      return PhysicsParams::make(static_cast<int>(dim), alpha, static_cast<int>(mu));
    });
  }

  double box = 100.0;
  long long points = 256;
  if (top.has("grid")) {
    Reader g(top.raw("grid"), "grid");
    box = g.number("box_length", 100.0);
    points = g.integer("points", 256);
    g.finish();
  }
  cfg.grid = with_context("grid", [&] { return Grid::make(cfg.physics.dim, box, static_cast<int>(points)); });

  if (top.has("initial_condition")) {
    Reader ic(top.raw("initial_condition"), "initial_condition");
    cfg.initial.family = parse_initial_family(ic.string("family", "gaussian"));
    cfg.initial.amplitude = ic.number("amplitude", 1.0);
    cfg.initial.width = ic.number("width", 1.0);
    cfg.initial.chirp = ic.number("chirp", 0.0);
    cfg.initial.perturbation = ic.number("perturbation", 0.0);
    ic.finish();
  }

  cfg.integrator.dealias = !is_ground_state_family(cfg.initial);
  if (top.has("integrator")) {
    Reader in(top.raw("integrator"), "integrator");
    cfg.integrator.scheme = parse_scheme(in.string("scheme", "strang_split"));
    cfg.integrator.dt = in.number("dt", 1e-3);
    cfg.integrator.t_end = in.number("t_end", 1.0);
    cfg.integrator.dealias = in.boolean("dealias", cfg.integrator.dealias);
    cfg.integrator.nonlinearity_scale = in.number("nonlinearity_scale", 1.0);
    if (in.has("sponge") && !in.raw("sponge").is_null()) {
      Reader sp(in.raw("sponge"), "integrator.sponge");
      SpongeConfig s;
      s.width_fraction = sp.number("width_fraction", 0.1);
      s.strength = sp.number("strength", 1.0);
      sp.finish();
      cfg.integrator.sponge = s;
    }
    in.finish();
  }

  if (top.has("analysis")) {
    Reader a(top.raw("analysis"), "analysis");
    AnalysisConfig& an = cfg.analysis;
    an.cadence = a.integer("cadence", an.cadence);
    an.monitor_every = a.integer("monitor_every", an.monitor_every);
    an.cutoff_radius = a.number("cutoff_radius", an.cutoff_radius);
    an.delta0 = a.number("delta0", an.delta0);
    an.cauchy_fraction = a.number("cauchy_fraction", an.cauchy_fraction);
    an.decay_factor = a.number("decay_factor", an.decay_factor);
    an.exterior_radii = a.numbers("exterior_radii", an.exterior_radii);
    an.exterior_epsilon = a.number("exterior_epsilon", an.exterior_epsilon);
    an.scaling_lambda = a.number("scaling_lambda", an.scaling_lambda);
    an.tail_extension = static_cast<int>(a.integer("tail_extension", an.tail_extension));
    an.blowup_growth = a.number("blowup_growth", an.blowup_growth);
    an.tail_threshold = a.number("tail_threshold", an.tail_threshold);
    an.contamination_threshold = a.number("contamination_threshold", an.contamination_threshold);
    an.keep_snapshots = a.boolean("keep_snapshots", an.keep_snapshots);
    a.finish();
  }

  if (top.has("seed")) {
    const Json& s = top.raw("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0) {
      throw ValidationError("'seed' must be a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.output_dir = top.string("output_dir", cfg.output_dir);
  top.finish();
  validate_config(cfg);
  return cfg;
}

Json config_to_json(const ScenarioConfig& cfg) {
  Json j;
  j["schema_version"] = ScenarioConfig::kSchemaVersion;
  if (cfg.scenario) j["scenario"] = to_string(*cfg.scenario);
  j["physics"] = {{"dim", cfg.physics.dim}, {"alpha", cfg.physics.alpha}, {"mu", cfg.physics.mu}};
  j["grid"] = {{"box_length", cfg.grid.box_length}, {"points", cfg.grid.points}};
  Json in;
  in["scheme"] = to_string(cfg.integrator.scheme);
  in["dt"] = cfg.integrator.dt;
  in["t_end"] = cfg.integrator.t_end;
  in["dealias"] = cfg.integrator.dealias;
  in["nonlinearity_scale"] = cfg.integrator.nonlinearity_scale;
  if (cfg.integrator.sponge) {
    in["sponge"] = {{"width_fraction", cfg.integrator.sponge->width_fraction},
                    {"strength", cfg.integrator.sponge->strength}};
  } else {
    in["sponge"] = nullptr;
  }
  j["integrator"] = in;
  j["initial_condition"] = {{"family", to_string(cfg.initial.family)},
                            {"amplitude", cfg.initial.amplitude},
                            {"width", cfg.initial.width},
                            {"chirp", cfg.initial.chirp},
                            {"perturbation", cfg.initial.perturbation}};
  const AnalysisConfig& a = cfg.analysis;
  j["analysis"] = {{"cadence", a.cadence},
                   {"monitor_every", a.monitor_every},
                   {"cutoff_radius", a.cutoff_radius},
                   {"delta0", a.delta0},
                   {"cauchy_fraction", a.cauchy_fraction},
                   {"decay_factor", a.decay_factor},
                   {"exterior_radii", a.exterior_radii},
                   {"exterior_epsilon", a.exterior_epsilon},
                   {"scaling_lambda", a.scaling_lambda},
                   {"tail_extension", a.tail_extension},
                   {"blowup_growth", a.blowup_growth},
                   {"tail_threshold", a.tail_threshold},
                   {"contamination_threshold", a.contamination_threshold},
                   {"keep_snapshots", a.keep_snapshots}};
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  return j;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void validate_config(const ScenarioConfig& cfg) {
  const PhysicsParams& P = cfg.physics;
  // Re-run the domain checks for configs built in code.
  PhysicsParams::make(P.dim, P.alpha, P.mu);
  if (cfg.grid.dim != P.dim) throw ValidationError("grid dimension does not match physics.dim");
  with_context("integrator", [&] { cfg.integrator.validate(); });

  const InitialCondition& ic = cfg.initial;
  if (!(ic.amplitude >= 0.0)) throw ValidationError("initial_condition.amplitude must be >= 0");
  if (!(ic.width > 0.0)) throw ValidationError("initial_condition.width must be positive");
  if (!(ic.perturbation >= 0.0 && ic.perturbation < 1.0)) {
    throw ValidationError("initial_condition.perturbation must lie in [0, 1)");
  }
  if (ic.family == InitialFamily::ground_state && ic.amplitude != 1.0) {
    throw ValidationError("initial_condition.family ground_state has amplitude 1; use scaled_ground_state");
  }

  const AnalysisConfig& a = cfg.analysis;
  const double half = 0.5 * cfg.grid.box_length;
  if (a.cadence < 1) throw ValidationError("analysis.cadence must be >= 1");
  if (a.monitor_every < 1) throw ValidationError("analysis.monitor_every must be >= 1");
  if (!(a.cutoff_radius > 0.0 && 2.0 * a.cutoff_radius <= half)) {
    throw ValidationError("analysis.cutoff_radius R needs 0 < 2R <= L/2 so the cutoff stays inside the box");
  }
  if (!(a.delta0 >= 0.0 && a.delta0 < 1.0)) throw ValidationError("analysis.delta0 must lie in [0, 1)");
  if (!(a.cauchy_fraction > 0.0)) throw ValidationError("analysis.cauchy_fraction must be positive");
  if (!(a.decay_factor > 1.0)) throw ValidationError("analysis.decay_factor must exceed 1");
  if (!(a.exterior_epsilon > 0.0)) throw ValidationError("analysis.exterior_epsilon must be positive");
  if (!(a.scaling_lambda > 0.0)) throw ValidationError("analysis.scaling_lambda must be positive");
  if (!is_power_of_two(a.tail_extension) || a.tail_extension > 64) {
    throw ValidationError("analysis.tail_extension must be a power of two in [1, 64]");
  }
  if (!(a.blowup_growth > 1.0)) throw ValidationError("analysis.blowup_growth must exceed 1");
  if (!(a.tail_threshold > 0.0 && a.tail_threshold < 1.0)) {
    throw ValidationError("analysis.tail_threshold must lie in (0, 1)");
  }
  if (!(a.contamination_threshold > 0.0)) throw ValidationError("analysis.contamination_threshold must be positive");

  if (!cfg.scenario) return;
  const std::string name = to_string(*cfg.scenario);
  const Scenario sc = *cfg.scenario;
  if (sc == Scenario::stationarity || sc == Scenario::focusing_subthreshold ||
      sc == Scenario::focusing_superthreshold) {
    if (P.mu != -1) throw ValidationError("scenario " + name + " requires mu = -1 (focusing)");
    if (cfg.integrator.sponge) throw ValidationError("scenario " + name + " runs without a sponge");
  }
  switch (sc) {
    case Scenario::stationarity:
      if (ic.family != InitialFamily::ground_state) {
        throw ValidationError("scenario stationarity needs initial_condition.family = ground_state");
      }
      break;
    case Scenario::focusing_subthreshold:
      for (double r : a.exterior_radii) {
        if (!(r > 0.0 && r < half)) throw ValidationError("analysis.exterior_radii entries must lie in (0, L/2)");
      }
      break;
    case Scenario::focusing_superthreshold:
      break;
    case Scenario::defocusing_scatter:
      if (P.mu != 1) throw ValidationError("scenario defocusing_scatter requires mu = +1 (defocusing)");
      if (!cfg.integrator.sponge) throw ValidationError("scenario defocusing_scatter needs integrator.sponge");
      break;
    case Scenario::scaling_covariance:
      if (ic.family != InitialFamily::gaussian) {
        throw ValidationError("scenario scaling_covariance needs gaussian initial data");
      }
      if (cfg.integrator.sponge) throw ValidationError("scenario scaling_covariance runs without a sponge");
      if (a.scaling_lambda == 1.0) throw ValidationError("analysis.scaling_lambda must differ from 1");
      break;
    case Scenario::virial_suite:
      if (cfg.integrator.sponge) throw ValidationError("scenario virial_suite runs without a sponge");
      if (cfg.integrator.steps() < 20 * a.cadence + 1) {
        throw ValidationError("scenario virial_suite needs t_end/dt > 20 * cadence (at least 20 checks)");
      }
      break;
  }
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------
// Initial data

bool is_ground_state_family(const InitialCondition& ic) { return ic.family != InitialFamily::gaussian; }

Field initial_field(const ScenarioConfig& cfg) {
  const InitialCondition& ic = cfg.initial;
  Field u;
  if (ic.family == InitialFamily::gaussian) {
    const double a = 0.5 / (ic.width * ic.width);
    u = Field::sample_radial(cfg.grid, [&](double r) { return cplx{ic.amplitude * std::exp(-a * r * r), 0.0}; });
  } else {
    u = profile(cfg.grid, GroundStateSpec::calibrated(cfg.physics)) * ic.amplitude;
  }
  if (ic.chirp != 0.0) {
    u = u.pointwise(Field::sample_radial(cfg.grid, [&](double r) { return std::polar(1.0, ic.chirp * r * r); }));
  }
  if (ic.perturbation > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> centre(0.0, 4.0);
    std::array<double, 4> a{}, c{};
    for (int k = 0; k < 4; ++k) {
      a[k] = coef(rng);
      c[k] = centre(rng);
    }
    Field eta = Field::sample_radial(cfg.grid, [&](double r) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[k] * std::exp(-0.5 * (r - c[k]) * (r - c[k]));
      return cplx{s, 0.0};
    });
    const double peak = sup_norm(eta);
    if (peak > 0.0) {
      for (std::size_t n = 0; n < u.size(); ++n) u[n] *= 1.0 + ic.perturbation * eta[n].real() / peak;
    }
  }
  return u;
}

std::optional<FarField> closure_for(const ScenarioConfig& cfg) {
  if (!is_ground_state_family(cfg.initial)) return std::nullopt;
  return far_field_closure(cfg.grid, GroundStateSpec::calibrated(cfg.physics), cfg.initial.amplitude,
                           cfg.analysis.tail_extension);
}

// ---------------------------------------------------------------------------
// Scattering proxy and exterior scan

ScatteringProxyReport scattering_proxy(const std::vector<Snapshot>& trajectory, const PhysicsParams& params,
                                       double window_end, const ScatteringThresholds& thresholds) {
  ScatteringProxyReport out;
  out.verdict = "inconclusive";
  std::vector<const Snapshot*> window;
  for (const auto& s : trajectory) {
    if (s.t <= window_end + 1e-12) window.push_back(&s);
  }
  out.samples = static_cast<int>(window.size());
  if (window.empty()) return out;
  out.window_start = window.front()->t;
  out.window_end = window.back()->t;
  const double h0 = sobolev_seminorm(trajectory.front().u, params.alpha);
  const double pot_start = potential(window.front()->u, params);
  const double pot_end = potential(window.back()->u, params);
  out.potential_decay_factor = pot_end > 0.0 ? pot_start / pot_end : INFINITY;

  const std::size_t first = window.size() >= 5 ? window.size() - 5 : 0;
  std::vector<Field> pulled;
  for (std::size_t i = first; i < window.size(); ++i) {
    pulled.push_back(linear_propagator(window[i]->u, -window[i]->t, params.alpha));
  }
  for (std::size_t i = 0; i < pulled.size(); ++i) {
    for (std::size_t k = i + 1; k < pulled.size(); ++k) {
      out.uplus_cauchy = std::max(out.uplus_cauchy, sobolev_seminorm(pulled[i] - pulled[k], params.alpha));
    }
  }
  out.cauchy_fraction = h0 > 0.0 ? out.uplus_cauchy / h0 : 0.0;
  if (window.size() < 5) return out;
  const bool ok = h0 == 0.0 || (out.cauchy_fraction <= thresholds.cauchy_fraction &&
                                out.potential_decay_factor >= thresholds.decay_factor);
  out.verdict = ok ? "scattering-consistent" : "not-scattering-consistent";
  return out;
}

std::vector<ExteriorRow> exterior_decay_scan(const std::vector<Snapshot>& trajectory,
                                             const std::vector<double>& radii, const PhysicsParams& params) {
  std::vector<ExteriorRow> rows;
  if (trajectory.empty()) return rows;
  const double half = 0.5 * trajectory.front().u.grid().box_length;
  for (double r : radii) {
    if (!(r >= 0.0 && r < half)) throw ValidationError("exterior radius lies outside the box");
  }
  const double a = params.alpha;
  const double crit = params.two_star();
  for (const auto& s : trajectory) {
    const Field v = to_physical(s.u);
    const Grid& g = v.grid();
    const Field da = fractional_derivative(v, a);
    std::vector<double> rad(v.size());
    for (std::size_t n = 0; n < v.size(); ++n) {
      const auto idx = g.unflatten(n);
      double r2 = 0.0;
      for (int d = 0; d < g.dim; ++d) r2 += g.coordinate(idx[d]) * g.coordinate(idx[d]);
      rad[n] = std::sqrt(r2);
    }
    for (double radius : radii) {
      ExteriorRow row;
      row.t = s.t;
      row.radius = radius;
      double hd = 0.0, pd = 0.0, hy = 0.0;
      for (std::size_t n = 0; n < v.size(); ++n) {
        if (rad[n] <= radius) continue;
        const double m = std::abs(v[n]);
        hd += std::norm(da[n]);
        pd += std::pow(m, crit);
        hy += m * m / std::pow(rad[n], 2.0 * a);
      }
      row.hdot_density = hd * g.cell_volume();
      row.potential_density = pd * g.cell_volume();
      row.hardy_density = hy * g.cell_volume();
      rows.push_back(row);
    }
  }
  return rows;
}

std::optional<double> uniform_exterior_radius(const std::vector<ExteriorRow>& rows, double eps) {
  std::set<double> radii;
  for (const auto& r : rows) radii.insert(r.radius);
  for (double candidate : radii) {
    bool ok = true;
    for (const auto& r : rows) {
      if (r.radius < candidate) continue;
      if (r.hdot_density > eps || r.potential_density > eps || r.hardy_density > eps) {
        ok = false;
        break;
      }
    }
    if (ok) return candidate;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

Json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

Json constants_json(const GroundStateConstants& c) {
  return {{"kappa", c.kappa},
          {"C1", c.C1},
          {"C_N", c.sobolev_const},
          {"grad_norm_sq", c.grad_norm_sq},
          {"potential_integral", c.potential_integral},
          {"E_focusing", c.energy_focusing},
          {"E_defocusing", c.energy_defocusing},
          {"residual", c.residual},
          {"box_mass", c.box_mass},
          {"mass_divergent", c.mass_divergent}};
}

namespace {

Json proxy_json(const ScatteringProxyReport& r) {
  return {{"potential_decay_factor", number_or_string(r.potential_decay_factor)},
          {"uplus_cauchy", r.uplus_cauchy},
          {"cauchy_fraction", r.cauchy_fraction},
          {"window", {r.window_start, r.window_end}},
          {"samples", r.samples},
          {"verdict", r.verdict}};
}

struct Setup {
  Field u0;
  std::optional<FarField> closure;
  GroundStateConstants constants;
};

Setup prepare(const ScenarioConfig& cfg) {
  Setup s;
  s.u0 = initial_field(cfg);
  s.closure = closure_for(cfg);
  s.constants = ground_state_constants(cfg.grid, cfg.physics, cfg.analysis.tail_extension);
  return s;
}

EvolveOptions evolve_options(const ScenarioConfig& cfg, const Setup& s) {
  EvolveOptions opt;
  opt.cadence = cfg.analysis.cadence;
  opt.monitor_every = cfg.analysis.monitor_every;
  opt.keep_fields = true;
  opt.record_diagnostics = true;
  opt.closure = s.closure ? &*s.closure : nullptr;
  opt.diagnostics.cutoff = CutoffSpec{cfg.analysis.cutoff_radius};
  opt.diagnostics.closure = opt.closure;
  opt.diagnostics.ground_state = cfg.physics.mu < 0 ? &s.constants : nullptr;
  opt.diagnostics.delta0 = cfg.analysis.delta0;
  opt.blowup_growth = cfg.analysis.blowup_growth;
  opt.tail_threshold = cfg.analysis.tail_threshold;
  opt.contamination_threshold = cfg.analysis.contamination_threshold;
  return opt;
}

Json base_report(const ScenarioConfig& cfg, const Setup& s) {
  Json r;
  r["schema_version"] = ScenarioConfig::kSchemaVersion;
  r["kind"] = cfg.scenario ? "scenario" : "simulation";
  r["scenario"] = cfg.scenario ? Json(to_string(*cfg.scenario)) : Json(nullptr);
  r["config_hash"] = config_hash(cfg);
  const PhysicsParams& P = cfg.physics;
  Json prov;
  prov["physics"] = {{"dim", P.dim}, {"alpha", P.alpha}, {"mu", P.mu}, {"p", P.p()}, {"two_star", P.two_star()}};
  prov["grid"] = {{"dim", cfg.grid.dim},
                  {"box_length", cfg.grid.box_length},
                  {"points", cfg.grid.points},
                  {"spacing", cfg.grid.spacing()}};
  prov["integrator"] = config_to_json(cfg)["integrator"];
  prov["initial_condition"] = config_to_json(cfg)["initial_condition"];
  prov["seed"] = cfg.seed;
  prov["far_field_closure"] = s.closure.has_value();
  prov["tail_extension"] = cfg.analysis.tail_extension;
  r["provenance"] = prov;
  r["constants"] = constants_json(s.constants);
  return r;
}

Json run_summary(const EvolveResult& res, const Field& u0, double alpha) {
  double max_bnd = 0.0, max_tail = 0.0, max_rad = 0.0;
  for (const auto& m : res.monitor_log) {
    max_bnd = std::max(max_bnd, m.monitors.boundary_mass_fraction);
    max_tail = std::max(max_tail, m.monitors.spectral_tail_fraction);
    max_rad = std::max(max_rad, m.monitors.radiality_defect);
  }
  Json j;
  j["termination"] = to_string(res.termination);
  j["flag_time"] = res.termination == Termination::completed ? Json(nullptr) : Json(res.flag_time);
  j["flag_reason"] = res.flag_reason;
  j["steps"] = res.final_state.step_count;
  j["final_time"] = res.final_state.t;
  j["samples"] = std::max(res.records.size(), res.trajectory.size());
  j["hdot_alpha_initial"] = sobolev_seminorm(u0, alpha);
  j["hdot_alpha_final"] = sobolev_seminorm(res.final_state.u, alpha);
  j["max_boundary_mass_fraction"] = max_bnd;
  j["max_spectral_tail_fraction"] = max_tail;
  j["max_radiality_defect"] = max_rad;
  return j;
}

Json conservation_summary(const std::vector<DiagnosticsRecord>& recs, const ScenarioConfig& cfg) {
  Json j;
  j["checked"] = !cfg.integrator.sponge.has_value();
  if (recs.empty()) return j;
  const double m0 = recs.front().mass;
  const double e0 = recs.front().energy;
  const double pp = cfg.physics.p() + 2.0;
  double dm = 0.0, de = 0.0, consistency = 0.0;
  for (const auto& r : recs) {
    if (m0 > 0.0) dm = std::max(dm, std::abs(r.mass - m0) / m0);
    if (e0 != 0.0) de = std::max(de, std::abs(r.energy - e0) / std::abs(e0));
    const double recomputed = 0.5 * r.hdot_alpha_sq + cfg.physics.mu * r.potential / pp;
    consistency = std::max(consistency, std::abs(recomputed - r.energy) / std::max(std::abs(r.energy), 1e-300));
  }
  j["max_mass_drift"] = dm;
  j["max_energy_drift"] = de;
  j["record_consistency"] = consistency;
  return j;
}

RunArtifacts finish(Json report, EvolveResult res, const ScenarioConfig& cfg) {
  RunArtifacts out;
  out.report = std::move(report);
  out.records = std::move(res.records);
  if (cfg.analysis.keep_snapshots) out.snapshots = std::move(res.trajectory);
  out.checkpoint = std::move(res.final_state);
  out.flagged = res.termination != Termination::completed;
  return out;
}

IntegratorConfig rescaled(IntegratorConfig c, double factor) {
  c.dt /= factor;
  c.t_end /= factor;
  return c;
}

RunArtifacts stationarity(const ScenarioConfig& cfg, const Setup& s) {
  EvolveResult res = evolve(s.u0, cfg.integrator, cfg.physics, evolve_options(cfg, s));
  Json report = base_report(cfg, s);
  report["run"] = run_summary(res, s.u0, cfg.physics.alpha);
  report["conservation"] = conservation_summary(res.records, cfg);
  const double h = sobolev_seminorm(s.u0, cfg.physics.alpha);
  double worst = 0.0;
  Json series = Json::array();
  for (const auto& snap : res.trajectory) {
    const double d = sobolev_seminorm(snap.u - s.u0, cfg.physics.alpha) / h;
    worst = std::max(worst, d);
    series.push_back({snap.t, d});
  }
  report["result"] = {{"max_deviation", worst},
                      {"tolerance", 1e-3},
                      {"within_tolerance", worst <= 1e-3},
                      {"deviation_series", series}};
  return finish(std::move(report), std::move(res), cfg);
}

void require_in_K(const ScenarioConfig& cfg, const Setup& s) {
  const FarField* cl = s.closure ? &*s.closure : nullptr;
  const double a = s.constants.energy_focusing;
  const double e = energy_functional(s.u0, cfg.physics, -1, cl);
  const double q = quadratic_form(s.u0, cfg.physics, cl);
  char buf[256];
  if (!(e < a)) {
    std::snprintf(buf, sizeof buf,
                  "focusing_subthreshold needs u0 below the ground state: E_-(u0) = %.9g is not < E_-(W) = %.9g", e, a);
    throw ValidationError(buf);
  }
  if (!(q < s.constants.grad_norm_sq)) {
    std::snprintf(buf, sizeof buf,
                  "focusing_subthreshold needs u0 below the ground state: ||D^a u0||^2 = %.9g is not < ||D^a W||^2 = %.9g",
                  q, s.constants.grad_norm_sq);
    throw ValidationError(buf);
  }
}

RunArtifacts subthreshold(const ScenarioConfig& cfg, const Setup& s) {
  require_in_K(cfg, s);
  const FarField* cl = s.closure ? &*s.closure : nullptr;
  EvolveResult res = evolve(s.u0, cfg.integrator, cfg.physics, evolve_options(cfg, s));
  Json report = base_report(cfg, s);
  report["run"] = run_summary(res, s.u0, cfg.physics.alpha);
  report["conservation"] = conservation_summary(res.records, cfg);

  bool grad_all = true, coer_all = true, energy_all = true;
  double min_grad = INFINITY, min_coer = INFINITY;
  double c0 = 0.0, cmin = INFINITY, cmax = -INFINITY;
  for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
    const auto tr = trapping_check(res.trajectory[i].u, cfg.physics, s.constants, cfg.analysis.delta0, cl);
    grad_all = grad_all && tr.grad_below;
    coer_all = coer_all && tr.coercivity;
    energy_all = energy_all && tr.energy_below;
    min_grad = std::min(min_grad, tr.grad_margin);
    min_coer = std::min(min_coer, tr.coercivity_margin);
    if (i == 0) c0 = tr.comparability_ratio;
    cmin = std::min(cmin, tr.comparability_ratio);
    cmax = std::max(cmax, tr.comparability_ratio);
  }
  const bool bracket = c0 > 0.0 && cmax <= 2.0 * c0 && cmin >= 0.5 * c0;
  const auto rows = exterior_decay_scan(res.trajectory, cfg.analysis.exterior_radii, cfg.physics);
  const auto r_eps = uniform_exterior_radius(rows, cfg.analysis.exterior_epsilon);
  Json scan = Json::array();
  for (const auto& r : rows) {
    scan.push_back({{"t", r.t},
                    {"radius", r.radius},
                    {"hdot_density", r.hdot_density},
                    {"potential_density", r.potential_density},
                    {"hardy_density", r.hardy_density}});
  }
  Json exterior_max = Json::array();
  for (double radius : cfg.analysis.exterior_radii) {
    double hd = 0.0, pd = 0.0, hy = 0.0;
    for (const auto& r : rows) {
      if (r.radius != radius) continue;
      hd = std::max(hd, r.hdot_density);
      pd = std::max(pd, r.potential_density);
      hy = std::max(hy, r.hardy_density);
    }
    exterior_max.push_back({{"radius", radius}, {"hdot_density", hd}, {"potential_density", pd}, {"hardy_density", hy}});
  }
  report["result"] = {
      {"grad_below_all", grad_all},
      {"coercivity_all", coer_all},
      {"energy_below_all", energy_all},
      {"trapping_all", grad_all && coer_all},
      {"min_grad_margin", min_grad},
      {"min_coercivity_margin", min_coer},
      {"comparability", {{"initial", c0}, {"min", cmin}, {"max", cmax}, {"within_factor_2", bracket}}},
      {"blowup_indicator", res.termination == Termination::blowup},
      {"exterior_epsilon", cfg.analysis.exterior_epsilon},
      {"exterior_uniform_radius", r_eps ? Json(*r_eps) : Json(nullptr)},
      {"exterior_max_by_radius", exterior_max},
      {"exterior_scan", scan}};
  return finish(std::move(report), std::move(res), cfg);
}

RunArtifacts superthreshold(const ScenarioConfig& cfg, const Setup& s) {
  EvolveResult res = evolve(s.u0, cfg.integrator, cfg.physics, evolve_options(cfg, s));
  Json report = base_report(cfg, s);
  report["run"] = run_summary(res, s.u0, cfg.physics.alpha);
  report["conservation"] = conservation_summary(res.records, cfg);
  bool monotone = true;
  Json growth = Json::array();
  for (std::size_t i = 0; i < res.monitor_log.size(); ++i) {
    const auto& m = res.monitor_log[i];
    growth.push_back({m.t, m.monitors.hdot_alpha});
    if (i > 0 && m.monitors.hdot_alpha < res.monitor_log[i - 1].monitors.hdot_alpha) monotone = false;
  }
  const bool triggered = res.termination == Termination::blowup;
  report["result"] = {{"indicator_triggered", triggered},
                      {"indicator_time", triggered ? Json(res.flag_time) : Json(nullptr)},
                      {"indicator_reason", res.flag_reason},
                      {"hdot_alpha_monotone_before_abort", monotone},
                      {"hdot_alpha_series", growth},
                      {"note", "indicator activation only; no claim of finite-time blow-up"}};
  return finish(std::move(report), std::move(res), cfg);
}

RunArtifacts defocusing_scatter(const ScenarioConfig& cfg, const Setup& s) {
  EvolveResult res = evolve(s.u0, cfg.integrator, cfg.physics, evolve_options(cfg, s));
  const ScatteringThresholds th{cfg.analysis.cauchy_fraction, cfg.analysis.decay_factor};
  const double end = res.termination == Termination::completed ? res.final_state.t : res.flag_time;
  const ScatteringProxyReport proxy = scattering_proxy(res.trajectory, cfg.physics, end, th);

  IntegratorConfig lin = cfg.integrator;
  lin.nonlinearity_scale = 0.0;
  lin.sponge.reset();
  EvolveOptions lopt = evolve_options(cfg, s);
  lopt.record_diagnostics = false;
  const EvolveResult lres = evolve(s.u0, lin, cfg.physics, lopt);
  const double lend = lres.termination == Termination::contamination ? lres.flag_time : lres.final_state.t;
  const ScatteringProxyReport control = scattering_proxy(lres.trajectory, cfg.physics, lend, th);

  Json report = base_report(cfg, s);
  report["run"] = run_summary(res, s.u0, cfg.physics.alpha);
  report["conservation"] = conservation_summary(res.records, cfg);
  report["result"] = {{"proxy", proxy_json(proxy)},
                      {"linear_control", proxy_json(control)},
                      {"thresholds", {{"cauchy_fraction", th.cauchy_fraction}, {"decay_factor", th.decay_factor}}},
                      {"note", "finite-time proxy for scattering; thresholds are heuristics"}};
  return finish(std::move(report), std::move(res), cfg);
}

RunArtifacts scaling_covariance(const ScenarioConfig& cfg, const Setup& s) {
  const double lambda = cfg.analysis.scaling_lambda;
  const double alpha = cfg.physics.alpha;
  const double amp = std::pow(lambda, cfg.physics.scaling_weight());
  const double time_factor = std::pow(lambda, 2.0 * alpha);
  EvolveResult res = evolve(s.u0, cfg.integrator, cfg.physics, evolve_options(cfg, s));

  const Grid scaled = Grid::make(cfg.grid.dim, cfg.grid.box_length / lambda, cfg.grid.points);
  auto move_to = [&](const Field& f) {
    const Field v = to_physical(f);
    return Field(scaled, std::vector<cplx>(v.values().begin(), v.values().end())) * amp;
  };
  EvolveOptions opt = evolve_options(cfg, s);
  opt.record_diagnostics = false;
  opt.keep_fields = false;
  const EvolveResult sres = evolve(move_to(s.u0), rescaled(cfg.integrator, time_factor), cfg.physics, opt);
  const Field mapped = move_to(res.final_state.u);
  const double err = sobolev_seminorm(sres.final_state.u - mapped, alpha) / sobolev_seminorm(mapped, alpha);

  Json report = base_report(cfg, s);
  report["run"] = run_summary(res, s.u0, alpha);
  report["conservation"] = conservation_summary(res.records, cfg);
  report["result"] = {{"lambda", lambda},
                      {"rescaled_box_length", scaled.box_length},
                      {"rescaled_dt", cfg.integrator.dt / time_factor},
                      {"rescaled_t_end", cfg.integrator.t_end / time_factor},
                      {"rescaled_termination", to_string(sres.termination)},
                      {"relative_hdot_error", err},
                      {"tolerance", 1e-4},
                      {"within_tolerance", err <= 1e-4}};
  RunArtifacts out = finish(std::move(report), std::move(res), cfg);
  out.flagged = out.flagged || sres.termination != Termination::completed;
  return out;
}

RunArtifacts virial_suite(const ScenarioConfig& cfg, const Setup& s) {
  const PhysicsParams& P = cfg.physics;
  const FarField* cl = s.closure ? &*s.closure : nullptr;
  const IntegratorConfig& ic = cfg.integrator;
  const CutoffSpec cut{cfg.analysis.cutoff_radius};
  const Stepper stepper(cfg.grid, P, ic, cl);
  const EvolveOptions opt = evolve_options(cfg, s);
  const long steps = ic.steps();
  const long cadence = cfg.analysis.cadence;

  EvolveResult res;
  res.trajectory.push_back({0.0, s.u0});
  res.records.push_back(make_record(0.0, s.u0, P, opt.diagnostics));
  res.monitor_log.push_back({0.0, compute_monitors(s.u0, P.alpha)});

  Field prev = s.u0;
  Field cur = s.u0;
  bool finite = stepper.step(cur);
  double worst_v = 0.0, worst_i = 0.0, worst_y = 0.0;
  bool clean = true;
  int checks = 0;
  Json rows = Json::array();
  long n = 1;
  for (; finite && n < steps; ++n) {
    Field next = cur;
    finite = stepper.step(next);
    if (!finite) break;
    if (n % cadence == 0) {
      const double t = static_cast<double>(n) * ic.dt;
      const double h = 2.0 * ic.dt;
      const FlaggedValue vn = virial(next);
      const FlaggedValue vp = virial(prev);
      const double fd_v = (vn.value - vp.value) / h;
      const double rhs_v = virial_rate_rhs(cur, P, cl);
      const double fd_i = (localized_virial(next, cut) - localized_virial(prev, cut)) / h;
      const auto lv = localized_virial_rhs(cur, cut, P, cl);
      const double fd_y = (localized_mass(next, cut) - localized_mass(prev, cut)) / h;
      const double grad = quadratic_form(cur, P, nullptr);
      const double rv = std::abs(fd_v - rhs_v) / std::abs(rhs_v);
      const double ri = std::abs(fd_i - lv.sum) / std::abs(lv.sum);
      const double ry = grad > 0.0 ? std::abs(fd_y) / grad : 0.0;
      worst_v = std::max(worst_v, rv);
      worst_i = std::max(worst_i, ri);
      worst_y = std::max(worst_y, ry);
      clean = clean && vn.boundary_clean && vp.boundary_clean;
      rows.push_back({{"t", t},
                      {"virial_fd", fd_v},
                      {"virial_rhs", rhs_v},
                      {"virial_residual", rv},
                      {"localized_fd", fd_i},
                      {"localized_rhs", lv.sum},
                      {"localized_residual", ri},
                      {"localized_terms", lv.terms},
                      {"localized_forcing", lv.forcing},
                      {"dilation_defect", lv.dilation_defect},
                      {"localized_mass_rate_ratio", ry}});
      ++checks;
      res.trajectory.push_back({t, cur});
      res.records.push_back(make_record(t, cur, P, opt.diagnostics));
      res.monitor_log.push_back({t, compute_monitors(cur, P.alpha)});
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  res.termination = finite ? Termination::completed : Termination::blowup;
  res.flag_time = finite ? 0.0 : static_cast<double>(n) * ic.dt;
  res.flag_reason = finite ? "" : "non-finite values";
  res.final_state = SimState{static_cast<double>(n) * ic.dt, cur, n, compute_monitors(cur, P.alpha)};

  // Commutator terms with a cutoff that saturates on the data, and I_R over radii.
  const CutoffSpec saturated{0.2 * cfg.grid.box_length};
  const auto sat = localized_virial_rhs(s.u0, saturated, P, cl);
  const double main = std::abs(sat.terms[0]) + std::abs(sat.terms[1]);
  const double comm = std::abs(sat.terms[2]) + std::abs(sat.terms[4]) + std::abs(sat.terms[5]);
  Json by_radius = Json::array();
  for (double r : {4.0, 8.0, 16.0}) {
    if (2.0 * r <= 0.5 * cfg.grid.box_length) by_radius.push_back({r, localized_virial(s.u0, CutoffSpec{r})});
  }

  Json report = base_report(cfg, s);
  report["run"] = run_summary(res, s.u0, P.alpha);
  report["conservation"] = conservation_summary(res.records, cfg);
  report["result"] = {{"checks", checks},
                      {"finite_difference_step", ic.dt},
                      {"max_virial_residual", worst_v},
                      {"max_localized_residual", worst_i},
                      {"max_localized_mass_rate_ratio", worst_y},
                      {"virial_boundary_clean", clean},
                      {"tolerance", 1e-3},
                      {"within_tolerance", worst_v <= 1e-3 && worst_i <= 1e-3},
                      {"saturated_radius", saturated.radius},
                      {"saturated_commutator_ratio", main > 0.0 ? comm / main : 0.0},
                      {"localized_virial_by_radius", by_radius},
                      {"samples", rows}};
  return finish(std::move(report), std::move(res), cfg);
}

}  // namespace

RunArtifacts run_simulation(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const Setup s = prepare(cfg);
  EvolveResult res = evolve(s.u0, cfg.integrator, cfg.physics, evolve_options(cfg, s));
  Json report = base_report(cfg, s);
  report["run"] = run_summary(res, s.u0, cfg.physics.alpha);
  report["conservation"] = conservation_summary(res.records, cfg);
  return finish(std::move(report), std::move(res), cfg);
}

RunArtifacts run_scenario(const ScenarioConfig& cfg) {
  if (!cfg.scenario) throw ValidationError("config has no 'scenario'");
  validate_config(cfg);
  const Setup s = prepare(cfg);
  switch (*cfg.scenario) {
    case Scenario::stationarity: return stationarity(cfg, s);
    case Scenario::focusing_subthreshold: return subthreshold(cfg, s);
    case Scenario::focusing_superthreshold: return superthreshold(cfg, s);
    case Scenario::defocusing_scatter: return defocusing_scatter(cfg, s);
    case Scenario::scaling_covariance: return scaling_covariance(cfg, s);
    case Scenario::virial_suite: return virial_suite(cfg, s);
  }
  throw ValidationError("unhandled scenario");
}

// ---------------------------------------------------------------------------
// Output

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void emit_artifacts(const RunArtifacts& run, const ScenarioConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_text_atomic(dir / "config.json", dump_json(config_to_json(cfg)));

  std::ostringstream csv;
  write_csv(csv, run.records);
  write_text_atomic(dir / "diagnostics.csv", csv.str());

  // Plot files come from the CSV text so both carry identical numbers.
  fs::create_directories(dir / "plots");
  const auto& cols = record_columns();
  std::istringstream rows(csv.str());
  std::string line;
  std::getline(rows, line);
  std::vector<std::string> plots(cols.size());
  std::vector<bool> has_value(cols.size(), false);
  while (std::getline(rows, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    for (std::size_t c = 1; c < cols.size() && c < cells.size(); ++c) {
      if (cells[c] == "NA") continue;
      plots[c] += cells[0] + " " + cells[c] + "\n";
      has_value[c] = true;
    }
  }
  for (std::size_t c = 1; c < cols.size(); ++c) {
    if (has_value[c]) write_text_atomic(dir / "plots" / (cols[c] + ".dat"), "# t " + cols[c] + "\n" + plots[c]);
  }

  Json index = Json::array();
  if (!run.snapshots.empty()) {
    fs::create_directories(dir / "snapshots");
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
      char name[40];
      std::snprintf(name, sizeof name, "snapshot_%06zu.bin", i);
      save_field(dir / "snapshots" / name, run.snapshots[i].u);
      index.push_back({{"file", name}, {"t", run.snapshots[i].t}});
    }
    write_text_atomic(dir / "snapshots" / "index.json", dump_json(index));
  }

  if (run.checkpoint) {
    save_field(dir / "checkpoint.bin", run.checkpoint->u);
    Json side = {{"t", run.checkpoint->t},
                 {"step_count", run.checkpoint->step_count},
                 {"config_hash", config_hash(cfg)},
                 {"field", "checkpoint.bin"}};
    write_text_atomic(dir / "checkpoint.json", dump_json(side));
  }

  Json report = run.report;
  report["outputs"] = {{"diagnostics_csv", "diagnostics.csv"},
                       {"snapshots", run.snapshots.size()},
                       {"checkpoint", run.checkpoint ? Json("checkpoint.json") : Json(nullptr)},
                       {"records", run.records.size()}};
  write_text_atomic(dir / "report.json", dump_json(report));
}

}  // namespace fnls
