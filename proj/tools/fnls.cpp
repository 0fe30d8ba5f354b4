// fnls command-line driver.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fnls/admissibility.hpp"
#include "fnls/errors.hpp"
#include "fnls/experiments.hpp"
#include "fnls/field_io.hpp"
#include "fnls/spectral.hpp"

namespace fs = std::filesystem;
using namespace fnls;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitFlagged = 3;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--seed", c.seed, "Seed for randomized initial perturbations");
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1, 256));
}

Json base_config_json(const Common& c) {
  if (c.config.empty()) return config_to_json(ScenarioConfig{});
  return config_to_json(load_config(c.config));
}

// ---------------------------------------------------------------------------

struct SimulateFlags {
  std::optional<int> dim;
  std::optional<double> alpha;
  std::optional<int> mu;
  std::optional<double> box_length;
  std::optional<int> points;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::string> scheme;
  std::optional<bool> dealias;
  std::optional<double> sponge_width;
  std::optional<double> sponge_strength;
  bool no_sponge = false;
  std::optional<std::string> initial;
  std::optional<double> amplitude;
  std::optional<double> width;
  std::optional<double> chirp;
  std::optional<double> perturbation;
  std::optional<long> cadence;
};

template <typename T>
void patch(Json& j, const std::string& section, const std::string& key, const std::optional<T>& v) {
  if (v) j[section][key] = *v;
}

int run_and_emit(const ScenarioConfig& cfg, const Common& c, bool scenario) {
  const fs::path out = c.out.empty() ? fs::path(cfg.output_dir) : fs::path(c.out);
  RunArtifacts run = scenario ? run_scenario(cfg) : run_simulation(cfg);
  emit_artifacts(run, cfg, out);
  const Json& r = run.report;
  std::cout << "wrote " << (out / "report.json").string() << " (termination "
            << r["run"]["termination"].get<std::string>() << ")\n";
  return run.flagged ? kExitFlagged : kExitOk;
}

int cmd_simulate(const Common& c, const SimulateFlags& f) {
  Json j = base_config_json(c);
  if (j.contains("scenario")) {
    throw ValidationError("config names a scenario; use the 'experiment' subcommand");
  }
  patch(j, "physics", "dim", f.dim);
  patch(j, "physics", "alpha", f.alpha);
  patch(j, "physics", "mu", f.mu);
  patch(j, "grid", "box_length", f.box_length);
  patch(j, "grid", "points", f.points);
  patch(j, "integrator", "dt", f.dt);
  patch(j, "integrator", "t_end", f.t_end);
  patch(j, "integrator", "scheme", f.scheme);
  patch(j, "initial_condition", "family", f.initial);
  patch(j, "initial_condition", "amplitude", f.amplitude);
  patch(j, "initial_condition", "width", f.width);
  patch(j, "initial_condition", "chirp", f.chirp);
  patch(j, "initial_condition", "perturbation", f.perturbation);
  patch(j, "analysis", "cadence", f.cadence);
  if (f.initial && !f.dealias && c.config.empty()) {
    // Let the family pick its default.
    j["integrator"].erase("dealias");
  }
  patch(j, "integrator", "dealias", f.dealias);
  if (f.no_sponge) {
    j["integrator"]["sponge"] = nullptr;
  } else if (f.sponge_width || f.sponge_strength) {
    if (j["integrator"]["sponge"].is_null()) j["integrator"]["sponge"] = Json::object();
    patch(j["integrator"], "sponge", "width_fraction", f.sponge_width);
    patch(j["integrator"], "sponge", "strength", f.sponge_strength);
  }
  if (c.seed) j["seed"] = *c.seed;
  const ScenarioConfig cfg = config_from_json(j);
  return run_and_emit(cfg, c, false);
}

int cmd_experiment(const Common& c) {
  if (c.config.empty()) throw ValidationError("experiment needs --config");
  Json j = config_to_json(load_config(c.config));
  if (!j.contains("scenario")) throw ValidationError("config has no 'scenario'");
  if (c.seed) j["seed"] = *c.seed;
  const ScenarioConfig cfg = config_from_json(j);
  return run_and_emit(cfg, c, true);
}

// ---------------------------------------------------------------------------

struct GroundstateFlags {
  std::optional<int> dim;
  std::optional<double> alpha;
  std::optional<double> box_length;
  std::optional<int> points;
  std::optional<int> extension;
};

int cmd_groundstate(const Common& c, const GroundstateFlags& f) {
  Json j = base_config_json(c);
  j.erase("scenario");
  patch(j, "physics", "dim", f.dim);
  patch(j, "physics", "alpha", f.alpha);
  j["physics"]["mu"] = -1;
  patch(j, "grid", "box_length", f.box_length);
  patch(j, "grid", "points", f.points);
  patch(j, "analysis", "tail_extension", f.extension);
  const ScenarioConfig cfg = config_from_json(j);
  const GroundStateConstants gsc = ground_state_constants(cfg.grid, cfg.physics, cfg.analysis.tail_extension);
  Json report = constants_json(gsc);
  report["grid"] = {{"dim", cfg.grid.dim},
                    {"box_length", cfg.grid.box_length},
                    {"points", cfg.grid.points},
                    {"spacing", cfg.grid.spacing()},
                    {"tail_extension", cfg.analysis.tail_extension}};
  report["physics"] = {{"alpha", cfg.physics.alpha}, {"p", cfg.physics.p()}, {"two_star", cfg.physics.two_star()}};
  if (gsc.mass_divergent) report["warning"] = "W is not in L^2 for N <= 4 alpha; box_mass is a truncation artifact";
  const std::string text = dump_json(report);
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    write_text_atomic(fs::path(c.out) / "groundstate.json", text);
  }
  std::cout << text;
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_diagnose(const Common& c, const std::string& dir_arg) {
  const fs::path dir(dir_arg);
  const fs::path cfg_path = c.config.empty() ? dir / "config.json" : fs::path(c.config);
  const ScenarioConfig cfg = load_config(cfg_path);
  std::ifstream idx_in(dir / "snapshots" / "index.json");
  if (!idx_in) throw ValidationError("no snapshots/index.json under " + dir.string());
  Json index;
  try {
    index = Json::parse(idx_in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("snapshots/index.json is not valid JSON: ") + e.what());
  }
  const std::size_t n = index.size();
  std::vector<Snapshot> snaps(n);
  for (std::size_t i = 0; i < n; ++i) {
    snaps[i].t = index[i].at("t").get<double>();
    snaps[i].u = load_field(dir / "snapshots" / index[i].at("file").get<std::string>());
    if (!(snaps[i].u.grid() == cfg.grid)) throw ValidationError("snapshot grid does not match config.json");
  }

  const auto closure = closure_for(cfg);
  GroundStateConstants gsc;
  const bool focusing = cfg.physics.mu < 0;
  if (focusing) gsc = ground_state_constants(cfg.grid, cfg.physics, cfg.analysis.tail_extension);
  DiagnosticsContext ctx;
  ctx.cutoff = CutoffSpec{cfg.analysis.cutoff_radius};
  ctx.closure = closure ? &*closure : nullptr;
  ctx.ground_state = focusing ? &gsc : nullptr;
  ctx.delta0 = cfg.analysis.delta0;

  // FFTs stay single-threaded; snapshots are spread over the workers.
  set_fft_threads(1);
  std::vector<DiagnosticsRecord> records(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(static_cast<std::size_t>(c.threads));
  auto worker = [&](int id) {
    try {
      for (std::size_t i = next++; i < n; i = next++) records[i] = make_record(snaps[i].t, snaps[i].u, cfg.physics, ctx);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(id)] = e.what();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < c.threads; ++w) pool.emplace_back(worker, w);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericalError(e);
  }

  double dm = 0.0, de = 0.0, virial_res = 0.0, lvirial_res = 0.0;
  bool grad_all = true, coer_all = true;
  double cmin = INFINITY, cmax = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    if (records[0].mass > 0.0) dm = std::max(dm, std::abs(r.mass - records[0].mass) / records[0].mass);
    if (records[0].energy != 0.0) de = std::max(de, std::abs(r.energy - records[0].energy) / std::abs(records[0].energy));
    if (r.grad_below) grad_all = grad_all && *r.grad_below;
    if (r.coercivity) coer_all = coer_all && *r.coercivity;
    if (r.comparability_ratio) {
      cmin = std::min(cmin, *r.comparability_ratio);
      cmax = std::max(cmax, *r.comparability_ratio);
    }
    if (i + 1 < n) {
      // Trapezoid check of the integrated rates between consecutive samples.
      const auto& s = records[i + 1];
      const double h = s.t - r.t;
      const double v = (s.virial - r.virial) / h;
      const double vr = 0.5 * (s.virial_rate_rhs + r.virial_rate_rhs);
      const double iv = (s.localized_virial - r.localized_virial) / h;
      const double ir = 0.5 * (s.localized_virial_rhs + r.localized_virial_rhs);
      if (vr != 0.0) virial_res = std::max(virial_res, std::abs(v - vr) / std::abs(vr));
      if (ir != 0.0) lvirial_res = std::max(lvirial_res, std::abs(iv - ir) / std::abs(ir));
    }
  }

  const fs::path out = c.out.empty() ? dir / "diagnose" : fs::path(c.out);
  fs::create_directories(out);
  std::ostringstream csv;
  write_csv(csv, records);
  write_text_atomic(out / "diagnostics.csv", csv.str());
  Json summary;
  summary["source"] = dir.string();
  summary["config_hash"] = config_hash(cfg);
  summary["samples"] = n;
  summary["max_mass_drift"] = dm;
  summary["max_energy_drift"] = de;
  summary["conservation_checked"] = !cfg.integrator.sponge.has_value();
  summary["identity_residuals"] = {{"virial_trapezoid", virial_res},
                                   {"localized_virial_trapezoid", lvirial_res},
                                   {"note", "coarse check over the snapshot spacing"}};
  if (focusing) {
    summary["trapping"] = {{"grad_below_all", grad_all},
                           {"coercivity_all", coer_all},
                           {"comparability_min", n ? Json(cmin) : Json(nullptr)},
                           {"comparability_max", n ? Json(cmax) : Json(nullptr)}};
  } else {
    summary["trapping"] = nullptr;
  }
  write_text_atomic(out / "summary.json", dump_json(summary));
  std::cout << dump_json(summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AdmissibleFlags {
  int dim = 2;
  std::string alpha = "4/5";
  std::optional<std::string> q;
  std::optional<std::string> r;
  int bound = 20;
  bool boundary = false;
  std::string format = "json";
};

int cmd_admissible(const Common& c, const AdmissibleFlags& f) {
  const Rational alpha = parse_rational(f.alpha);
  if (f.dim < 1 || f.dim > 3) throw ValidationError("--dim must be 1, 2 or 3");
  PhysicsParams::make(f.dim, boost::rational_cast<double>(alpha), -1);
  const auto verdicts = [&](const ExponentPair& p) {
    return Json{{"q", p.q.str()},
                {"r", p.r.str()},
                {"radial_admissible", is_radial_admissible(p, f.dim)},
                {"radial_admissible_boundary", is_radial_admissible_boundary(p, f.dim)},
                {"alpha_admissible", is_alpha_admissible(p, f.dim, alpha)}};
  };
  Json report;
  report["dim"] = f.dim;
  report["alpha"] = f.alpha;
  if (f.q || f.r) {
    if (!f.q || !f.r) throw ValidationError("--q and --r go together");
    report["pair"] = verdicts(ExponentPair::make(Exponent::parse(*f.q), Exponent::parse(*f.r)));
  }
  const SwExponents sw = sw_exponents(f.dim, alpha);
  report["S"] = verdicts(ExponentPair::make(sw.q_S, sw.r_S));
  report["W"] = verdicts(ExponentPair::make(sw.q_W, sw.r_W));
  Json table = Json::array();
  const auto pairs = enumerate_admissible(f.dim, alpha, f.bound, f.boundary);
  for (const auto& p : pairs) {
    table.push_back({{"q", p.q.str()}, {"r", p.r.str()}, {"q_conjugate", p.q.conjugate().str()}});
  }
  report["enumeration"] = {{"denominator_bound", f.bound}, {"boundary_variant", f.boundary}, {"pairs", table}};

  std::ostringstream text;
  if (f.format == "json") {
    text << dump_json(report);
  } else {
    text << "N = " << f.dim << ", alpha = " << f.alpha << "\n";
    auto line = [&](const std::string& name, const Json& v) {
      text << std::left << std::setw(6) << name << std::setw(26) << ("(" + v["q"].get<std::string>() + ", " + v["r"].get<std::string>() + ")")
           << " radial=" << v["radial_admissible"] << " boundary=" << v["radial_admissible_boundary"]
           << " alpha=" << v["alpha_admissible"] << "\n";
    };
    if (report.contains("pair")) line("pair", report["pair"]);
    line("S", report["S"]);
    line("W", report["W"]);
    text << "\n" << std::left << std::setw(12) << "q" << std::setw(16) << "r" << "q'\n";
    for (const auto& p : pairs) {
      text << std::left << std::setw(12) << p.q.str() << std::setw(16) << p.r.str() << p.q.conjugate().str() << "\n";
    }
  }
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    write_text_atomic(fs::path(c.out) / (f.format == "json" ? "admissible.json" : "admissible.txt"), text.str());
  }
  std::cout << text.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral solver and diagnostics for the radial energy-critical fractional NLS"};
  app.require_subcommand(1);
  Common common;

  auto* sim = app.add_subcommand("simulate", "Evolve initial data and record diagnostics");
  add_common(sim, common);
  SimulateFlags sf;
  sim->add_option("--dim", sf.dim, "Spatial dimension N");
  sim->add_option("--alpha", sf.alpha, "Fractional order alpha");
  sim->add_option("--mu", sf.mu, "+1 defocusing, -1 focusing");
  sim->add_option("--box-length", sf.box_length, "Box side L");
  sim->add_option("--points", sf.points, "Points per axis M (power of two)");
  sim->add_option("--dt", sf.dt, "Time step");
  sim->add_option("--t-end", sf.t_end, "Final time");
  sim->add_option("--scheme", sf.scheme, "strang_split or etdrk4");
  sim->add_flag("--dealias,!--no-dealias", sf.dealias, "2/3-rule dealiasing");
  sim->add_option("--sponge-width", sf.sponge_width, "Sponge width fraction");
  sim->add_option("--sponge-strength", sf.sponge_strength, "Sponge strength");
  sim->add_flag("--no-sponge", sf.no_sponge, "Disable the sponge");
  sim->add_option("--initial", sf.initial, "gaussian, ground_state or scaled_ground_state");
  sim->add_option("--amplitude", sf.amplitude, "Gaussian peak or c in c W");
  sim->add_option("--width", sf.width, "Gaussian width");
  sim->add_option("--chirp", sf.chirp, "Phase e^{i chirp |x|^2}");
  sim->add_option("--perturbation", sf.perturbation, "Relative seeded radial perturbation");
  sim->add_option("--cadence", sf.cadence, "Steps between snapshots");

  auto* gs = app.add_subcommand("groundstate", "Ground-state constants report");
  add_common(gs, common);
  GroundstateFlags gf;
  gs->add_option("--dim", gf.dim, "Spatial dimension N");
  gs->add_option("--alpha", gf.alpha, "Fractional order alpha");
  gs->add_option("--box-length", gf.box_length, "Box side L");
  gs->add_option("--points", gf.points, "Points per axis M");
  gs->add_option("--extension", gf.extension, "Tail-correction box factor");

  auto* diag = app.add_subcommand("diagnose", "Recompute diagnostics from a stored run directory");
  add_common(diag, common);
  std::string run_dir;
  diag->add_option("run_dir", run_dir, "Directory written by simulate or experiment")->required();

  auto* adm = app.add_subcommand("admissible", "Exponent-pair predicates and enumeration");
  add_common(adm, common);
  AdmissibleFlags af;
  adm->add_option("--dim", af.dim, "Spatial dimension N");
  adm->add_option("--alpha", af.alpha, "alpha as a fraction or decimal");
  adm->add_option("--q", af.q, "Pair to test: q");
  adm->add_option("--r", af.r, "Pair to test: r");
  adm->add_option("--bound", af.bound, "Denominator bound for the enumeration")->check(CLI::Range(1, 1000));
  adm->add_flag("--boundary", af.boundary, "Enumerate with the boundary predicate");
  adm->add_option("--format", af.format, "json or text")->check(CLI::IsMember({"json", "text"}));

  auto* exp = app.add_subcommand("experiment", "Run a scenario pipeline");
  add_common(exp, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    set_fft_threads(common.threads);
    if (sim->parsed()) return cmd_simulate(common, sf);
    if (gs->parsed()) return cmd_groundstate(common, gf);
    if (diag->parsed()) return cmd_diagnose(common, run_dir);
    if (adm->parsed()) return cmd_admissible(common, af);
    if (exp->parsed()) return cmd_experiment(common);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
