// Acceptance run: one PASS/FAIL line per criterion, reference configuration
// N = 2, alpha = 0.8, L = 100, M = 256, dt = 1e-3 unless stated.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fnls/admissibility.hpp"
#include "fnls/diagnostics.hpp"
#include "fnls/dynamics.hpp"
#include "fnls/errors.hpp"
#include "fnls/experiments.hpp"
#include "fnls/ground_state.hpp"
#include "fnls/norms.hpp"
#include "fnls/spectral.hpp"

using namespace fnls;

namespace {

// Tolerances.
constexpr double kResidualMax = 2e-3;
constexpr double kResidualHalving = 0.5;
constexpr double kIdentityRel = 1e-2;
constexpr double kCommutatorRel = 1e-6;
constexpr double kMassDrift = 1e-8;
constexpr double kEnergyDrift = 1e-5;
constexpr double kVirialRel = 1e-3;
constexpr int kVirialChecks = 20;
constexpr double kSaturatedRatio = 1e-8;
constexpr double kStationarity = 1e-3;
constexpr double kComparabilityFactor = 2.0;
constexpr double kBlowupBefore = 1.0;
constexpr double kDecayFactor = 5.0;
constexpr double kCauchyFraction = 0.05;
constexpr double kLinearCauchy = 1e-10;
constexpr int kSweepPoints = 100;
constexpr double kOrderLow = 3.6;
constexpr double kOrderHigh = 4.4;
constexpr double kPetviashviliCore = 1e-2;

const PhysicsParams kFocusing = PhysicsParams::make(2, 0.8, -1);
const PhysicsParams kDefocusing = PhysicsParams::make(2, 0.8, 1);
const Grid kGrid = Grid::make(2, 100.0, 256);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Field gaussian(const Grid& g, double amp, double a, double chirp = 0.0) {
  return Field::sample_radial(g, [=](double r) { return amp * std::exp(-a * r * r) * std::polar(1.0, chirp * r * r); });
}

ScenarioConfig scenario(Scenario s, int mu, InitialCondition ic, double t_end, long cadence) {
  ScenarioConfig c;
  c.scenario = s;
  c.physics = PhysicsParams::make(2, 0.8, mu);
  c.grid = kGrid;
  c.initial = ic;
  c.integrator.dt = 1e-3;
  c.integrator.t_end = t_end;
  c.integrator.dealias = !is_ground_state_family(ic);
  c.analysis.cadence = cadence;
  return c;
}

InitialCondition scaled_w(double c) {
  InitialCondition ic;
  ic.family = c == 1.0 ? InitialFamily::ground_state : InitialFamily::scaled_ground_state;
  ic.amplitude = c;
  return ic;
}

const GroundStateConstants& constants() {
  static const GroundStateConstants c = ground_state_constants(kGrid, kFocusing);
  return c;
}

Outcome residual() {
  const double r256 = constants().residual;
  const Grid fine = Grid::make(2, 100.0, 512);
  const auto spec = GroundStateSpec::calibrated(kFocusing);
  const Field W = profile(fine, spec);
  const double r512 = elliptic_residual(W, tail_corrected_laplacian(fine, spec), kFocusing);
  return {r256 <= kResidualMax && r512 <= kResidualHalving * r256,
          fmt("residual %.3e at M=256 (max %.0e), %.3e at M=512", r256, kResidualMax, r512) +
              fmt(" (ratio %.3f, max %.2f)", r512 / r256, kResidualHalving)};
}

Outcome identities() {
  const auto& c = constants();
  const double G = c.grad_norm_sq;
  const double ratio = static_cast<double>(kFocusing.dim) / kFocusing.alpha;
  const double e1 = std::abs(G - c.potential_integral) / G;
  const double e2 = std::abs(std::pow(c.sobolev_const, -ratio) - G) / G;
  const double target = kFocusing.alpha / kFocusing.dim * G;
  const double e3 = std::abs(c.energy_focusing - target) / target;
  const double e4 = std::abs(c.energy_focusing - kFocusing.alpha / kFocusing.dim * std::pow(c.sobolev_const, -ratio)) /
                    target;
  const double worst = std::max({e1, e2, e3, e4});
  return {worst <= kIdentityRel,
          fmt("|G-P|/G %.2e, |C_N^(-N/a)-G|/G %.2e, |E-(a/N)G|/E %.2e, |E-(a/N)C_N^(-N/a)|/E %.2e", e1, e2, e3, e4) +
              fmt(" (max %.0e)", kIdentityRel)};
}

Outcome commutator_identity() {
  const double a = kFocusing.alpha;
  double worst = 0.0;
  for (double sigma : {1.0, 1.25, 1.5, 2.0, 2.5}) {
    const Field f = fractional_derivative(gaussian(kGrid, 1.0, 0.5 / (sigma * sigma)), 6.0);
    const Field df = fractional_derivative(f, a);
    const Field lhs = fractional_derivative(dilation_generator(f), a) - dilation_generator(df);
    worst = std::max(worst, l2_norm(lhs - df * a) / l2_norm(df));
  }
  return {worst <= kCommutatorRel, fmt("worst relative error %.2e over 5 fields (max %.0e)", worst, kCommutatorRel)};
}

Outcome conservation() {
  std::string detail;
  bool ok = true;
  for (const PhysicsParams& P : {kFocusing, kDefocusing}) {
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 10.0;
    const Stepper stepper(kGrid, P, cfg);
    Field u = gaussian(kGrid, 0.5, 0.5);
    const double m0 = mass(u), e0 = energy(u, P);
    double dm = 0.0, de = 0.0;
    for (long n = 1; n <= cfg.steps(); ++n) {
      if (!stepper.step(u)) {
        ok = false;
        break;
      }
      if (n % 500 == 0) {
        dm = std::max(dm, std::abs(mass(u) - m0) / m0);
        de = std::max(de, std::abs(energy(u, P) - e0) / std::abs(e0));
      }
    }
    ok = ok && dm <= kMassDrift && de <= kEnergyDrift;
    detail += fmt("mu=%+.0f mass %.2e energy %.2e; ", P.mu, dm, de);
  }
  return {ok, detail + fmt("amplitude 0.5, T=10 (max %.0e / %.0e)", kMassDrift, kEnergyDrift)};
}

Outcome virial_identities() {
  InitialCondition ic;
  ic.amplitude = 0.5;
  ic.chirp = 0.1;
  ScenarioConfig cfg = scenario(Scenario::virial_suite, -1, ic, 1.0, 40);
  cfg.analysis.cutoff_radius = 8.0;
  const Json r = run_scenario(cfg).report["result"];
  const int checks = r["checks"].get<int>();
  const double v = r["max_virial_residual"].get<double>();
  const double i = r["max_localized_residual"].get<double>();
  double sat = 0.0;
  Field h = fractional_derivative(gaussian(kGrid, 1.0, 0.5), 6.0);
  h = h * (0.5 / sup_norm(h));
  for (const Field& u : {h, linear_propagator(h, 0.5, kFocusing.alpha)}) {
    for (double radius : {12.0, 16.0, 20.0}) {
      const auto lv = localized_virial_rhs(u, CutoffSpec{radius}, kFocusing);
      const double main = std::abs(lv.terms[0]) + std::abs(lv.terms[1]);
      const double comm = std::abs(lv.terms[2]) + std::abs(lv.terms[4]) + std::abs(lv.terms[5]);
      sat = std::max(sat, comm / main);
    }
  }
  const bool ok = checks >= kVirialChecks && v <= kVirialRel && i <= kVirialRel && sat <= kSaturatedRatio;
  return {ok, fmt("%.0f checks, V residual %.2e, I_8 residual %.2e, saturated commutator/main %.2e", checks, v, i, sat) +
                  fmt(" (max %.0e, %.0e)", kVirialRel, kSaturatedRatio)};
}

Outcome stationarity() {
  const Json r = run_scenario(scenario(Scenario::stationarity, -1, scaled_w(1.0), 1.0, 100)).report["result"];
  const double d = r["max_deviation"].get<double>();
  return {d <= kStationarity, fmt("max |u-W|/|W| in Hdot^a over t<=1: %.2e (max %.0e)", d, kStationarity)};
}

Json subthreshold_result() {
  static const Json r =
      run_scenario(scenario(Scenario::focusing_subthreshold, -1, scaled_w(0.9), 5.0, 100)).report["result"];
  return r;
}

Outcome trapping() {
  const Json r = subthreshold_result();
  const Json& c = r["comparability"];
  const double c0 = c["initial"].get<double>(), lo = c["min"].get<double>(), hi = c["max"].get<double>();
  const bool bracket = hi <= kComparabilityFactor * c0 && lo >= c0 / kComparabilityFactor;
  const bool ok = r["grad_below_all"].get<bool>() && r["coercivity_all"].get<bool>() && bracket;
  return {ok, fmt("0.9W to T=5: min grad margin %.3f, min coercivity margin %.3f, comparability %.3f in [%.3f, ",
                  r["min_grad_margin"].get<double>(), r["min_coercivity_margin"].get<double>(), c0, lo) +
                  fmt("%.3f] (factor %.0f)", hi, kComparabilityFactor)};
}

Outcome threshold_contrast() {
  const RunArtifacts sup = run_scenario(scenario(Scenario::focusing_superthreshold, -1, scaled_w(1.2), 1.0, 100));
  const Json& r = sup.report["result"];
  const bool fired = r["indicator_triggered"].get<bool>() && r["indicator_time"].get<double>() < kBlowupBefore;
  const bool quiet = !subthreshold_result()["blowup_indicator"].get<bool>();
  return {fired && quiet,
          std::string("1.2W indicator ") + (fired ? fmt("at t=%.3f", r["indicator_time"].get<double>()) : "not fired") +
              ", 0.9W over T=5 " + (quiet ? "quiet" : "fired") + " (indicator-level only)"};
}

Outcome scattering() {
  InitialCondition ic;
  ic.amplitude = 1.0;
  ScenarioConfig cfg = scenario(Scenario::defocusing_scatter, 1, ic, 5.0, 250);
  cfg.integrator.sponge = SpongeConfig{0.1, 1.0};
  cfg.analysis.cauchy_fraction = kCauchyFraction;
  cfg.analysis.decay_factor = kDecayFactor;
  const Json r = run_scenario(cfg).report["result"];
  const double decay = r["proxy"]["potential_decay_factor"].is_number()
                           ? r["proxy"]["potential_decay_factor"].get<double>()
                           : INFINITY;
  const double cauchy = r["proxy"]["cauchy_fraction"].get<double>();
  const double lin = r["linear_control"]["cauchy_fraction"].get<double>();
  const bool ok = decay >= kDecayFactor && cauchy <= kCauchyFraction && lin <= kLinearCauchy;
  return {ok, fmt("T=5: decay factor %.2e (min %.0f), Cauchy fraction %.2e (max %.2f), ", decay, kDecayFactor, cauchy,
                  kCauchyFraction) +
                  fmt("linear control %.2e (max %.0e)", lin, kLinearCauchy)};
}

Outcome admissibility() {
  int passed = 0, total = 0;
  // N = 1 has an empty alpha range.
  for (int dim = 2; dim <= 3; ++dim) {
    const double lo = dim / (2.0 * dim - 1.0);
    for (int k = 1; k <= kSweepPoints / 2; ++k) {
      const double x = lo + (1.0 - lo) * k / (kSweepPoints / 2 + 1.0);
      const Rational alpha(static_cast<long long>(std::llround(x * 1000)), 1000);
      const SwExponents sw = sw_exponents(dim, alpha);
      // Independent formula for (q_W, r_W).
      const Rational n(dim);
      const Rational q = Rational(2) * (n + Rational(2) * alpha) / (n - Rational(2) * alpha);
      const Rational r = Rational(2) * n * (n + Rational(2) * alpha) / (n * n + Rational(4) * alpha * alpha);
      const ExponentPair w = ExponentPair::make(sw.q_W, sw.r_W);
      const bool match = sw.q_W == Exponent::of(q) && sw.r_W == Exponent::of(r);
      const bool adm = Rational(2) * alpha / q + n / r == n / Rational(2);
      if (match && adm && is_alpha_admissible(w, dim, alpha)) ++passed;
      ++total;
    }
  }
  bool endpoint_rejected = true;
  for (int dim = 2; dim <= 3; ++dim) {
    const Rational r = Rational(4 * dim - 2, 2 * dim - 3);
    endpoint_rejected = endpoint_rejected &&
                        !is_radial_admissible_boundary(ExponentPair::make(Exponent::of(Rational(2)), Exponent::of(r)), dim);
  }
  return {passed == total && total == kSweepPoints && endpoint_rejected,
          fmt("(q_W, r_W) exact alpha-admissible at %.0f/%.0f sweep points; endpoint (2, (4N-2)/(2N-3)) ", passed,
              total) +
              (endpoint_rejected ? "rejected for N=2,3" : "ACCEPTED")};
}

Outcome self_convergence() {
  IntegratorConfig base;
  base.t_end = 0.4;
  const Field u0 = gaussian(kGrid, 0.5, 0.5);
  auto run = [&](double dt) {
    IntegratorConfig c = base;
    c.dt = dt;
    const Stepper s(kGrid, kFocusing, c);
    Field u = u0;
    for (long n = 0; n < c.steps(); ++n) s.step(u);
    return u;
  };
  const Field ref = run(0.02 / 8);
  const double e1 = l2_norm(run(0.02) - ref), e2 = l2_norm(run(0.01) - ref);
  const double ratio = e1 / e2;
  const bool order = ratio >= kOrderLow && ratio <= kOrderHigh;

  std::string pet;
  bool core_ok = false;
  try {
    const auto out = petviashvili_solve(kGrid, kFocusing, 1e-3, 3000, 1e-10);
    const double mis = core_profile_mismatch(out.W, GroundStateSpec::calibrated(kFocusing), 10.0);
    core_ok = mis <= kPetviashviliCore;
    pet = fmt("Petviashvili (eps=1e-3) core l2 mismatch %.2e after %.0f iterations (max %.0e)", mis, out.iterations,
              kPetviashviliCore);
  } catch (const std::exception& e) {
    pet = std::string("Petviashvili (eps=1e-3) failed: ") + e.what();
  }
  return {order && core_ok,
          fmt("Strang dt-halving ratio %.3f (range [%.1f, %.1f]); ", ratio, kOrderLow, kOrderHigh) + pet};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"ground-state residual", residual},
      {"ground-state identities", identities},
      {"dilation commutator", commutator_identity},
      {"conservation", conservation},
      {"virial identities", virial_identities},
      {"stationarity", stationarity},
      {"trapping", trapping},
      {"threshold contrast", threshold_contrast},
      {"scattering proxy", scattering},
      {"admissibility", admissibility},
      {"self-convergence", self_convergence},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
