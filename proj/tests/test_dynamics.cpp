#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fnls/dynamics.hpp"
#include "fnls/errors.hpp"
#include "fnls/norms.hpp"
#include "fnls/spectral.hpp"

using namespace fnls;

namespace {

const PhysicsParams kFocusing = PhysicsParams::make(2, 0.8, -1);
const PhysicsParams kDefocusing = PhysicsParams::make(2, 0.8, 1);

Field gaussian(const Grid& g, double amp = 1.0, double a = 0.5, double chirp = 0.0) {
  return Field::sample_radial(g, [=](double r) { return amp * std::exp(-a * r * r) * std::polar(1.0, chirp * r * r); });
}

Field random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g);
  for (auto& v : f.values()) v = {n(rng), n(rng)};
  return f;
}

double rel_l2(const Field& a, const Field& b) { return l2_norm(a - b) / l2_norm(b); }

Field run(const Field& u0, const IntegratorConfig& cfg, const PhysicsParams& params,
          const FarField* closure = nullptr) {
  const Stepper stepper(u0.grid(), params, cfg, closure);
  Field u = u0;
  for (long n = 0; n < cfg.steps(); ++n) EXPECT_TRUE(stepper.step(u));
  return u;
}

}  // namespace

TEST(LinearPropagator, UnitaryAndGroupLaw) {
  const Grid g = Grid::make(2, 20.0, 64);
  const Field f = random_field(g, 1);
  EXPECT_LT(rel_l2(linear_propagator(f, 0.0, 0.8), f), 1e-14);
  const Field a = linear_propagator(f, 0.3, 0.8);
  EXPECT_NEAR(l2_norm(a), l2_norm(f), 1e-12 * l2_norm(f));
  EXPECT_LT(rel_l2(linear_propagator(a, 0.45, 0.8), linear_propagator(f, 0.75, 0.8)), 1e-12);
}

TEST(LinearPropagator, PlaneWaveEigenfunction) {
  const Grid g = Grid::make(2, 20.0, 32);
  const double k = 3 * g.frequency_step();
  const Field f = Field::sample(g, [k](std::span<const double> x) { return std::polar(1.0, k * x[0]); });
  const double tau = 0.9;
  const Field expect = f * std::polar(1.0, tau * std::pow(k, 1.6));
  EXPECT_LT(sup_norm(linear_propagator(f, tau, 0.8) - expect), 1e-12);
}

TEST(LinearPropagator, Disperses) {
  const Grid g = Grid::make(2, 60.0, 256);
  const Field f = gaussian(g);
  EXPECT_LT(sup_norm(linear_propagator(f, 1.0, 0.8)), sup_norm(f));
}

TEST(NonlinearStep, Properties) {
  const Grid g = Grid::make(2, 20.0, 32);
  EXPECT_EQ(sup_norm(nonlinear_phase_step(Field(g), 0.4, kFocusing)), 0.0);
  Field unit(g);
  for (auto& v : unit.values()) v = std::polar(1.0, 0.3);
  EXPECT_LT(sup_norm(nonlinear_phase_step(unit, 0.4, kDefocusing) - unit * std::polar(1.0, 0.4)), 1e-14);
  const Field f = random_field(g, 2);
  const Field out = nonlinear_phase_step(f, 0.1, kFocusing);
  for (std::size_t n = 0; n < f.size(); ++n) {
    EXPECT_NEAR(std::abs(out[n]), std::abs(f[n]), 1e-13 * (1.0 + std::abs(f[n])));
  }
  EXPECT_NEAR(l2_norm(out), l2_norm(f), 1e-13 * l2_norm(f));
}

TEST(Stepper, LinearLimitMatchesPropagator) {
  const Grid g = Grid::make(2, 40.0, 64);
  const Field u0 = gaussian(g, 2.0, 0.3, 0.1);
  for (Scheme s : {Scheme::strang_split, Scheme::etdrk4}) {
    for (bool dealias : {false, true}) {
      IntegratorConfig cfg;
      cfg.scheme = s;
      cfg.dt = 0.01;
      cfg.t_end = 0.2;
      cfg.dealias = dealias;
      cfg.nonlinearity_scale = 0.0;
      EXPECT_LT(rel_l2(run(u0, cfg, kFocusing), linear_propagator(u0, 0.2, 0.8)), 1e-12)
          << to_string(s) << " dealias " << dealias;
    }
  }
}

TEST(Stepper, GroundStateStationary) {
  const Grid g = Grid::make(2, 100.0, 256);
  const auto spec = GroundStateSpec::calibrated(kFocusing);
  const Field W = profile(g, spec);
  const FarField closure = far_field_closure(g, spec);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  cfg.dealias = false;
  const Field u = run(W, cfg, kFocusing, &closure);
  EXPECT_LE(sobolev_seminorm(u - W, 0.8) / sobolev_seminorm(W, 0.8), 1e-3);
}

TEST(Stepper, StrangIsSecondOrder) {
  const Grid g = Grid::make(2, 100.0, 256);
  const Field u0 = gaussian(g, 0.5);
  auto at = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 0.4;
    return run(u0, cfg, kFocusing);
  };
  const Field ref = at(0.02 / 8);
  const double ratio = l2_norm(at(0.02) - ref) / l2_norm(at(0.01) - ref);
  EXPECT_GE(ratio, 3.6);
  EXPECT_LE(ratio, 4.4);
}

TEST(Stepper, Etdrk4AgreesWithStrang) {
  const Grid g = Grid::make(2, 60.0, 128);
  const Field u0 = gaussian(g, 0.8);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  const Field a = run(u0, cfg, kFocusing);
  cfg.scheme = Scheme::etdrk4;
  EXPECT_LT(rel_l2(run(u0, cfg, kFocusing), a), 1e-5);
}

TEST(Stepper, TimeReversal) {
  const Grid g = Grid::make(2, 60.0, 128);
  const Field u0 = gaussian(g, 0.8, 0.5, 0.1);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  const Field fwd = run(u0, cfg, kFocusing);
  const Stepper back(g, kFocusing, cfg, nullptr, -cfg.dt);
  Field u = fwd;
  for (long n = 0; n < cfg.steps(); ++n) back.step(u);
  EXPECT_LT(rel_l2(u, u0), 1e-6);
  EXPECT_GT(rel_l2(fwd, u0), 1e-2);
}

TEST(Stepper, ScalingCovariance) {
  const double lambda = 2.0;
  const double beta = kFocusing.scaling_weight();
  const double time_scale = std::pow(lambda, 1.6);
  const Grid g = Grid::make(2, 100.0, 256);
  const Grid gs = Grid::make(2, 100.0 / lambda, 256);
  const Field u0 = gaussian(g, 0.8, 0.5, 0.05);
  const Field v0 = Field(gs, std::vector<cplx>(u0.values().begin(), u0.values().end())) * std::pow(lambda, beta);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  const Field u = run(u0, cfg, kFocusing);
  IntegratorConfig cs = cfg;
  cs.dt /= time_scale;
  cs.t_end /= time_scale;
  const Field v = run(v0, cs, kFocusing);
  const Field mapped = Field(gs, std::vector<cplx>(u.values().begin(), u.values().end())) * std::pow(lambda, beta);
  EXPECT_LE(sobolev_seminorm(v - mapped, 0.8) / sobolev_seminorm(mapped, 0.8), 1e-4);
  EXPECT_NEAR(sobolev_seminorm(v0, 0.8), sobolev_seminorm(u0, 0.8), 1e-12);
}

TEST(Stepper, RejectsMismatchedInput) {
  const Grid g = Grid::make(2, 20.0, 32);
  IntegratorConfig cfg;
  const Stepper s(g, kFocusing, cfg);
  Field other(Grid::make(2, 20.0, 64));
  EXPECT_THROW(s.step(other), ValidationError);
  EXPECT_THROW(Stepper(Grid::make(3, 20.0, 16), kFocusing, cfg), ValidationError);
}

TEST(Config, Validation) {
  IntegratorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.dt = 2.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.dt = 1e-3;
  cfg.sponge = SpongeConfig{0.3, 1.0};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.sponge = SpongeConfig{0.0, 1.0};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.sponge = SpongeConfig{0.1, 0.0};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.sponge = SpongeConfig{0.1, 2.0};
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(parse_scheme("etdrk4"), Scheme::etdrk4);
  EXPECT_EQ(parse_scheme(to_string(Scheme::strang_split)), Scheme::strang_split);
  EXPECT_THROW(parse_scheme("rk4"), ValidationError);
}

TEST(Sponge, ProfileAndAbsorption) {
  const Grid g = Grid::make(2, 40.0, 64);
  const Field s = sponge_profile(g, SpongeConfig{0.2, 1.0});
  const auto centre = g.flatten({32, 32, 0});
  const auto edge = g.flatten({0, 32, 0});
  EXPECT_EQ(s[centre].real(), 0.0);
  EXPECT_NEAR(s[edge].real(), 1.0, 1e-12);
  for (const auto& v : s.values()) {
    EXPECT_GE(v.real(), 0.0);
    EXPECT_LE(v.real(), 1.0);
  }
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 8.0;
  cfg.nonlinearity_scale = 0.0;
  const Field u0 = gaussian(g, 1.0, 2.0);
  const double free = mass(run(u0, cfg, kFocusing));
  cfg.sponge = SpongeConfig{0.2, 5.0};
  EXPECT_NEAR(free, mass(u0), 1e-10);
  EXPECT_LT(mass(run(u0, cfg, kFocusing)), 0.8 * free);
}

TEST(Evolve, ZeroDataStaysZero) {
  const Grid g = Grid::make(2, 20.0, 32);
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.1;
  EvolveOptions opt;
  opt.cadence = 5;
  const auto r = evolve(Field(g), cfg, kFocusing, opt);
  EXPECT_EQ(r.termination, Termination::completed);
  ASSERT_EQ(r.trajectory.size(), 3u);
  for (const auto& s : r.trajectory) EXPECT_EQ(sup_norm(s.u), 0.0);
  EXPECT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.final_state.step_count, 10);
}

TEST(Evolve, PreservesRadiality) {
  const Grid g = Grid::make(2, 60.0, 128);
  const Field u0 = gaussian(g, 0.8, 0.5, 0.1);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  EvolveOptions opt;
  opt.enforce_radial = true;
  opt.record_diagnostics = false;
  const auto r = evolve(u0, cfg, kFocusing, opt);
  const double d0 = radiality_defect(u0);
  for (const auto& m : r.monitor_log) EXPECT_LE(m.monitors.radiality_defect, 10.0 * d0 + 1e-10);
  Field skew = u0;
  skew[g.flatten({70, 64, 0})] += 0.1;
  EXPECT_THROW(evolve(skew, cfg, kFocusing, opt), ValidationError);
}

TEST(Evolve, FlagsContaminationWithoutSponge) {
  const Grid g = Grid::make(2, 20.0, 64);
  const Field u0 = gaussian(g, 1.0, 2.0);
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 5.0;
  cfg.nonlinearity_scale = 0.0;
  EvolveOptions opt;
  opt.record_diagnostics = false;
  const auto r = evolve(u0, cfg, kFocusing, opt);
  EXPECT_EQ(r.termination, Termination::contamination);
  EXPECT_LT(r.flag_time, cfg.t_end);
  cfg.sponge = SpongeConfig{0.2, 5.0};
  EXPECT_EQ(evolve(u0, cfg, kFocusing, opt).termination, Termination::completed);
}

TEST(Evolve, FlagsBlowupIndicator) {
  const Grid g = Grid::make(2, 100.0, 256);
  const auto spec = GroundStateSpec::calibrated(kFocusing);
  const FarField closure = far_field_closure(g, spec, 1.2);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.dealias = false;
  EvolveOptions opt;
  opt.closure = &closure;
  opt.record_diagnostics = false;
  opt.keep_fields = false;
  const auto r = evolve(profile(g, spec) * 1.2, cfg, kFocusing, opt);
  EXPECT_EQ(r.termination, Termination::blowup);
  EXPECT_LT(r.flag_time, 1.0);
}

TEST(StrangStep, AdvancesState) {
  const Grid g = Grid::make(2, 20.0, 32);
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.dealias = false;
  SimState s{0.0, gaussian(g, 0.5), 0, {}};
  const SimState next = strang_step(s, cfg, kFocusing);
  EXPECT_EQ(next.step_count, 1);
  EXPECT_DOUBLE_EQ(next.t, 0.01);
  EXPECT_NEAR(mass(next.u), mass(s.u), 1e-12);
  EXPECT_GT(next.monitors.hdot_alpha, 0.0);
}
