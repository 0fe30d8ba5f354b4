#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fnls/diagnostics.hpp"
#include "fnls/dynamics.hpp"
#include "fnls/errors.hpp"
#include "fnls/norms.hpp"

using namespace fnls;
using std::numbers::pi;

namespace {

const PhysicsParams kFocusing = PhysicsParams::make(2, 0.8, -1);
const PhysicsParams kDefocusing = PhysicsParams::make(2, 0.8, 1);

Field gaussian(const Grid& g, double amp = 1.0, double a = 0.5, double chirp = 0.0) {
  return Field::sample_radial(g, [=](double r) { return amp * std::exp(-a * r * r) * std::polar(1.0, chirp * r * r); });
}

// Laplacian cube of a Gaussian: all low-frequency moments vanish, so D^a f is
// rapidly decaying.
Field moment_free(const Grid& g, double amp) {
  Field h = fractional_derivative(gaussian(g), 6.0);
  return h * (amp / sup_norm(h));
}

Field random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g);
  for (auto& v : f.values()) v = {n(rng), n(rng)};
  return f;
}

struct Reference {
  Grid grid = Grid::make(2, 100.0, 256);
  GroundStateSpec spec = GroundStateSpec::calibrated(kFocusing);
  GroundStateConstants constants = ground_state_constants(grid, kFocusing);
  Field W = profile(grid, spec);
};

const Reference& reference() {
  static const Reference r;
  return r;
}

}  // namespace

TEST(Mass, Examples) {
  const Grid g = Grid::make(2, 20.0, 128);
  EXPECT_EQ(mass(Field(g)), 0.0);
  EXPECT_NEAR(mass(gaussian(g, 1.0, 1.0)), pi / 2.0, 1e-10);
}

TEST(Mass, InvariantUnderPropagator) {
  const Grid g = Grid::make(2, 30.0, 64);
  const Field f = random_field(g, 5);
  EXPECT_NEAR(mass(linear_propagator(f, 0.7, 0.8)), mass(f), 1e-12 * mass(f));
}

TEST(Energy, DefinitionAlgebra) {
  const Grid g = Grid::make(2, 40.0, 128);
  EXPECT_EQ(energy(Field(g), kFocusing), 0.0);
  const Field u = gaussian(g, 0.7, 0.3, 0.1);
  const double pot = potential(u, kFocusing);
  const double diff = energy(u, kDefocusing) - energy(u, kFocusing);
  EXPECT_NEAR(diff, 2.0 / (kFocusing.p() + 2.0) * pot, 1e-13 * pot);
  const double s = sobolev_seminorm(u, 0.8);
  EXPECT_NEAR(energy(u, kDefocusing), 0.5 * s * s + pot / 10.0, 1e-13);
}

TEST(Energy, GroundStateValue) {
  const auto& ref = reference();
  FarField closure = far_field_closure(ref.grid, ref.spec);
  const double e = energy(ref.W, kFocusing, &closure);
  const double expect = 0.8 / 2.0 * ref.constants.grad_norm_sq;
  EXPECT_LT(std::abs(e - expect) / expect, 0.01);
}

TEST(Virial, RealFieldsVanish) {
  const auto& ref = reference();
  EXPECT_NEAR(virial(ref.W).value, 0.0, 1e-12);
  const Grid g = Grid::make(2, 40.0, 128);
  EXPECT_NEAR(virial(gaussian(g, 2.0)).value, 0.0, 1e-12);
}

TEST(Virial, ChirpedGaussianClosedForm) {
  // u = e^{-r^2/2 + i b r^2}: x.grad u = (2ib - 1) r^2 u, so V = -2b int r^2 e^{-r^2} = -2 pi b.
  const Grid g = Grid::make(2, 40.0, 256);
  for (double b : {0.25, -0.1}) {
    const FlaggedValue v = virial(gaussian(g, 1.0, 0.5, b));
    EXPECT_NEAR(v.value, -2.0 * pi * b, 1e-9);
    EXPECT_TRUE(v.boundary_clean);
  }
  EXPECT_FALSE(virial(reference().W).boundary_clean);
}

TEST(VirialRate, GroundStateCancels) {
  const auto& ref = reference();
  FarField closure = far_field_closure(ref.grid, ref.spec);
  const auto lv = localized_virial_rhs(ref.W, CutoffSpec{16.0}, kFocusing, &closure);
  EXPECT_LT(std::abs(lv.sum), 0.01 * lv.terms[0]);
  // Np/(p+2) = 2a, so the rate is 2a (||D^a W||^2 - int W^{2*}).
  const double rel = 1.0 - ref.constants.potential_integral / ref.constants.grad_norm_sq;
  EXPECT_LT(std::abs(rel), 0.01);
}

TEST(VirialRate, DefocusingPositive) {
  const Grid g = Grid::make(2, 30.0, 64);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    EXPECT_GT(virial_rate_rhs(random_field(g, seed) * 0.1, kDefocusing), 0.0);
  }
}

TEST(LocalizedVirial, RealFieldVanishes) {
  const Grid g = Grid::make(2, 60.0, 128);
  EXPECT_NEAR(localized_virial(gaussian(g), CutoffSpec{4.0}), 0.0, 1e-13);
}

TEST(LocalizedVirial, SaturatesToVirial) {
  const Grid g = Grid::make(2, 100.0, 256);
  const Field u = gaussian(g, 0.5, 0.5, 0.25);
  EXPECT_NEAR(localized_virial(u, CutoffSpec{20.0}), virial(u).value, 1e-10);
  const double i4 = localized_virial(u, CutoffSpec{4.0});
  const double i8 = localized_virial(u, CutoffSpec{8.0});
  const double i16 = localized_virial(u, CutoffSpec{16.0});
  EXPECT_LT(std::abs(i16 - i8), std::abs(i8 - i4));
}

TEST(LocalizedVirial, SaturatedCutoffKillsCommutators) {
  const Grid g = Grid::make(2, 100.0, 256);
  for (const Field& u : {moment_free(g, 0.5), linear_propagator(moment_free(g, 0.5), 0.5, 1.0)}) {
    for (double r : {12.0, 16.0, 20.0}) {
      const auto lv = localized_virial_rhs(u, CutoffSpec{r}, kFocusing);
      const double main = std::abs(lv.terms[0]) + std::abs(lv.terms[1]);
      const double comm = std::abs(lv.terms[2]) + std::abs(lv.terms[4]) + std::abs(lv.terms[5]);
      EXPECT_LE(comm, 1e-8 * main) << "R = " << r;
      EXPECT_LE(std::abs(lv.dilation_defect), 1e-10 * main);
      const double rhs = virial_rate_rhs(u, kFocusing);
      EXPECT_NEAR(lv.sum, rhs, 1e-8 * std::abs(rhs));
    }
  }
}

TEST(LocalizedVirial, FiniteDifferenceAlongTrajectory) {
  const Grid g = Grid::make(2, 100.0, 256);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  const Stepper stepper(g, kFocusing, cfg);
  const CutoffSpec c{8.0};
  Field prev = gaussian(g, 0.5, 0.5, 0.25);
  Field cur = prev;
  stepper.step(cur);
  int checks = 0;
  for (int n = 1; n <= 200; ++n) {
    Field next = cur;
    stepper.step(next);
    if (n % 10 == 0) {
      const double fd_v = (virial(next).value - virial(prev).value) / (2.0 * cfg.dt);
      const double rhs_v = virial_rate_rhs(cur, kFocusing);
      EXPECT_LT(std::abs(fd_v - rhs_v), 1e-3 * std::abs(rhs_v)) << "t = " << n * cfg.dt;
      const double fd_i = (localized_virial(next, c) - localized_virial(prev, c)) / (2.0 * cfg.dt);
      const double rhs_i = localized_virial_rhs(cur, c, kFocusing).sum;
      EXPECT_LT(std::abs(fd_i - rhs_i), 1e-3 * std::abs(rhs_i)) << "t = " << n * cfg.dt;
      ++checks;
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  EXPECT_EQ(checks, 20);
}

TEST(LocalizedMass, Properties) {
  const Grid g = Grid::make(2, 60.0, 128);
  EXPECT_EQ(localized_mass(Field(g), CutoffSpec{3.0}), 0.0);
  const Field u = gaussian(g, 1.0, 0.2);
  double prev = 0.0;
  for (double r : {1.0, 2.0, 4.0, 8.0}) {
    const double y = localized_mass(u, CutoffSpec{r});
    EXPECT_GT(y, prev);
    prev = y;
  }
  EXPECT_NEAR(localized_mass(u, CutoffSpec{14.0}), mass(u), 1e-12 * mass(u));
}

TEST(Trapping, Examples) {
  const auto& ref = reference();
  FarField c09 = far_field_closure(ref.grid, ref.spec, 0.9);
  const auto sub = trapping_check(ref.W * 0.9, kFocusing, ref.constants, 0.0, &c09);
  EXPECT_TRUE(sub.grad_below);
  EXPECT_NEAR(sub.grad_margin, 0.19, 1e-6);
  EXPECT_TRUE(sub.coercivity);
  EXPECT_TRUE(sub.energy_below);
  FarField c1 = far_field_closure(ref.grid, ref.spec, 1.0);
  const auto at = trapping_check(ref.W, kFocusing, ref.constants, 0.0, &c1);
  EXPECT_FALSE(at.grad_below);
  EXPECT_FALSE(at.coercivity);
  EXPECT_LT(std::abs(at.coercivity_margin), 0.01);
}

TEST(CommutatorReport, NonnegativeSpectrum) {
  const Grid g = Grid::make(2, 100.0, 256);
  const Field f = gaussian(g);
  const auto rows = commutator_norm_report(f, {4.0, 8.0, 16.0, 32.0}, kFocusing, 0.4);
  ASSERT_EQ(rows.size(), 4u);
  double prev = INFINITY;
  double worst = 0.0;
  for (const auto& row : rows) {
    const double inner = std::pow(row.radius, 0.6);
    EXPECT_NEAR(row.g_exterior, lp_norm_in_shell(f, 10.0, inner, INFINITY), 1e-10);
    EXPECT_LT(row.cutoff_comm_lhs, prev);
    prev = row.cutoff_comm_lhs;
    worst = std::max(worst, row.dilation_comm_ratio());
  }
  EXPECT_LT(worst, 10.0);
  EXPECT_THROW(commutator_norm_report(f, {4.0}, kFocusing, 0.9), ValidationError);
}

TEST(Records, ConsistencyAndCsvRoundTrip) {
  const Grid g = Grid::make(2, 60.0, 128);
  const Field u = gaussian(g, 0.6, 0.5, 0.2);
  const auto& ref = reference();
  DiagnosticsContext ctx{CutoffSpec{8.0}};
  std::vector<DiagnosticsRecord> recs{make_record(0.0, u, kFocusing, ctx),
                                      make_record(0.5, u * 0.5, kDefocusing, ctx)};
  ctx.ground_state = &ref.constants;
  recs.push_back(make_record(1.0, u, kFocusing, ctx));
  for (const auto& r : recs) {
    const int mu = &r == &recs[1] ? 1 : -1;
    EXPECT_NEAR(r.energy, 0.5 * r.hdot_alpha_sq + mu * r.potential / 10.0, 1e-12 * std::abs(r.energy));
  }
  std::stringstream ss;
  write_csv(ss, recs);
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].energy, recs[i].energy);
    EXPECT_EQ(back[i].localized_virial_rhs, recs[i].localized_virial_rhs);
    EXPECT_EQ(back[i].grad_below, recs[i].grad_below);
    EXPECT_EQ(back[i].comparability_ratio, recs[i].comparability_ratio);
  }
  EXPECT_FALSE(back[0].grad_below.has_value());
  EXPECT_TRUE(back[2].grad_below.has_value());
  std::stringstream bad("t,mass\n0,1\n");
  EXPECT_THROW(read_csv(bad), ValidationError);
}
