#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fnls/errors.hpp"
#include "fnls/ground_state.hpp"
#include "fnls/norms.hpp"
#include "fnls/spectral.hpp"

using namespace fnls;

namespace {

// Closed-form value of (-Delta)^a (1+|x|^2)^{-(N-2a)/2} / f^{(N+2a)/(N-2a)}.
double kappa_oracle(const PhysicsParams& p) {
  const double n = p.dim, a = p.alpha;
  return std::pow(2.0, 2 * a) * std::tgamma((n + 2 * a) / 2) / std::tgamma((n - 2 * a) / 2);
}

const PhysicsParams kRef = PhysicsParams::make(2, 0.8, -1);
const Grid kGrid = Grid::make(2, 100.0, 256);

const GroundStateConstants& ref_constants() {
  static const GroundStateConstants c = ground_state_constants(kGrid, kRef);
  return c;
}

}  // namespace

TEST(Kappa, MatchesClosedForm) {
  for (auto [n, a] : {std::pair{2, 0.8}, {2, 0.7}, {2, 0.95}, {3, 0.75}, {3, 0.9}}) {
    const auto p = PhysicsParams::make(n, a, -1);
    const double k = calibrate_kappa(p);
    EXPECT_GT(k, 0.0);
    EXPECT_NEAR(k, kappa_oracle(p), 1e-9 * kappa_oracle(p)) << "N=" << n << " a=" << a;
  }
}

TEST(Kappa, StableUnderDoubling) {
  const double a = calibrate_kappa(kRef, 1 << 14);
  const double b = calibrate_kappa(kRef, 1 << 15);
  EXPECT_NEAR(a, b, 1e-6 * b);
  EXPECT_THROW(calibrate_kappa(kRef, 5000), ValidationError);
}

TEST(Spec, Validation) {
  EXPECT_THROW(GroundStateSpec::make(kRef, -1.0), ValidationError);
  EXPECT_THROW(GroundStateSpec::make(kRef, 1.0, 0.0), ValidationError);
  EXPECT_THROW(GroundStateSpec::make(kRef, 1.0, 1.0, 0.0), ValidationError);
  EXPECT_THROW(GroundStateSpec::make(kRef, 1.0, 1.0, 1.0, 4.0), ValidationError);
}

TEST(Profile, RealPositiveRadialWithPeakAtOrigin) {
  const auto spec = GroundStateSpec::calibrated(kRef);
  const Field W = profile(kGrid, spec);
  EXPECT_EQ(W.imaginary_fraction(), 0.0);
  for (const auto& v : W.values()) EXPECT_GT(v.real(), 0.0);
  EXPECT_LE(radiality_defect(W), 1e-12);
  const std::size_t origin = kGrid.flatten({128, 128, 0});
  EXPECT_DOUBLE_EQ(W[origin].real(), spec.C1);
  const Field W2 = profile(kGrid, spec.with_scale(2.0));
  EXPECT_NEAR(W2[origin].real(), spec.C1 * std::pow(2.0, kRef.scaling_weight()), 1e-14);
}

TEST(Profile, ScalingKeepsCorrectedSeminorm) {
  const auto spec = GroundStateSpec::calibrated(kRef);
  std::vector<double> q;
  for (double lambda : {1.0, 2.0}) {
    const auto s = spec.with_scale(lambda);
    const FarField closure = far_field_closure(kGrid, s);
    q.push_back(quadratic_form(profile(kGrid, s), kRef, &closure));
  }
  EXPECT_NEAR(q[1], q[0], 5e-3 * q[0]);
}

TEST(Residual, CorrectedClosedFormIsSmall) {
  EXPECT_LE(ref_constants().residual, 2e-3);
}

TEST(Residual, HomogeneityLowerBound) {
  const auto spec = GroundStateSpec::calibrated(kRef);
  const Field W = profile(kGrid, spec);
  const Field lw = tail_corrected_laplacian(kGrid, spec);
  const double base = elliptic_residual(W, lw, kRef);
  for (double c : {0.5, 2.0}) {
    const double r = elliptic_residual(W * c, lw * c, kRef);
    EXPECT_GE(r, std::abs(std::pow(c, kRef.p()) - 1.0) * (1.0 - base) - 1e-3) << "c=" << c;
  }
  EXPECT_GE(elliptic_residual(W * 2.0, lw * 2.0, kRef), 0.3);
}

TEST(Residual, RejectsZeroAndComplexFields) {
  EXPECT_THROW(elliptic_residual(Field(kGrid), kRef), ValidationError);
  const auto spec = GroundStateSpec::calibrated(kRef).with_phase(0.5);
  EXPECT_THROW(elliptic_residual(profile(kGrid, spec), kRef), ValidationError);
}

TEST(Constants, Identities) {
  const auto& c = ref_constants();
  EXPECT_NEAR(c.kappa, kappa_oracle(kRef), 1e-9);
  EXPECT_NEAR(c.grad_norm_sq, c.potential_integral, 0.01 * c.grad_norm_sq);
  EXPECT_NEAR(std::pow(c.sobolev_const, -kRef.dim / kRef.alpha), c.grad_norm_sq, 0.01 * c.grad_norm_sq);
  EXPECT_NEAR(c.energy_focusing, kRef.alpha / kRef.dim * c.grad_norm_sq, 0.01 * c.energy_focusing);
  EXPECT_NEAR(c.energy_defocusing - c.energy_focusing, 2.0 / kRef.two_star() * c.potential_integral, 1e-12);
  EXPECT_TRUE(c.mass_divergent);
}

TEST(Sobolev, HomogeneousAndBeatsGaussians) {
  const auto spec = GroundStateSpec::calibrated(kRef);
  const Field W = profile(kGrid, spec);
  EXPECT_NEAR(sobolev_constant(W * 3.0, kRef), sobolev_constant(W, kRef), 1e-12);
  for (double width : {0.5, 1.0, 2.0, 4.0}) {
    const Field g = Field::sample_radial(kGrid, [width](double r) {
      return cplx{std::exp(-0.5 * r * r / (width * width)), 0.0};
    });
    EXPECT_GT(ref_constants().sobolev_const, sobolev_constant(g, kRef)) << width;
  }
  EXPECT_THROW(sobolev_constant(Field(kGrid), kRef), ValidationError);
}

TEST(Sobolev, LocalMaximumUnderRadialPerturbations) {
  const auto spec = GroundStateSpec::calibrated(kRef);
  const Field W = profile(kGrid, spec);
  const FarField closure = far_field_closure(kGrid, spec);
  const double two_star = kRef.two_star();
  auto ratio = [&](const Field& u) {
    return lp_norm(u, two_star) / std::sqrt(quadratic_form(u, kRef, &closure));
  };
  const double base = ratio(W);
  const double w_norm = std::sqrt(quadratic_form(W, kRef, &closure));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), width(0.5, 4.0);
  for (int trial = 0; trial < 8; ++trial) {
    Field d(kGrid);
    for (int k = 0; k < 3; ++k) {
      const double a = amp(rng), w = width(rng);
      d += Field::sample_radial(kGrid, [a, w](double r) { return cplx{a * std::exp(-0.5 * r * r / (w * w)), 0.0}; });
    }
    d *= 0.01 * w_norm / sobolev_seminorm(d, kRef.alpha);
    EXPECT_LE(ratio(W + d), base + 1e-4) << "trial " << trial;
  }
}

TEST(InK, Examples) {
  const auto& c = ref_constants();
  const auto spec = GroundStateSpec::calibrated(kRef);
  const Field W = profile(kGrid, spec);
  const FarField half = far_field_closure(kGrid, spec, 0.5);
  const FarField full = far_field_closure(kGrid, spec, 1.0);
  EXPECT_TRUE(in_K(W * 0.5, kRef, c.energy_focusing, c, &half));
  EXPECT_FALSE(in_K(W, kRef, c.energy_focusing, c, &full));
  EXPECT_TRUE(in_K(Field(kGrid), kRef, 1e-3, c));
  const auto plus = PhysicsParams::make(2, 0.8, 1);
  EXPECT_TRUE(in_K(W * 0.5, plus, c.energy_defocusing, c, &half));
  EXPECT_FALSE(in_K(W, plus, c.energy_defocusing, c, &full));
}

TEST(Closure, QuadraticFormIsExactOnScaledProfile) {
  const auto spec = GroundStateSpec::calibrated(kRef);
  const Field W = profile(kGrid, spec);
  const FarField closure = far_field_closure(kGrid, spec, 0.9);
  EXPECT_NEAR(quadratic_form(W * 0.9, kRef, &closure), 0.81 * ref_constants().grad_norm_sq, 1e-12);
}

TEST(Petviashvili, FixedPointAndErrors) {
  const Grid g = Grid::make(2, 40.0, 64);
  const auto out = petviashvili_solve(g, kRef, 1e-2, 5000, 1e-11);
  EXPECT_GE(out.iterations, 1);
  const auto again = petviashvili_solve(g, kRef, 1e-2, 1, 1e-9, out.W);
  EXPECT_EQ(again.iterations, 1);
  EXPECT_LE(again.last_change, 1e-9);
  EXPECT_THROW(petviashvili_solve(g, kRef, 0.0, 10, 1e-8), ValidationError);
  EXPECT_THROW(petviashvili_solve(g, kRef, 1e-3, 1, 1e-14), NumericalError);
  EXPECT_THROW(petviashvili_solve(g, kRef, 1e-3, 10, 1e-8, Field(g)), NumericalError);
}
