#include "fnls/ground_state.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fnls/errors.hpp"
#include "fnls/norms.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

namespace {

bool is_power_of_two(int k) { return k > 0 && (k & (k - 1)) == 0; }

void require_matching(const Grid& grid, const PhysicsParams& params) {
  if (grid.dim != params.dim) throw ValidationError("grid dimension does not match physics dimension");
}

}  // namespace

GroundStateSpec GroundStateSpec::make(const PhysicsParams& params, double C1, double C2,
                                      double lambda0, double theta0, std::array<double, 3> x0) {
  if (!(C1 > 0.0) || !(C2 > 0.0) || !(lambda0 > 0.0)) {
    throw ValidationError("ground state needs C1, C2, lambda0 > 0");
  }
  if (!(std::abs(theta0) <= std::numbers::pi)) throw ValidationError("theta0 must lie in [-pi, pi]");
  return GroundStateSpec{params, C1, C2, lambda0, theta0, x0};
}

GroundStateSpec GroundStateSpec::calibrated(const PhysicsParams& params, int quad_points) {
  const double kappa = calibrate_kappa(params, quad_points);
  return make(params, std::pow(kappa, 1.0 / params.p()));
}

GroundStateSpec GroundStateSpec::with_scale(double lambda) const {
  return make(params, C1, C2, lambda, theta0, x0);
}

GroundStateSpec GroundStateSpec::with_phase(double theta) const {
  return make(params, C1, C2, lambda0, theta, x0);
}

double GroundStateSpec::peak() const { return C1 * std::pow(lambda0, params.scaling_weight()); }

double calibrate_kappa(const PhysicsParams& params, int quad_points) {
  if (quad_points < 10000) throw ValidationError("calibrate_kappa needs quad_points >= 1e4");
  const int n_dim = params.dim;
  const double a = params.alpha;
  const double beta = params.scaling_weight();
  // (-Delta)^a f(0) = c_{N,a} |S^{N-1}| int_0^inf (f(0) - f(r)) r^{-1-2a} dr, r = e^s.
  const double c_na = std::pow(4.0, a) * std::tgamma(0.5 * n_dim + a) /
                      (std::pow(std::numbers::pi, 0.5 * n_dim) * std::abs(std::tgamma(-a)));
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * n_dim) / std::tgamma(0.5 * n_dim);
  // Integrand ~ beta e^{(2-2a)s} as s -> -inf and e^{-2as} as s -> inf.
  const double cut = std::log(1e-18);
  const double s_lo = cut / (2.0 - 2.0 * a);
  const double s_hi = -cut / (2.0 * a);
  auto integrand = [&](double s) {
    const double r2 = std::exp(2.0 * s);
    const double q = r2 > 1e-8 ? -std::expm1(-beta * std::log1p(r2)) / r2
                               : beta * (1.0 - 0.5 * (beta + 1.0) * r2);
    return q * std::exp((2.0 - 2.0 * a) * s);
  };
  auto trapezoid = [&](long n) {
    const double h = (s_hi - s_lo) / static_cast<double>(n);
    double sum = 0.5 * (integrand(s_lo) + integrand(s_hi));
    for (long i = 1; i < n; ++i) sum += integrand(s_lo + h * static_cast<double>(i));
    return sum * h;
  };
  const double coarse = trapezoid(quad_points);
  const double fine = trapezoid(2L * quad_points);
  if (std::abs(fine - coarse) > 1e-8 * std::abs(fine)) {
    throw NumericalError("kappa quadrature did not converge: relative change " +
                         std::to_string(std::abs(fine - coarse) / std::abs(fine)));
  }
  return c_na * sphere * fine;
}

Field profile(const Grid& grid, const GroundStateSpec& spec) {
  require_matching(grid, spec.params);
  const double beta = spec.params.scaling_weight();
  const cplx scale = std::polar(spec.peak(), spec.theta0);
  const double k = spec.C2 * spec.lambda0 * spec.lambda0;
  return Field::sample(grid, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double y = x[d] - spec.x0[d];
      r2 += y * y;
    }
    return scale * std::pow(1.0 + k * r2, -beta);
  });
}

Field tail_corrected_laplacian(const Grid& grid, const GroundStateSpec& spec, int extension) {
  require_matching(grid, spec.params);
  if (!is_power_of_two(extension)) throw ValidationError("box extension must be a power of two");
  const long big = static_cast<long>(extension) * grid.points;
  if (std::pow(static_cast<double>(big), grid.dim) > static_cast<double>(1L << 26)) {
    throw ValidationError("extended box exceeds 2^26 points; lower the extension");
  }
  const Grid ext = Grid::make(grid.dim, grid.box_length * extension, static_cast<int>(big));
  const Field lw = fractional_derivative(profile(ext, spec), 2.0 * spec.params.alpha);
  const int offset = (extension - 1) * grid.points / 2;
  Field out(grid);
  for (std::size_t n = 0; n < out.size(); ++n) {
    auto idx = grid.unflatten(n);
    for (int d = 0; d < grid.dim; ++d) idx[d] += offset;
    out[n] = lw[ext.flatten(idx)];
  }
  return out;
}

FarField far_field_closure(const Grid& grid, const GroundStateSpec& spec, double amplitude,
                           int extension) {
  const Field W = profile(grid, spec);
  Field forcing = tail_corrected_laplacian(grid, spec, extension);
  forcing -= fractional_derivative(W, 2.0 * spec.params.alpha);
  forcing *= amplitude;
  const double baseline = inner_product(W * amplitude, forcing).real();
  return FarField{std::move(forcing), amplitude, baseline};
}

double elliptic_residual(const Field& W, const Field& laplacian_W, const PhysicsParams& params) {
  const Field w = to_physical(W);
  const Field lw = to_physical(laplacian_W);
  if (l2_norm(w) == 0.0) throw ValidationError("elliptic_residual of the zero field");
  if (w.imaginary_fraction() > 1e-10) throw ValidationError("elliptic_residual needs a real field");
  const double p = params.p();
  Field res(lw);
  for (std::size_t n = 0; n < res.size(); ++n) {
    const double v = w[n].real();
    res[n] -= std::pow(std::abs(v), p) * v;
  }
  return l2_norm(res) / l2_norm(lw);
}

double elliptic_residual(const Field& W, const PhysicsParams& params) {
  return elliptic_residual(W, fractional_derivative(to_physical(W), 2.0 * params.alpha), params);
}

double sobolev_constant(const Field& W, const PhysicsParams& params) {
  const double grad = sobolev_seminorm(W, params.alpha);
  if (grad == 0.0) throw ValidationError("sobolev_constant of the zero field");
  return lp_norm(W, params.two_star()) / grad;
}

double quadratic_form(const Field& u, const PhysicsParams& params, const FarField* closure) {
  const double s = sobolev_seminorm(u, params.alpha);
  double q = s * s;
  if (closure != nullptr) q += 2.0 * inner_product(u, closure->forcing).real() - closure->baseline;
  return q;
}

double energy_functional(const Field& u, const PhysicsParams& params, int mu, const FarField* closure) {
  const double pp = params.p() + 2.0;
  return 0.5 * quadratic_form(u, params, closure) + mu / pp * std::pow(lp_norm(u, pp), pp);
}

GroundStateConstants ground_state_constants(const Grid& grid, const PhysicsParams& params,
                                            int extension, int quad_points) {
  require_matching(grid, params);
  GroundStateConstants c;
  c.kappa = calibrate_kappa(params, quad_points);
  const auto spec = GroundStateSpec::make(params, std::pow(c.kappa, 1.0 / params.p()));
  c.C1 = spec.C1;
  const Field W = profile(grid, spec);
  const FarField closure = far_field_closure(grid, spec, 1.0, extension);
  c.grad_norm_sq = quadratic_form(W, params, &closure);
  c.potential_integral = std::pow(lp_norm(W, params.two_star()), params.two_star());
  c.sobolev_const = std::pow(c.potential_integral, 1.0 / params.two_star()) / std::sqrt(c.grad_norm_sq);
  c.energy_focusing = energy_functional(W, params, -1, &closure);
  c.energy_defocusing = energy_functional(W, params, +1, &closure);
  Field lw = fractional_derivative(W, 2.0 * params.alpha);
  lw += closure.forcing;
  c.residual = elliptic_residual(W, lw, params);
  c.box_mass = std::pow(l2_norm(W), 2);
  c.mass_divergent = params.dim <= 4.0 * params.alpha;
  return c;
}

PetviashviliResult petviashvili_solve(const Grid& grid, const PhysicsParams& params, double eps,
                                      int max_iter, double tol, const std::optional<Field>& initial) {
  require_matching(grid, params);
  if (!(eps > 0.0)) throw ValidationError("petviashvili_solve needs eps > 0");
  if (!(tol > 0.0)) throw ValidationError("petviashvili_solve needs tol > 0");
  if (max_iter < 1) throw ValidationError("petviashvili_solve needs max_iter >= 1");
  const double p = params.p();
  const double gamma = (p + 1.0) / p;
  const auto xi2 = detail::wavenumber_squared(grid);
  std::vector<double> symbol(xi2.size());
  for (std::size_t n = 0; n < xi2.size(); ++n) symbol[n] = std::pow(xi2[n], params.alpha) + eps;

  Field W = initial ? to_physical(*initial)
                    : Field::sample_radial(grid, [](double r) { return cplx{std::exp(-0.5 * r * r), 0.0}; });
  for (auto& v : W.values()) v = v.real();

  for (int it = 1; it <= max_iter; ++it) {
    Field nl(W);
    for (auto& v : nl.values()) v = std::pow(std::abs(v.real()), p) * v.real();
    const Field w_hat = forward_transform(W);
    Field n_hat = forward_transform(nl);
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t n = 0; n < w_hat.size(); ++n) {
      lhs += symbol[n] * std::norm(w_hat[n]);
      rhs += (std::conj(w_hat[n]) * n_hat[n]).real();
    }
    if (!(rhs > 0.0) || !std::isfinite(lhs)) throw NumericalError("Petviashvili iterate collapsed");
    const double factor = std::pow(lhs / rhs, gamma);
    for (std::size_t n = 0; n < n_hat.size(); ++n) n_hat[n] *= factor / symbol[n];
    Field next = inverse_transform(n_hat);
    for (auto& v : next.values()) v = v.real();
    const double size = l2_norm(next);
    if (!(size >= 1e-12)) throw NumericalError("Petviashvili iterate collapsed to zero");
    const double change = l2_norm(next - W) / size;
    W = std::move(next);
    if (change <= tol) return {std::move(W), it, change};
  }
  throw NumericalError("Petviashvili did not converge in " + std::to_string(max_iter) + " iterations");
}

double core_profile_mismatch(const Field& f, const GroundStateSpec& base, double radius) {
  const Field u = to_physical(f);
  const double peak = sup_norm(u);
  if (peak == 0.0) throw ValidationError("core_profile_mismatch of the zero field");
  const double lambda = std::pow(peak / base.C1, 1.0 / base.params.scaling_weight());
  const Field member = profile(u.grid(), base.with_phase(0.0).with_scale(lambda));
  const Grid& g = u.grid();
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const auto idx = g.unflatten(n);
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double y = g.coordinate(idx[d]) - base.x0[d];
      r2 += y * y;
    }
    if (r2 > radius * radius) continue;
    diff += std::norm(std::abs(u[n]) - member[n].real());
    ref += std::norm(member[n]);
  }
  return std::sqrt(diff / ref);
}

bool in_K(const Field& f, const PhysicsParams& params, double a, const GroundStateConstants& W,
          const FarField* closure) {
  const double e = energy_functional(f, params, params.mu, closure);
  if (params.mu > 0) return e < a;
  return e < a && quadratic_form(f, params, closure) < W.grad_norm_sq;
}

}  // namespace fnls
