#include "fnls/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fnls/errors.hpp"
#include "fnls/norms.hpp"

namespace fnls {

namespace {

double weighted_sum(const Field& weight, const Field& u, double power) {
  double acc = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) acc += weight[n].real() * std::pow(std::abs(u[n]), power);
  return acc * u.grid().cell_volume();
}

// Re int conj(a) b.
double re_pairing(const Field& a, const Field& b) { return inner_product(a, b).real(); }

}  // namespace

double mass(const Field& u) { return std::pow(l2_norm(u), 2); }

double potential(const Field& u, const PhysicsParams& params) {
  const double q = params.p() + 2.0;
  return std::pow(lp_norm(u, q), q);
}

double energy(const Field& u, const PhysicsParams& params, const FarField* closure) {
  return energy_functional(u, params, params.mu, closure);
}

FlaggedValue virial(const Field& u) {
  const Field v = to_physical(u);
  const double v_val = -inner_product(v, dilation_generator(v)).imag();
  const double ratio = boundary_ratio(v);
  return {v_val, ratio, ratio <= kBoundaryCleanThreshold};
}

double virial_rate_rhs(const Field& u, const PhysicsParams& params, const FarField* closure) {
  const double p = params.p();
  const double s = sobolev_seminorm(u, params.alpha);
  double rate = 2.0 * params.alpha * s * s + params.dim * params.mu * p / (p + 2.0) * potential(u, params);
  if (closure != nullptr) {
    const Field v = to_physical(u);
    rate += 2.0 * re_pairing(dilation_generator(v), closure->forcing) +
            params.dim * re_pairing(v, closure->forcing);
  }
  return rate;
}

double localized_virial(const Field& u, const CutoffSpec& cutoff) {
  const Field v = to_physical(u);
  const Field weighted = cutoff_field(v.grid(), cutoff).pointwise(dilation_generator(v));
  return -inner_product(v, weighted).imag();
}

LocalizedVirialRhs localized_virial_rhs(const Field& u, const CutoffSpec& cutoff,
                                        const PhysicsParams& params, const FarField* closure) {
  const Field v = to_physical(u);
  const Grid& g = v.grid();
  const double a = params.alpha;
  const double p = params.p();
  const double nl = params.mu * p / (p + 2.0);
  const Field psi = cutoff_field(g, cutoff);
  const Field tpsi = cutoff_dilation_field(g, cutoff);
  const Field da = fractional_derivative(v, a);
  const Field xg = dilation_generator(v);

  LocalizedVirialRhs out;
  out.terms[0] = 2.0 * a * weighted_sum(psi, da, 2.0);
  out.terms[1] = params.dim * nl * weighted_sum(psi, v, p + 2.0);
  out.terms[2] = 2.0 * re_pairing(da, commutator(xg, psi, a));
  out.terms[3] = nl * weighted_sum(tpsi, v, p + 2.0);
  out.terms[4] = params.dim * re_pairing(da, commutator(v, psi, a));
  out.terms[5] = re_pairing(da, commutator(v, tpsi, a));
  const Field weight = psi * static_cast<double>(params.dim) + tpsi;
  const Field lap = fractional_derivative(v, 2.0 * a);
  const double linear = 2.0 * re_pairing(lap, psi.pointwise(xg)) + re_pairing(lap, weight.pointwise(v));
  out.dilation_defect = linear - (out.terms[0] + out.terms[2] + out.terms[4] + out.terms[5]);
  if (closure != nullptr) {
    const Field& F = closure->forcing;
    out.forcing = 2.0 * re_pairing(psi.pointwise(xg), F) + re_pairing(weight.pointwise(v), F);
  }
  for (double t : out.terms) out.sum += t;
  out.sum += out.forcing + out.dilation_defect;
  out.boundary_ratio = boundary_ratio(v);
  out.boundary_clean = out.boundary_ratio <= kBoundaryCleanThreshold;
  return out;
}

double localized_mass(const Field& u, const CutoffSpec& cutoff) {
  const Field v = to_physical(u);
  return weighted_sum(cutoff_field(v.grid(), cutoff), v, 2.0);
}

TrappingResult trapping_check(const Field& u, const PhysicsParams& params,
                              const GroundStateConstants& W, double delta0, const FarField* closure) {
  TrappingResult r;
  const double q = quadratic_form(u, params, closure);
  const double pot = potential(u, params);
  const double e = 0.5 * q - pot / params.two_star();
  r.grad_margin = 1.0 - q / W.grad_norm_sq;
  r.grad_below = r.grad_margin > 0.0;
  if (q > 0.0) {
    r.coercivity_margin = (q - pot) / q;
    r.coercivity = r.coercivity_margin > 0.0;
    r.comparability_ratio = e / q;
  } else {
    r.coercivity = true;
  }
  r.energy_below = e < (1.0 - delta0) * W.energy_focusing;
  return r;
}

std::vector<CommutatorRow> commutator_norm_report(const Field& f, const std::vector<double>& radii,
                                                  const PhysicsParams& params, double eps) {
  const double a = params.alpha;
  if (!(eps > 0.0 && eps < a)) throw ValidationError("commutator_norm_report needs 0 < eps < alpha");
  const Field v = to_physical(f);
  const Field xg = dilation_generator(v);
  const Field g = magnitude_spectrum_field(v);
  const double d_norm = sobolev_seminorm(v, a);
  const double sob = 2.0 * params.dim / (params.dim - 2.0 * a);
  std::vector<CommutatorRow> rows;
  for (double radius : radii) {
    const Field psi = cutoff_field(v.grid(), CutoffSpec{radius});
    const double inner = std::pow(radius, 1.0 - eps);
    CommutatorRow row;
    row.radius = radius;
    row.g_exterior = lp_norm_in_shell(g, sob, inner, INFINITY);
    const Field c1 = commutator(v, psi, a);
    const Field c2 = commutator(xg, psi, a);
    row.cutoff_comm_lhs = l2_norm(c1);
    row.cutoff_comm_rhs = row.g_exterior + std::pow(radius, -eps * a) * d_norm;
    row.dilation_comm_lhs = l2_norm(c2);
    row.dilation_comm_rhs = d_norm;
    row.dilation_comm_inner_lhs = lp_norm_in_shell(c2, 2.0, 0.0, inner);
    row.dilation_comm_inner_rhs = std::pow(radius, -0.5 * eps * a) * d_norm + row.g_exterior;
    rows.push_back(row);
  }
  return rows;
}

DiagnosticsRecord make_record(double t, const Field& u, const PhysicsParams& params,
                              const DiagnosticsContext& ctx) {
  const Field v = to_physical(u);
  DiagnosticsRecord r;
  r.t = t;
  r.mass = mass(v);
  r.hdot_alpha_sq = quadratic_form(v, params, ctx.closure);
  r.potential = potential(v, params);
  r.energy = energy(v, params, ctx.closure);
  const FlaggedValue vir = virial(v);
  r.virial = vir.value;
  r.boundary_ratio = vir.boundary_ratio;
  r.virial_rate_rhs = virial_rate_rhs(v, params, ctx.closure);
  r.localized_virial = localized_virial(v, ctx.cutoff);
  r.localized_virial_rhs = localized_virial_rhs(v, ctx.cutoff, params, ctx.closure).sum;
  r.localized_mass = localized_mass(v, ctx.cutoff);
  if (ctx.ground_state != nullptr) {
    const auto trap = trapping_check(v, params, *ctx.ground_state, ctx.delta0, ctx.closure);
    r.grad_below = trap.grad_below;
    r.coercivity = trap.coercivity;
    r.comparability_ratio = trap.comparability_ratio;
  }
  return r;
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "t", "mass", "energy", "hdot_alpha_sq", "potential", "virial", "virial_rate_rhs",
      "localized_virial", "localized_virial_rhs", "localized_mass", "grad_below", "coercivity",
      "comparability_ratio", "boundary_ratio"};
  return cols;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<bool>& v) { return v ? (*v ? "1" : "0") : "NA"; }
std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

}  // namespace

void write_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records) {
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << fmt(r.t) << ',' << fmt(r.mass) << ',' << fmt(r.energy) << ',' << fmt(r.hdot_alpha_sq) << ','
        << fmt(r.potential) << ',' << fmt(r.virial) << ',' << fmt(r.virial_rate_rhs) << ','
        << fmt(r.localized_virial) << ',' << fmt(r.localized_virial_rhs) << ','
        << fmt(r.localized_mass) << ',' << fmt(r.grad_below) << ',' << fmt(r.coercivity) << ','
        << fmt(r.comparability_ratio) << ',' << fmt(r.boundary_ratio) << '\n';
  }
}

std::vector<DiagnosticsRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("diagnostics CSV is empty");
  std::string expected;
  for (const auto& c : record_columns()) expected += (expected.empty() ? "" : ",") + c;
  if (line != expected) throw ValidationError("diagnostics CSV header does not match the schema");
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != record_columns().size()) throw ValidationError("diagnostics CSV row has wrong width");
    auto num = [&](std::size_t i) { return std::stod(cells[i]); };
    auto flag = [&](std::size_t i) -> std::optional<bool> {
      if (cells[i] == "NA") return std::nullopt;
      return cells[i] == "1";
    };
    DiagnosticsRecord r;
    r.t = num(0);
    r.mass = num(1);
    r.energy = num(2);
    r.hdot_alpha_sq = num(3);
    r.potential = num(4);
    r.virial = num(5);
    r.virial_rate_rhs = num(6);
    r.localized_virial = num(7);
    r.localized_virial_rhs = num(8);
    r.localized_mass = num(9);
    r.grad_below = flag(10);
    r.coercivity = flag(11);
    if (cells[12] != "NA") r.comparability_ratio = num(12);
    r.boundary_ratio = num(13);
    out.push_back(r);
  }
  return out;
}

}  // namespace fnls
