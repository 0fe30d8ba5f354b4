#include "fnls/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fnls/errors.hpp"
#include "fnls/spectral.hpp"

namespace fnls {

namespace {

double sum_abs_sq(const Field& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return s;
}

}  // namespace

double l2_norm(const Field& f) {
  const Grid& g = f.grid();
  if (f.space() == Space::frequency) return std::sqrt(sum_abs_sq(f) / g.volume());
  return std::sqrt(sum_abs_sq(f) * g.cell_volume());
}

double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw ValidationError("lp_norm needs p >= 1");
  if (std::isinf(p)) return sup_norm(f);
  if (p == 2.0) return l2_norm(f);
  const Field phys = to_physical(f);
  double s = 0.0;
  for (const auto& v : phys.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm_in_shell(const Field& f, double p, double r_min, double r_max) {
  if (!(p >= 1.0)) throw ValidationError("lp_norm_in_shell needs p >= 1");
  const Field phys = to_physical(f);
  const Grid& g = f.grid();
  double acc = 0.0;
  for (std::size_t n = 0; n < phys.size(); ++n) {
    const auto idx = g.unflatten(n);
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) r2 += g.coordinate(idx[d]) * g.coordinate(idx[d]);
    const double r = std::sqrt(r2);
    if (r < r_min || r > r_max) continue;
    const double a = std::abs(phys[n]);
    acc = std::isinf(p) ? std::max(acc, a) : acc + std::pow(a, p);
  }
  return std::isinf(p) ? acc : std::pow(acc * g.cell_volume(), 1.0 / p);
}

double sup_norm(const Field& f) {
  const Field phys = to_physical(f);
  double m = 0.0;
  for (const auto& v : phys.values()) m = std::max(m, std::abs(v));
  return m;
}

double sobolev_seminorm(const Field& f, double s) {
  if (!(s >= 0.0)) throw ValidationError("sobolev_seminorm needs s >= 0");
  const Field hat = to_frequency(f);
  if (s == 0.0) return l2_norm(hat);
  const auto xi2 = detail::wavenumber_squared(f.grid());
  double acc = 0.0;
  for (std::size_t n = 0; n < hat.size(); ++n) {
    if (xi2[n] > 0.0) acc += std::pow(xi2[n], s) * std::norm(hat[n]);
  }
  return std::sqrt(acc / f.grid().volume());
}

cplx inner_product(const Field& f, const Field& g) {
  if (!(f.grid() == g.grid())) throw ValidationError("inner_product on different grids");
  if (f.space() == Space::frequency && g.space() == Space::frequency) {
    cplx s{0.0, 0.0};
    for (std::size_t n = 0; n < f.size(); ++n) s += std::conj(f[n]) * g[n];
    return s / f.grid().volume();
  }
  const Field a = to_physical(f);
  const Field b = to_physical(g);
  cplx s{0.0, 0.0};
  for (std::size_t n = 0; n < a.size(); ++n) s += std::conj(a[n]) * b[n];
  return s * f.grid().cell_volume();
}

cplx integral(const Field& f) {
  if (f.space() == Space::frequency) {
    // The zero mode of the continuous-normalized transform is the integral.
    return f[0];
  }
  cplx s{0.0, 0.0};
  for (const auto& v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

NormsReport norms(const Field& f, double p, double s) {
  return {l2_norm(f), lp_norm(f, p), sobolev_seminorm(f, s), sup_norm(f)};
}

double spacetime_norm(const std::vector<Snapshot>& series, double q, double r) {
  if (series.empty()) throw ValidationError("spacetime_norm needs a nonempty series");
  if (!(q >= 1.0) || !(r >= 1.0)) throw ValidationError("spacetime_norm needs q, r >= 1");
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].t < series[i - 1].t) throw ValidationError("spacetime_norm series not time-sorted");
  }
  std::vector<double> spatial(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) spatial[i] = lp_norm(series[i].u, r);
  if (std::isinf(q)) return *std::max_element(spatial.begin(), spatial.end());
  double acc = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double dt = series[i].t - series[i - 1].t;
    acc += 0.5 * dt * (std::pow(spatial[i], q) + std::pow(spatial[i - 1], q));
  }
  return std::pow(acc, 1.0 / q);
}

Field symmetrize(const Field& f) {
  const Field phys = to_physical(f);
  const Grid& g = f.grid();
  const int dim = g.dim;
  const int m = g.points;
  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.begin() + dim));

  Field avg(g);
  int count = 0;
  for (const auto& pm : perms) {
    for (int flips = 0; flips < (1 << dim); ++flips) {
      ++count;
      for (std::size_t n = 0; n < phys.size(); ++n) {
        const auto idx = g.unflatten(n);
        std::array<int, 3> src{0, 0, 0};
        for (int d = 0; d < dim; ++d) {
          const int i = idx[pm[d]];
          src[d] = (flips >> d) & 1 ? (m - i) % m : i;
        }
        avg[n] += phys[g.flatten(src)];
      }
    }
  }
  avg *= 1.0 / count;
  return f.space() == Space::frequency ? forward_transform(avg) : avg;
}

double radiality_defect(const Field& f) {
  const double nrm = l2_norm(f);
  if (nrm == 0.0) return 0.0;
  const Field phys = to_physical(f);
  return l2_norm(phys - symmetrize(phys)) / nrm;
}

}  // namespace fnls
