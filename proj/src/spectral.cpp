#include "fnls/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "fnls/errors.hpp"

namespace fnls {

namespace detail {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  void set_threads(int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!threads_ready_) {
      if (fftw_init_threads() == 0) throw NumericalError("FFTW thread support failed to initialize");
      threads_ready_ = true;
    }
    threads_ = n;
  }

  int threads() {
    std::lock_guard<std::mutex> lock(mutex_);
    return threads_;
  }

  fftw_plan get(const Grid& grid, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(grid.dim, grid.points, sign, threads_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    if (threads_ready_) fftw_plan_with_nthreads(threads_);
    std::vector<int> n(static_cast<std::size_t>(grid.dim), grid.points);
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * grid.size()));
    fftw_plan plan = fftw_plan_dft(grid.dim, n.data(), scratch, scratch,
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) throw NumericalError("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  bool threads_ready_ = false;
  int threads_ = 1;
  std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

}  // namespace detail

void set_fft_threads(int threads) {
  if (threads < 1) throw ValidationError("thread count must be >= 1");
  detail::plan_cache().set_threads(threads);
}

int fft_threads() { return detail::plan_cache().threads(); }

namespace detail {

void fft_inplace(const Grid& grid, std::span<cplx> data, int sign) {
  if (data.size() != grid.size()) throw ValidationError("FFT buffer does not match grid");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_cache().get(grid, sign), ptr, ptr);
}

std::vector<double> wavenumber_squared(const Grid& grid) {
  std::vector<double> xi2(grid.size());
  for (std::size_t n = 0; n < xi2.size(); ++n) {
    const auto idx = grid.unflatten(n);
    double s = 0.0;
    for (int d = 0; d < grid.dim; ++d) {
      const double k = grid.wavenumber(idx[d]);
      s += k * k;
    }
    xi2[n] = s;
  }
  return xi2;
}

namespace {

// (-1)^(i_0 + ... + i_{N-1}): the phase from centering x on [-L/2, L/2).
double centering_sign(const Grid& grid, std::size_t flat) {
  const auto idx = grid.unflatten(flat);
  int parity = 0;
  for (int d = 0; d < grid.dim; ++d) parity += idx[d];
  return (parity % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace

// Multiplies the spectrum of f by symbol(flat frequency index), staying in f's space.
template <typename Symbol>
Field spectral_apply(const Field& f, Symbol&& symbol) {
  Field out(f);
  auto v = out.values();
  if (f.space() == Space::frequency) {
    for (std::size_t n = 0; n < v.size(); ++n) v[n] *= symbol(n);
    return out;
  }
  fft_inplace(f.grid(), v, -1);
  const double inv = 1.0 / static_cast<double>(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] *= symbol(n) * inv;
  fft_inplace(f.grid(), v, +1);
  return out;
}

}  // namespace detail

Field forward_transform(const Field& f) {
  if (f.space() != Space::physical) throw ValidationError("forward_transform needs a physical field");
  const Grid& g = f.grid();
  std::vector<cplx> v(f.values().begin(), f.values().end());
  detail::fft_inplace(g, v, -1);
  const double h = g.cell_volume();
  for (std::size_t n = 0; n < v.size(); ++n) v[n] *= h * detail::centering_sign(g, n);
  return Field(g, std::move(v), Space::frequency);
}

Field inverse_transform(const Field& f) {
  if (f.space() != Space::frequency) throw ValidationError("inverse_transform needs a frequency field");
  const Grid& g = f.grid();
  std::vector<cplx> v(f.values().begin(), f.values().end());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] *= detail::centering_sign(g, n);
  detail::fft_inplace(g, v, +1);
  const double inv = 1.0 / g.volume();
  for (auto& x : v) x *= inv;
  return Field(g, std::move(v), Space::physical);
}

Field to_physical(const Field& f) {
  return f.space() == Space::physical ? f : inverse_transform(f);
}

Field to_frequency(const Field& f) {
  return f.space() == Space::frequency ? f : forward_transform(f);
}

Field apply_radial_symbol(const Field& f, const std::function<double(double)>& symbol) {
  const auto xi2 = detail::wavenumber_squared(f.grid());
  return detail::spectral_apply(f, [&](std::size_t n) { return symbol(std::sqrt(xi2[n])); });
}

Field fractional_derivative(const Field& f, double s) {
  if (!(s >= 0.0)) {
    throw ValidationError("fractional_derivative order must be >= 0; negative orders need a "
                          "regularized inverse");
  }
  if (s == 0.0) return f;
  const auto xi2 = detail::wavenumber_squared(f.grid());
  const double half = 0.5 * s;
  return detail::spectral_apply(f, [&](std::size_t n) {
    return xi2[n] > 0.0 ? std::pow(xi2[n], half) : 0.0;
  });
}

std::vector<Field> gradient(const Field& f) {
  const Grid& g = f.grid();
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(g.dim));
  for (int axis = 0; axis < g.dim; ++axis) {
    out.push_back(detail::spectral_apply(f, [&](std::size_t n) {
      const int i = g.unflatten(n)[axis];
      return g.is_nyquist(i) ? cplx{0.0, 0.0} : cplx{0.0, g.wavenumber(i)};
    }));
  }
  return out;
}

Field dilation_generator(const Field& f) {
  const bool freq = f.space() == Space::frequency;
  const Field phys = to_physical(f);
  const auto grad = gradient(phys);
  const Grid& g = f.grid();
  Field out(g);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const auto idx = g.unflatten(n);
    cplx acc{0.0, 0.0};
    for (int d = 0; d < g.dim; ++d) acc += g.coordinate(idx[d]) * grad[d][n];
    out[n] = acc;
  }
  return freq ? forward_transform(out) : out;
}

double boundary_ratio(const Field& f, double shell_fraction) {
  const Field phys = to_physical(f);
  const Grid& g = f.grid();
  const double edge = (0.5 - shell_fraction) * g.box_length;
  double peak = 0.0;
  double shell = 0.0;
  for (std::size_t n = 0; n < phys.size(); ++n) {
    const double a = std::abs(phys[n]);
    peak = std::max(peak, a);
    const auto idx = g.unflatten(n);
    bool outer = false;
    for (int d = 0; d < g.dim; ++d) outer = outer || std::abs(g.coordinate(idx[d])) >= edge;
    if (outer) shell = std::max(shell, a);
  }
  return peak > 0.0 ? shell / peak : 0.0;
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  // e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}) written to avoid under/overflow.
  const double e = 1.0 / t - 1.0 / (1.0 - t);
  if (e > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(e));
}

double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double eta = smooth_step(t);
  return eta * (1.0 - eta) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)));
}

double bump(double r) { return smooth_step(2.0 - r); }

double bump_derivative(double r) { return -smooth_step_derivative(2.0 - r); }

Field cutoff_field(const Grid& grid, const CutoffSpec& cutoff) {
  if (!(cutoff.radius > 0.0)) throw ValidationError("cutoff radius must be positive");
  return Field::sample_radial(grid, [&](double r) { return cplx{bump(r / cutoff.radius), 0.0}; });
}

Field cutoff_dilation_field(const Grid& grid, const CutoffSpec& cutoff) {
  if (!(cutoff.radius > 0.0)) throw ValidationError("cutoff radius must be positive");
  return Field::sample_radial(grid, [&](double r) {
    const double s = r / cutoff.radius;
    return cplx{s * bump_derivative(s), 0.0};
  });
}

Field commutator(const Field& f, const Field& multiplier, double s) {
  const bool freq = f.space() == Space::frequency;
  const Field phys = to_physical(f);
  const Field m = to_physical(multiplier);
  Field out = fractional_derivative(phys.pointwise(m), s);
  out -= m.pointwise(fractional_derivative(phys, s));
  return freq ? forward_transform(out) : out;
}

Field commutator_cutoff(const Field& f, const CutoffSpec& cutoff, double s) {
  return commutator(f, cutoff_field(f.grid(), cutoff), s);
}

Field magnitude_spectrum_field(const Field& f) {
  Field spec = to_frequency(f);
  for (auto& v : spec.values()) v = std::abs(v);
  return f.space() == Space::frequency ? spec : inverse_transform(spec);
}

}  // namespace fnls
