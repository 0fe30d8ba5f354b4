#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fnls/field.hpp"

namespace fnls {

// ---------------------------------------------------------------------------
// Transforms

/// Worker threads used by every subsequent transform (default 1).
void set_fft_threads(int threads);
int fft_threads();

Field forward_transform(const Field& f);
Field inverse_transform(const Field& f);
Field to_physical(const Field& f);
Field to_frequency(const Field& f);

namespace detail {
/// Unnormalized in-place FFT; sign = -1 forward, +1 backward.
void fft_inplace(const Grid& grid, std::span<cplx> data, int sign);
/// |xi|^2 for every frequency index (FFT ordering).
std::vector<double> wavenumber_squared(const Grid& grid);
}  // namespace detail

// ---------------------------------------------------------------------------
// Fourier multipliers.  Every operator returns a field in the same
// representation as its input.

/// Multiplies the spectrum by symbol(|xi|).
Field apply_radial_symbol(const Field& f, const std::function<double(double)>& symbol);

/// D^s = |xi|^s.  The zero mode is annihilated for s > 0; s = 0 is the identity.
Field fractional_derivative(const Field& f, double s);

/// Spectral gradient i*xi_j, Nyquist mode of axis j dropped.
std::vector<Field> gradient(const Field& f);

/// x . grad f with x the coordinate on [-L/2, L/2)^N.  Only meaningful for
/// fields that are negligible near the box boundary; see boundary_ratio.
Field dilation_generator(const Field& f);

/// sup of |f| over the outer shell (any |x_j| >= (1/2 - shell) L) divided by sup |f|.
double boundary_ratio(const Field& f, double shell_fraction = 0.1);

/// Default threshold below which dilation_generator results are trusted.
inline constexpr double kBoundaryCleanThreshold = 1e-8;

// ---------------------------------------------------------------------------
// Smooth cutoff psi_R(x) = psi(x/R): psi = 1 on |x| <= 1, 0 on |x| >= 2.

struct CutoffSpec {
  double radius = 8.0;
};

/// Smooth step eta(t): 0 for t <= 0, 1 for t >= 1, C-infinity in between.
double smooth_step(double t);
double smooth_step_derivative(double t);
/// Radial profile psi(r) = eta(2 - r).
double bump(double r);
double bump_derivative(double r);

Field cutoff_field(const Grid& grid, const CutoffSpec& cutoff);
/// tilde psi_R(x) = (x/R) . (grad psi)(x/R); supported on R <= |x| <= 2R.
Field cutoff_dilation_field(const Grid& grid, const CutoffSpec& cutoff);

/// [D^s, m] f = D^s(m f) - m D^s f for a physical multiplier field m.
Field commutator(const Field& f, const Field& multiplier, double s);
Field commutator_cutoff(const Field& f, const CutoffSpec& cutoff, double s);

/// g = F^{-1}(|F f|), the nonnegative-spectrum companion of f.
Field magnitude_spectrum_field(const Field& f);

}  // namespace fnls
