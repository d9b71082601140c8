#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "sokl/common.hpp"

namespace sokl {

/// Signed wavenumber (in index units) of spectrum bin j for an n-point
/// transform: 0, 1, ..., n/2, -(n/2-1), ..., -1.
int spectrum_index(int j, int n);

/// Derivative of the trigonometric interpolant of uniform periodic samples.
/// order 1 multiplies by ik with the Nyquist bin zeroed (the interpolant's
/// Nyquist part is a pure cosine whose derivative vanishes at the nodes);
/// order 2 multiplies every bin by -k^2. Requires an even sample count of at
/// least 8 and finite input.
std::vector<double> spectral_derivative(const std::vector<double>& values, int order,
                                        double length = kTwoPi);

/// Samples of f(. + delta) for the trigonometric interpolant f of `values`.
/// The Nyquist bin is scaled by cos(k*delta), which keeps real input real
/// and makes shift(delta) the exact adjoint flow of the order-1 derivative.
std::vector<double> spectral_shift(const std::vector<double>& values, double delta,
                                   double length = kTwoPi);

/// Zero every bin with |k| > n/3 (2/3-rule dealiasing for quadratic terms).
void dealias_two_thirds_inplace(std::vector<double>& values);

namespace spectral_detail {

/// In-place building blocks on complex spectra (length n, FFTW layout).
void apply_derivative_spectrum(std::complex<double>* spec, int n, int order, double length);
void apply_shift_spectrum(std::complex<double>* spec, int n, double delta, double length);
void apply_dealias_spectrum(std::complex<double>* spec, int n);

/// Real samples -> spectrum -> op -> samples, one scratch transform pair.
std::vector<double> transform_apply(const std::vector<double>& values,
                                    const std::function<void(std::complex<double>*, int)>& op);

}  // namespace spectral_detail

}  // namespace sokl
