#include "sokl/spectral.hpp"

#include <cmath>

#include "sokl/fft.hpp"

namespace sokl {

int spectrum_index(int j, int n) { return (j <= n / 2) ? j : j - n; }

namespace spectral_detail {

void apply_derivative_spectrum(std::complex<double>* spec, int n, int order, double length) {
  const double scale = kTwoPi / length;
  for (int j = 0; j < n; ++j) {
    const int m = spectrum_index(j, n);
    const double k = scale * m;
    if (order == 1) {
      if (2 * m == n) {
        spec[j] = 0.0;
      } else {
        spec[j] *= std::complex<double>(0.0, k);
      }
    } else {
      spec[j] *= -k * k;
    }
  }
}

void apply_shift_spectrum(std::complex<double>* spec, int n, double delta, double length) {
  const double scale = kTwoPi / length;
  for (int j = 0; j < n; ++j) {
    const int m = spectrum_index(j, n);
    const double k = scale * m;
    if (2 * m == n) {
      spec[j] *= std::cos(k * delta);
    } else {
      spec[j] *= std::complex<double>(std::cos(k * delta), std::sin(k * delta));
    }
  }
}

void apply_dealias_spectrum(std::complex<double>* spec, int n) {
  const int cut = n / 3;
  for (int j = 0; j < n; ++j) {
    if (std::abs(spectrum_index(j, n)) > cut) spec[j] = 0.0;
  }
}

std::vector<double> transform_apply(const std::vector<double>& values,
                                    const std::function<void(std::complex<double>*, int)>& op) {
  const int n = static_cast<int>(values.size());
  const Fft& fft = Fft::of_size(n);
  std::vector<std::complex<double>> buf(values.begin(), values.end());
  fft.forward(buf.data());
  op(buf.data(), n);
  fft.inverse(buf.data());
  std::vector<double> out(values.size());
  for (int i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace spectral_detail

std::vector<double> spectral_derivative(const std::vector<double>& values, int order,
                                        double length) {
  const int n = static_cast<int>(values.size());
  require(n >= 8 && n % 2 == 0, "spectral_derivative: need an even sample count >= 8");
  require(order == 1 || order == 2, "spectral_derivative: order must be 1 or 2");
  require(length > 0.0, "spectral_derivative: length must be positive");
  require_finite(values, "spectral_derivative");
  return spectral_detail::transform_apply(values, [order, length](std::complex<double>* s, int m) {
    spectral_detail::apply_derivative_spectrum(s, m, order, length);
  });
}

std::vector<double> spectral_shift(const std::vector<double>& values, double delta,
                                   double length) {
  const int n = static_cast<int>(values.size());
  require(n >= 2 && n % 2 == 0, "spectral_shift: need an even sample count >= 2");
  require(length > 0.0, "spectral_shift: length must be positive");
  require_finite(values, "spectral_shift");
  return spectral_detail::transform_apply(values, [delta, length](std::complex<double>* s, int m) {
    spectral_detail::apply_shift_spectrum(s, m, delta, length);
  });
}

void dealias_two_thirds_inplace(std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  require(n >= 4, "dealias: need at least 4 samples");
  values = spectral_detail::transform_apply(values, [](std::complex<double>* s, int m) {
    spectral_detail::apply_dealias_spectrum(s, m);
  });
}

}  // namespace sokl
