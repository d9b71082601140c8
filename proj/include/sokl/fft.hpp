#pragma once

#include <complex>

namespace sokl {

/// Cached 1-D complex-to-complex FFT plans. Plan creation is serialized
/// internally; executing a cached plan on caller-provided buffers is safe
/// from multiple threads as long as each thread uses its own buffers.
class Fft {
 public:
  /// Shared plan pair for transforms of length n (n >= 1). Plans live for
  /// the whole process.
  static const Fft& of_size(int n);

  /// In-place forward transform (negative exponent), no normalization.
  void forward(std::complex<double>* data) const;

  /// In-place inverse transform, normalized by 1/n.
  void inverse(std::complex<double>* data) const;

  int size() const { return n_; }

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  ~Fft();

 private:
  explicit Fft(int n);

  int n_;
  void* fwd_;  // fftw_plan
  void* bwd_;
};

}  // namespace sokl
