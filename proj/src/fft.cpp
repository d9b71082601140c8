#include "sokl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "sokl/common.hpp"

namespace sokl {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(int n) : n_(n) {
  require(n >= 1, "Fft: length must be positive");
  // Plans are created once on a scratch buffer with FFTW_UNALIGNED so they
  // can later run on any caller buffer via fftw_execute_dft.
  std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fwd_ = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  bwd_ = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!fwd_ || !bwd_) throw std::runtime_error("Fft: planner failed");
}

Fft::~Fft() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

const Fft& Fft::of_size(int n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  static std::map<int, std::unique_ptr<Fft>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::unique_ptr<Fft>(new Fft(n))).first;
  }
  return *it->second;
}

void Fft::forward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void Fft::inverse(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
  const double s = 1.0 / n_;
  for (int i = 0; i < n_; ++i) data[i] *= s;
}

}  // namespace sokl
