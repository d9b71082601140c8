#pragma once

#include <cstddef>

namespace sokl {

/// Execution policy for the data-parallel kernels. Serial is the reference
/// path; OpenMP distributes iterations across threads. Both orders must give
/// identical results for kernels without cross-iteration dependencies.
enum class Exec { Serial, OpenMP };

/// Number of threads the OpenMP policy would use.
int max_threads();

template <class F>
void parallel_for(Exec exec, std::ptrdiff_t n, F&& body) {
  if (exec == Exec::OpenMP) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  }
}

}  // namespace sokl
