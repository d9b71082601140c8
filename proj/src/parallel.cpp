#include "sokl/parallel.hpp"

#include <omp.h>

namespace sokl {

int max_threads() { return omp_get_max_threads(); }

}  // namespace sokl
