#pragma once

#include <functional>

namespace sokl {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod 15(7) integration of f on [a, b]
/// to the requested absolute tolerance. The worst interval is bisected
/// until the summed error estimate drops below abs_tol or the interval
/// budget is exhausted.
QuadratureResult adaptive_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                        double abs_tol, int max_intervals = 4000);

/// As above, but throws std::runtime_error (reporting the achieved error
/// estimate) when the tolerance is not met.
double integrate_to_tol(const std::function<double(double)>& f, double a, double b,
                        double abs_tol);

}  // namespace sokl
