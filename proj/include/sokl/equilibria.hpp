#pragma once

#include <vector>

#include "sokl/common.hpp"
#include "sokl/grids.hpp"

namespace sokl {

/// Parameters of a von Mises-Fisher angular density with concentration 1/d.
struct VmfParams {
  double d = 1.0;          // noise-to-alignment ratio, must be > 0
  double mean_angle = 0.0;  // direction of the distribution's peak
};

/// Samples of the von Mises-Fisher density exp(cos(alpha - mean)/d) / Z on
/// the angular grid, normalized so the grid quadrature of the result is
/// exactly 1. Safe for small d (exponents are shifted before exponentiation).
std::vector<double> vmf_density(const VmfParams& params, const AngularGrid& grid);

/// First-moment magnitude c1(d) of the unit-mass von Mises-Fisher density on
/// the (n-1)-sphere: the ratio of the cos-weighted to the plain exponential
/// integral over the polar angle. Computed by adaptive quadrature to about
/// 1e-10 absolute accuracy. Requires d > 0, n >= 2.
double order_parameter_c1(double d, int n = 2);

/// Local-equilibrium kinetic field rho(x) * M_{phi(x)}(alpha): one weighted
/// von Mises-Fisher density per spatial cell. rho must be strictly positive.
Field2 equilibrium_field(const std::vector<double>& rho, const std::vector<double>& phi,
                         const TorusGrid& xgrid, const AngularGrid& agrid, double d);

/// Transport coefficients of the macroscopic limit system.
struct Coefficients {
  int n = 2;         // ambient dimension
  double d = 1.0;    // noise-to-alignment ratio
  double k = 0.0;    // viscous feedback gain
  double eta0 = 0.0; // viscous feedback switch/strength
  double c1 = 0.0;   // equilibrium order parameter
  double c2 = 0.0;   // first-correction drift coefficient
  double c3 = 0.0;   // eta0 * k * ((n-1) d + c2)
};

}  // namespace sokl
