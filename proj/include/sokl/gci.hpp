#pragma once

#include <vector>

#include "sokl/equilibria.hpp"
#include "sokl/grids.hpp"

namespace sokl {

/// Solution of the weighted Sturm-Liouville problem on (0, pi)
///   -(w g')'/w + (n-2) g / sin^2(theta) = sin(theta),
///   w = sin^{n-2}(theta) exp(cos(theta)/d),  g(0) = g(pi) = 0,
/// discretized by a Legendre-Galerkin method whose basis functions vanish at
/// both endpoints. The companion profile h = g / sin(theta) extends the
/// solution to the angular factor used by the collision-invariant pairing.
struct GciSolution {
  int n_dim = 2;  // ambient dimension n >= 2; the singular term is only assembled for n > 2
  double d = 1.0;
  ThetaGrid grid;
  std::vector<double> coeff;  // modal coefficients in the basis P_k - P_{k+2} of s = 2 theta/pi - 1
  std::vector<double> g;      // node samples of g
  std::vector<double> dg;     // node samples of g'
  std::vector<double> h;      // node samples of g / sin
  double residual_weighted = 0.0;  // sqrt(int (L g - sin)^2 w), with w normalized by exp(-1/d)
  double rhs_norm_weighted = 0.0;  // sqrt(int sin^2 w), same normalization

  double evaluate_g(double theta) const;  // modal evaluation, theta in [0, pi]
  double evaluate_h(double theta) const;  // g/sin, theta strictly inside (0, pi)
};

/// Solves the problem above on the given polar grid (>= 64 Gauss nodes).
GciSolution solve_gci_ode(double d, int n_dim, const ThetaGrid& grid);

/// Convenience overload on a default Gauss grid of the given resolution.
GciSolution solve_gci_ode(double d, int n_dim, int resolution = 128);

/// First-correction drift coefficient
///   c2 = int cos g w sin / int g w sin   (w as above; h-scale cancels).
/// Throws if the denominator is below 1e-12 in the normalized scale.
double coefficient_c2(const GciSolution& sol);

/// Viscous coupling coefficient c3 = eta0 * k * ((n-1) d + c2).
double coefficient_c3(double k, double eta0, double d, int n_dim, double c2);

/// Full coefficient set (c1 by quadrature, c2 from the solver, c3 closed form).
Coefficients compute_coefficients(double d, int n_dim, double k, double eta0,
                                  int resolution = 128);

}  // namespace sokl
