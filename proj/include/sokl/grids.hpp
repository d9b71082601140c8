#pragma once

#include <array>
#include <vector>

#include "sokl/common.hpp"

namespace sokl {

/// Uniform periodic grid on the unit circle: alpha_j = 2*pi*j/n, equal
/// quadrature weights 2*pi/n (trapezoid rule on a periodic function).
struct AngularGrid {
  explicit AngularGrid(int n);

  int n = 0;
  double node(int j) const { return kTwoPi * j / n; }
  double weight() const { return kTwoPi / n; }
  std::array<double, 2> omega(int j) const;  // (cos, sin) of node j
  std::vector<double> nodes() const;
};

/// Uniform periodic grid on a 1-D or 2-D torus; nodes are cell centers.
/// A cell count of 1 marks a homogeneous axis (no spatial dependence);
/// otherwise counts must be even and at least 8 for the spectral stencils.
struct TorusGrid {
  TorusGrid(int dim, std::array<int, 2> n_cells, std::array<double, 2> length);
  static TorusGrid line(int n, double length);  // dim 1 helper

  int dim = 1;
  std::array<int, 2> n = {0, 0};
  std::array<double, 2> length = {0.0, 0.0};

  int total_cells() const { return dim == 1 ? n[0] : n[0] * n[1]; }
  double spacing(int axis) const { return length[axis] / n[axis]; }
  double node(int axis, int i) const { return (i + 0.5) * spacing(axis); }
  double cell_volume() const;
  double min_spacing() const;
};

/// Quadrature grid on the open polar interval (0, pi). The default rule is
/// Gauss-Legendre mapped from [-1, 1]; a uniform midpoint variant exists for
/// cross-checks. Weights include no sin factor.
struct ThetaGrid {
  int n = 0;
  std::vector<double> theta;
  std::vector<double> w;

  static ThetaGrid gauss(int n);
  static ThetaGrid uniform_midpoint(int n);

  double integrate(const std::vector<double>& samples) const;
};

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence. Nodes ascend.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct Moments {
  double mass = 0.0;
  std::array<double, 2> current = {0.0, 0.0};
};

/// Angular moments (integral of f, integral of omega*f) of circle samples.
Moments moment_integrals(const AngularGrid& grid, const std::vector<double>& f);

/// Max-norm residual of the discrete identity
///   div_omega((I - omega omega^T) V) = -(n-1) omega . V
/// for a constant vector V on the circle (n = 2), using the order-1 spectral
/// derivative of the tangential component.
double sphere_divergence_identity_check(const AngularGrid& grid, std::array<double, 2> V);

}  // namespace sokl
