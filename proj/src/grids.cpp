#include "sokl/grids.hpp"

#include <algorithm>
#include <cmath>

#include "sokl/spectral.hpp"

namespace sokl {

AngularGrid::AngularGrid(int n_) : n(n_) {
  require(n >= 4 && n % 2 == 0, "AngularGrid: need an even node count >= 4");
}

std::array<double, 2> AngularGrid::omega(int j) const {
  const double a = node(j);
  return {std::cos(a), std::sin(a)};
}

std::vector<double> AngularGrid::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) out[j] = node(j);
  return out;
}

TorusGrid::TorusGrid(int dim_, std::array<int, 2> n_cells, std::array<double, 2> length_)
    : dim(dim_), n(n_cells), length(length_) {
  require(dim == 1 || dim == 2, "TorusGrid: dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    require(n[a] == 1 || (n[a] >= 8 && n[a] % 2 == 0),
            "TorusGrid: need even cell counts >= 8 (or 1 for a homogeneous axis)");
    require(length[a] > 0.0, "TorusGrid: lengths must be positive");
  }
  if (dim == 1) {
    n[1] = 1;
    length[1] = 1.0;
  }
}

TorusGrid TorusGrid::line(int n_, double length_) {
  return TorusGrid(1, {n_, 1}, {length_, 1.0});
}

double TorusGrid::cell_volume() const {
  double v = spacing(0);
  if (dim == 2) v *= spacing(1);
  return v;
}

double TorusGrid::min_spacing() const {
  double h = spacing(0);
  if (dim == 2) h = std::min(h, spacing(1));
  return h;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  require(n >= 2, "gauss_legendre: need at least 2 nodes");
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      // p0 = P_n(z); derivative from the standard identity.
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
}

ThetaGrid ThetaGrid::gauss(int n_) {
  require(n_ >= 2, "ThetaGrid: need at least 2 nodes");
  std::vector<double> x, wx;
  gauss_legendre(n_, x, wx);
  ThetaGrid g;
  g.n = n_;
  g.theta.resize(static_cast<std::size_t>(n_));
  g.w.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    g.theta[i] = 0.5 * kPi * (x[i] + 1.0);
    g.w[i] = 0.5 * kPi * wx[i];
  }
  return g;
}

ThetaGrid ThetaGrid::uniform_midpoint(int n_) {
  require(n_ >= 2, "ThetaGrid: need at least 2 nodes");
  ThetaGrid g;
  g.n = n_;
  g.theta.resize(static_cast<std::size_t>(n_));
  g.w.assign(static_cast<std::size_t>(n_), kPi / n_);
  for (int i = 0; i < n_; ++i) g.theta[i] = (i + 0.5) * kPi / n_;
  return g;
}

double ThetaGrid::integrate(const std::vector<double>& samples) const {
  require(static_cast<int>(samples.size()) == n, "ThetaGrid::integrate: size mismatch");
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w[i] * samples[i];
  return s;
}

Moments moment_integrals(const AngularGrid& grid, const std::vector<double>& f) {
  require(static_cast<int>(f.size()) == grid.n, "moment_integrals: size mismatch");
  require_finite(f, "moment_integrals");
  Moments m;
  const double w = grid.weight();
  for (int j = 0; j < grid.n; ++j) {
    const auto om = grid.omega(j);
    m.mass += w * f[j];
    m.current[0] += w * om[0] * f[j];
    m.current[1] += w * om[1] * f[j];
  }
  return m;
}

double sphere_divergence_identity_check(const AngularGrid& grid, std::array<double, 2> V) {
  // Tangential component tau.V with tau = (-sin, cos); its angular derivative
  // should equal -(omega.V) exactly for this band-limited field.
  std::vector<double> tangential(static_cast<std::size_t>(grid.n));
  for (int j = 0; j < grid.n; ++j) {
    const auto om = grid.omega(j);
    tangential[j] = -om[1] * V[0] + om[0] * V[1];
  }
  const std::vector<double> div = spectral_derivative(tangential, 1);
  double worst = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    const auto om = grid.omega(j);
    const double rhs = -(om[0] * V[0] + om[1] * V[1]);
    worst = std::max(worst, std::abs(div[j] - rhs));
  }
  return worst;
}

}  // namespace sokl
