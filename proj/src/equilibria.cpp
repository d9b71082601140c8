#include "sokl/equilibria.hpp"

#include <algorithm>
#include <cmath>

#include "sokl/quadrature.hpp"

namespace sokl {

std::vector<double> vmf_density(const VmfParams& params, const AngularGrid& grid) {
  require(params.d > 0.0, "vmf_density: d must be positive");
  require(std::isfinite(params.mean_angle), "vmf_density: mean angle must be finite");
  std::vector<double> f(static_cast<std::size_t>(grid.n));
  double emax = -1.0 / 0.0;
  for (int j = 0; j < grid.n; ++j) {
    const double e = std::cos(grid.node(j) - params.mean_angle) / params.d;
    f[j] = e;
    emax = std::max(emax, e);
  }
  double sum = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    f[j] = std::exp(f[j] - emax);
    sum += f[j];
  }
  const double norm = 1.0 / (sum * grid.weight());
  for (double& v : f) v *= norm;
  return f;
}

double order_parameter_c1(double d, int n) {
  require(d > 0.0, "order_parameter_c1: d must be positive");
  require(n >= 2, "order_parameter_c1: dimension must be >= 2");
  const double tol = 1e-13;
  if (n == 2) {
    // Polar-angle form; the integrand is normalized by exp(-1/d), which
    // cancels in the ratio and avoids overflow for small d.
    const auto weight = [d](double th) { return std::exp((std::cos(th) - 1.0) / d); };
    const double den = integrate_to_tol(weight, 0.0, kPi, tol);
    const double num =
        integrate_to_tol([&](double th) { return std::cos(th) * weight(th); }, 0.0, kPi, tol);
    return num / den;
  }
  // u = cos(theta) substitution; smooth for n >= 3.
  const double p = 0.5 * (n - 3);
  const auto weight = [d, p](double u) {
    return std::exp((u - 1.0) / d) * std::pow(1.0 - u * u, p);
  };
  const double den = integrate_to_tol(weight, -1.0, 1.0, tol);
  const double num = integrate_to_tol([&](double u) { return u * weight(u); }, -1.0, 1.0, tol);
  return num / den;
}

Field2 equilibrium_field(const std::vector<double>& rho, const std::vector<double>& phi,
                         const TorusGrid& xgrid, const AngularGrid& agrid, double d) {
  const int nx = xgrid.total_cells();
  require(static_cast<int>(rho.size()) == nx, "equilibrium_field: rho size mismatch");
  require(static_cast<int>(phi.size()) == nx, "equilibrium_field: phi size mismatch");
  require_finite(rho, "equilibrium_field rho");
  require_finite(phi, "equilibrium_field phi");
  for (double r : rho) require(r > 0.0, "equilibrium_field: rho must be strictly positive");
  Field2 f(nx, agrid.n);
  for (int ix = 0; ix < nx; ++ix) {
    const std::vector<double> m = vmf_density({d, phi[ix]}, agrid);
    double* row = f.row(ix);
    for (int j = 0; j < agrid.n; ++j) row[j] = rho[ix] * m[j];
  }
  return f;
}

}  // namespace sokl
