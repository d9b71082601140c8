#include "sokl/gci.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace sokl {

namespace {

// Legendre values and first two derivatives at s by the standard recurrences;
// the second derivative uses (1-s^2) P'' = 2 s P' - k (k+1) P and therefore
// needs |s| < 1.
void legendre_table(int kmax, double s, std::vector<double>& P, std::vector<double>& dP,
                    std::vector<double>* ddP) {
  P.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
  dP.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
  if (ddP) ddP->assign(static_cast<std::size_t>(kmax) + 1, 0.0);
  P[0] = 1.0;
  if (kmax >= 1) P[1] = s;
  for (int k = 1; k < kmax; ++k) {
    P[k + 1] = ((2.0 * k + 1.0) * s * P[k] - k * P[k - 1]) / (k + 1.0);
  }
  const double om = 1.0 - s * s;
  for (int k = 1; k <= kmax; ++k) {
    dP[k] = k * (P[k - 1] - s * P[k]) / om;
  }
  if (ddP) {
    for (int k = 0; k <= kmax; ++k) {
      (*ddP)[k] = (2.0 * s * dP[k] - k * (k + 1.0) * P[k]) / om;
    }
  }
}

double basis_value(const std::vector<double>& P, int k) { return P[k] - P[k + 2]; }

}  // namespace

double GciSolution::evaluate_g(double theta) const {
  require(theta >= 0.0 && theta <= kPi, "evaluate_g: theta outside [0, pi]");
  const int K = static_cast<int>(coeff.size());
  const double s = std::clamp(2.0 * theta / kPi - 1.0, -1.0, 1.0);
  // Plain recurrence for values only; valid at the endpoints too.
  std::vector<double> P(static_cast<std::size_t>(K) + 2, 0.0);
  P[0] = 1.0;
  if (K + 1 >= 1) P[1] = s;
  for (int k = 1; k < K + 1; ++k) {
    P[k + 1] = ((2.0 * k + 1.0) * s * P[k] - k * P[k - 1]) / (k + 1.0);
  }
  double val = 0.0;
  for (int k = 0; k < K; ++k) val += coeff[k] * (P[k] - P[k + 2]);
  return val;
}

double GciSolution::evaluate_h(double theta) const {
  require(theta > 0.0 && theta < kPi, "evaluate_h: theta must lie strictly inside (0, pi)");
  return evaluate_g(theta) / std::sin(theta);
}

GciSolution solve_gci_ode(double d, int n_dim, const ThetaGrid& grid) {
  require(d > 0.0, "solve_gci_ode: d must be positive");
  require(n_dim >= 2, "solve_gci_ode: dimension must be >= 2");
  require(grid.n >= 64, "solve_gci_ode: need at least 64 polar nodes");

  const int m = grid.n;
  const int K = std::max(16, m / 2);
  require(K + 2 <= m, "solve_gci_ode: basis larger than quadrature supports");

  // Node data. The weight is normalized by exp(-1/d) to avoid overflow; the
  // normalization cancels in g and in the coefficient ratios.
  std::vector<double> wq(m), sinq(m), cosq(m);
  for (int q = 0; q < m; ++q) {
    const double th = grid.theta[q];
    sinq[q] = std::sin(th);
    cosq[q] = std::cos(th);
    wq[q] = std::pow(sinq[q], n_dim - 2) * std::exp((cosq[q] - 1.0) / d);
  }

  // Basis tables at the quadrature nodes.
  Eigen::MatrixXd Phi(m, K), dPhi(m, K), ddPhi(m, K);
  const double jac = 2.0 / kPi;  // d s / d theta
  std::vector<double> P, dP, ddP;
  for (int q = 0; q < m; ++q) {
    const double s = 2.0 * grid.theta[q] / kPi - 1.0;
    legendre_table(K + 1, s, P, dP, &ddP);
    for (int k = 0; k < K; ++k) {
      Phi(q, k) = basis_value(P, k);
      dPhi(q, k) = jac * (dP[k] - dP[k + 2]);
      ddPhi(q, k) = jac * jac * (ddP[k] - ddP[k + 2]);
    }
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, K);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
  for (int q = 0; q < m; ++q) {
    const double wquad = grid.w[q] * wq[q];
    const double sing = (n_dim > 2) ? (n_dim - 2.0) / (sinq[q] * sinq[q]) : 0.0;
    for (int j = 0; j < K; ++j) {
      b(j) += wquad * sinq[q] * Phi(q, j);
      for (int k = j; k < K; ++k) {
        A(j, k) += wquad * (dPhi(q, j) * dPhi(q, k) + sing * Phi(q, j) * Phi(q, k));
      }
    }
  }
  A = A.selfadjointView<Eigen::Upper>();

  // Symmetric equilibration, then a thresholded eigen-solve. At strong
  // concentration the weight sees only a short piece of the interval and
  // high-order modes become nearly collinear there; directions below the
  // threshold carry no weighted energy and are dropped instead of breaking
  // the factorization.
  Eigen::VectorXd scale = A.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (int j = 0; j < K; ++j) scale(j) = (scale(j) > 0.0) ? 1.0 / scale(j) : 1.0;
  const Eigen::MatrixXd As = scale.asDiagonal() * A * scale.asDiagonal();
  const Eigen::VectorXd bs = scale.asDiagonal() * b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(As);
  require(eig.info() == Eigen::Success, "solve_gci_ode: stiffness eigendecomposition failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double cutoff = std::max(ev.maxCoeff(), 0.0) * 1e-14;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(K);
  for (int j = 0; j < K; ++j) inv(j) = (ev(j) > cutoff) ? 1.0 / ev(j) : 0.0;
  const Eigen::VectorXd cs =
      eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * bs));
  const Eigen::VectorXd c = scale.asDiagonal() * cs;

  GciSolution sol;
  sol.n_dim = n_dim;
  sol.d = d;
  sol.grid = grid;
  sol.coeff.assign(c.data(), c.data() + K);
  sol.g.resize(m);
  sol.dg.resize(m);
  sol.h.resize(m);

  // Strong-form residual: L g = -g'' - (w'/w) g' + (n-2) g / sin^2,
  // w'/w = (n-2) cot - sin/d.
  double res2 = 0.0, rhs2 = 0.0;
  for (int q = 0; q < m; ++q) {
    double g = 0.0, dg = 0.0, ddg = 0.0;
    for (int k = 0; k < K; ++k) {
      g += c(k) * Phi(q, k);
      dg += c(k) * dPhi(q, k);
      ddg += c(k) * ddPhi(q, k);
    }
    sol.g[q] = g;
    sol.dg[q] = dg;
    sol.h[q] = g / sinq[q];
    const double wlog = ((n_dim - 2.0) * cosq[q] / sinq[q]) - sinq[q] / d;
    const double sing = (n_dim > 2) ? (n_dim - 2.0) * g / (sinq[q] * sinq[q]) : 0.0;
    const double lg = -ddg - wlog * dg + sing;
    const double wquad = grid.w[q] * wq[q];
    res2 += wquad * sqr(lg - sinq[q]);
    rhs2 += wquad * sqr(sinq[q]);
  }
  sol.residual_weighted = std::sqrt(res2);
  sol.rhs_norm_weighted = std::sqrt(rhs2);
  return sol;
}

GciSolution solve_gci_ode(double d, int n_dim, int resolution) {
  return solve_gci_ode(d, n_dim, ThetaGrid::gauss(resolution));
}

double coefficient_c2(const GciSolution& sol) {
  const int m = sol.grid.n;
  double num = 0.0, den = 0.0;
  for (int q = 0; q < m; ++q) {
    const double th = sol.grid.theta[q];
    const double sinq = std::sin(th);
    const double cosq = std::cos(th);
    const double w = std::pow(sinq, sol.n_dim - 2) * std::exp((cosq - 1.0) / sol.d);
    const double common = sol.grid.w[q] * w * sinq * sol.g[q];
    num += cosq * common;
    den += common;
  }
  if (std::abs(den) < 1e-12) {
    throw std::runtime_error("coefficient_c2: degenerate normalization (|denominator| < 1e-12)");
  }
  return num / den;
}

double coefficient_c3(double k, double eta0, double d, int n_dim, double c2) {
  require(d > 0.0, "coefficient_c3: d must be positive");
  require(n_dim >= 2, "coefficient_c3: dimension must be >= 2");
  return eta0 * k * ((n_dim - 1.0) * d + c2);
}

Coefficients compute_coefficients(double d, int n_dim, double k, double eta0, int resolution) {
  Coefficients co;
  co.n = n_dim;
  co.d = d;
  co.k = k;
  co.eta0 = eta0;
  co.c1 = order_parameter_c1(d, n_dim);
  const GciSolution sol = solve_gci_ode(d, n_dim, resolution);
  co.c2 = coefficient_c2(sol);
  co.c3 = coefficient_c3(k, eta0, d, n_dim, co.c2);
  return co;
}

}  // namespace sokl
