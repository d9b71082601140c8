#include "sokl/collision.hpp"

#include <cmath>
#include <random>

#include "sokl/equilibria.hpp"
#include "sokl/spectral.hpp"

namespace sokl {

namespace {

// Periodic spectral differentiation matrix for an even node count
// (equivalent to the Fourier derivative with the alternating bin zeroed);
// exactly skew-symmetric.
Eigen::MatrixXd differentiation_matrix(int n) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = i - j;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = 0.5 * sign / std::tan(0.5 * kTwoPi * k / n);
    }
  }
  return D;
}

}  // namespace

LinearizedOperator::LinearizedOperator(const AngularGrid& grid, double d)
    : grid_(grid), d_(d) {
  require(d > 0.0, "LinearizedOperator: d must be positive");
  const int n = grid_.n;
  M0_ = vmf_density({d, 0.0}, grid_);
  sqrtM0_.resize(M0_.size());
  for (std::size_t i = 0; i < M0_.size(); ++i) sqrtM0_[i] = std::sqrt(M0_[i]);

  D1_ = differentiation_matrix(n);
  Eigen::VectorXd M = Eigen::Map<const Eigen::VectorXd>(M0_.data(), n);
  const Eigen::MatrixXd B = D1_.transpose() * M.asDiagonal() * D1_;
  A_ = M.cwiseInverse().asDiagonal() * B;
  Eigen::VectorXd invSqrt = M.cwiseSqrt().cwiseInverse();
  Asym_ = invSqrt.asDiagonal() * B * invSqrt.asDiagonal();
  Asym_ = 0.5 * (Asym_ + Asym_.transpose().eval());

  // Bordered system pinning the two discrete null directions (constants and
  // the alternating mode) of the symmetrized operator.
  Eigen::VectorXd n1(n), n2(n);
  for (int j = 0; j < n; ++j) {
    n1(j) = sqrtM0_[j];
    n2(j) = (j % 2 == 0) ? sqrtM0_[j] : -sqrtM0_[j];
  }
  n1.normalize();
  n2.normalize();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n + 2, n + 2);
  big.topLeftCorner(n, n) = Asym_;
  big.block(0, n, n, 1) = n1;
  big.block(0, n + 1, n, 1) = n2;
  big.block(n, 0, 1, n) = n1.transpose();
  big.block(n + 1, 0, 1, n) = n2.transpose();
  bordered_.compute(big);
}

std::vector<double> LinearizedOperator::apply_L0(const std::vector<double>& f) const {
  const int n = grid_.n;
  require(static_cast<int>(f.size()) == n, "apply_L0: size mismatch");
  require_finite(f, "apply_L0");
  Eigen::VectorXd out = A_ * Eigen::Map<const Eigen::VectorXd>(f.data(), n);
  return std::vector<double>(out.data(), out.data() + n);
}

double LinearizedOperator::weighted_inner(const std::vector<double>& a,
                                          const std::vector<double>& b) const {
  const int n = grid_.n;
  require(static_cast<int>(a.size()) == n && static_cast<int>(b.size()) == n,
          "weighted_inner: size mismatch");
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += M0_[j] * a[j] * b[j];
  return s * grid_.weight();
}

std::vector<double> LinearizedOperator::invert_L0(const std::vector<double>& rhs,
                                                  InversionReport* report) const {
  const int n = grid_.n;
  require(static_cast<int>(rhs.size()) == n, "invert_L0: size mismatch");
  require_finite(rhs, "invert_L0");
  // Subtract the weighted mean (solvability defect); the alternating
  // component is absorbed by the bordered multiplier.
  double mean = 0.0;
  for (int j = 0; j < n; ++j) mean += M0_[j] * rhs[j];
  mean *= grid_.weight();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 2);
  for (int j = 0; j < n; ++j) b(j) = sqrtM0_[j] * (rhs[j] - mean);
  const Eigen::VectorXd sol = bordered_.solve(b);
  if (report) {
    report->removed_mean = mean;
    report->removed_alternating = sol(n + 1);
  }
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) u[j] = sol(j) / sqrtM0_[j];
  return u;
}

const Eigen::LLT<Eigen::MatrixXd>& LinearizedOperator::implicit_factor(double lambda) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = implicit_cache_.find(lambda);
  if (it == implicit_cache_.end()) {
    const int n = grid_.n;
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n) + lambda * Asym_;
    auto llt = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(S);
    require(llt->info() == Eigen::Success, "implicit_solve: factorization failed");
    it = implicit_cache_.emplace(lambda, std::move(llt)).first;
  }
  return *it->second;
}

void LinearizedOperator::warm_implicit(double lambda) const {
  require(lambda >= 0.0, "implicit_solve: lambda must be nonnegative");
  implicit_factor(lambda);
}

std::vector<double> LinearizedOperator::implicit_solve(double lambda,
                                                       const std::vector<double>& rhs) const {
  const int n = grid_.n;
  require(lambda >= 0.0, "implicit_solve: lambda must be nonnegative");
  require(static_cast<int>(rhs.size()) == n, "implicit_solve: size mismatch");
  std::vector<double> out = rhs;
  implicit_solve_inplace(lambda, out.data());
  return out;
}

void LinearizedOperator::implicit_solve_inplace(double lambda, double* row) const {
  const int n = grid_.n;
  const auto& llt = implicit_factor(lambda);
  Eigen::VectorXd z(n);
  for (int j = 0; j < n; ++j) z(j) = sqrtM0_[j] * row[j];
  z = llt.solve(z);
  for (int j = 0; j < n; ++j) row[j] = z(j) / sqrtM0_[j];
}

std::vector<double> apply_Q(const AngularGrid& grid, const std::vector<double>& f, double d,
                            double j_floor) {
  require(d > 0.0, "apply_Q: d must be positive");
  const Moments m = moment_integrals(grid, f);
  const double jmag = std::hypot(m.current[0], m.current[1]);
  std::vector<double> out = spectral_derivative(f, 2);
  for (double& v : out) v *= d;
  if (jmag >= j_floor) {
    const double phi = std::atan2(m.current[1], m.current[0]);
    std::vector<double> flux(f.size());
    for (int j = 0; j < grid.n; ++j) flux[j] = std::sin(grid.node(j) - phi) * f[j];
    const std::vector<double> dflux = spectral_derivative(flux, 1);
    for (int j = 0; j < grid.n; ++j) out[j] += dflux[j];
  }
  return out;
}

double poincare_constant_estimate(const AngularGrid& grid, double d, int trials,
                                  std::uint64_t seed) {
  require(trials >= 10, "poincare_constant_estimate: need at least 10 trials");
  LinearizedOperator op(grid, d);
  const int n = grid.n;
  const int max_mode = std::min(16, n / 3);
  require(max_mode >= 1, "poincare_constant_estimate: grid too coarse");
  double best = 1.0 / 0.0;
  for (int t = 0; t < trials; ++t) {
    // Coefficients depend only on (seed, t); the same trial function is
    // reproduced on any resolution.
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (t + 1)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> a(max_mode + 1), b(max_mode + 1);
    for (int mmode = 1; mmode <= max_mode; ++mmode) {
      const double decay = 1.0 / (mmode * mmode);
      a[mmode] = normal(rng) * decay;
      b[mmode] = normal(rng) * decay;
    }
    std::vector<double> u(static_cast<std::size_t>(n), 0.0), du(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      const double al = grid.node(j);
      for (int mmode = 1; mmode <= max_mode; ++mmode) {
        u[j] += a[mmode] * std::cos(mmode * al) + b[mmode] * std::sin(mmode * al);
        du[j] += mmode * (-a[mmode] * std::sin(mmode * al) + b[mmode] * std::cos(mmode * al));
      }
    }
    // Remove the weighted mean so the quotient measures the gap.
    std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    const double mean = op.weighted_inner(u, ones);
    for (double& v : u) v -= mean;
    const double denom = op.weighted_inner(u, u);
    if (denom < 1e-14) continue;
    const double ratio = op.weighted_inner(du, du) / denom;
    best = std::min(best, ratio);
  }
  require(std::isfinite(best), "poincare_constant_estimate: no valid trial");
  return best;
}

}  // namespace sokl
