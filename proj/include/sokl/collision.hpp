#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/LU>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "sokl/grids.hpp"

namespace sokl {

/// Magnitude below which the mean current is treated as zero and the
/// alignment direction as undefined.
inline constexpr double kCurrentFloor = 1e-12;

/// Report of the components removed while inverting the angular diffusion
/// operator: the weighted-mean part (solvability defect of the right-hand
/// side) and the alternating-mode part (a discrete null direction of the
/// divergence-form matrix).
struct InversionReport {
  double removed_mean = 0.0;
  double removed_alternating = 0.0;
};

/// Angular diffusion operator around a fixed mean direction at angle 0,
///   L0 f = -(1/M0) d/dalpha (M0 df/dalpha),
/// assembled in divergence form from the skew-symmetric spectral
/// differentiation matrix, so that M0-weighted self-adjointness, positive
/// semidefiniteness and conservation of the M0-weighted mean hold exactly in
/// floating point (up to roundoff). M0 is the unit-mass von Mises-Fisher
/// density with mean angle 0.
class LinearizedOperator {
 public:
  LinearizedOperator(const AngularGrid& grid, double d);

  const AngularGrid& grid() const { return grid_; }
  double d() const { return d_; }
  const std::vector<double>& M0() const { return M0_; }

  /// Matrix-vector product L0 * f.
  std::vector<double> apply_L0(const std::vector<double>& f) const;

  /// M0-weighted inner product  sum_j w_j M0_j a_j b_j.
  double weighted_inner(const std::vector<double>& a, const std::vector<double>& b) const;

  /// Solves L0 u = rhs on the orthogonal complement of the null space. The
  /// weighted mean of rhs (a solvability defect) is subtracted first and
  /// reported; the solution has zero M0-weighted mean.
  std::vector<double> invert_L0(const std::vector<double>& rhs,
                                InversionReport* report = nullptr) const;

  /// Solves (I + lambda L0) u = rhs, lambda >= 0. The symmetrized
  /// factorization is cached per lambda, so repeated solves (one per spatial
  /// cell per step) cost one triangular pair each.
  std::vector<double> implicit_solve(double lambda, const std::vector<double>& rhs) const;

  /// In-place implicit solve on a raw row; thread safe after warm_implicit.
  void implicit_solve_inplace(double lambda, double* row) const;

  /// Pre-factorizes the implicit solve for the given lambda.
  void warm_implicit(double lambda) const;

 private:
  const Eigen::LLT<Eigen::MatrixXd>& implicit_factor(double lambda) const;

  AngularGrid grid_;
  double d_;
  std::vector<double> M0_, sqrtM0_;
  Eigen::MatrixXd D1_;   // spectral differentiation matrix (exactly skew-symmetric)
  Eigen::MatrixXd A_;    // L0 in divergence form
  Eigen::MatrixXd Asym_; // diag(1/sqrt(M0)) * D1^T diag(M0) D1 * diag(1/sqrt(M0))
  Eigen::PartialPivLU<Eigen::MatrixXd> bordered_;  // null-space-pinned inversion
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>>> implicit_cache_;
};

/// Alignment-diffusion collision operator
///   Q(f) = d/dalpha [ sin(alpha - phi_f) f ] + d * d^2/dalpha^2 f,
/// where phi_f is the angle of the mean current of f. When the current
/// magnitude is below the floor the alignment term is dropped.
std::vector<double> apply_Q(const AngularGrid& grid, const std::vector<double>& f, double d,
                            double j_floor = kCurrentFloor);

/// Minimum M0-weighted Rayleigh quotient |u'|^2_M0 / |u|^2_M0 over random
/// band-limited mean-free trial functions. The trial coefficients depend only
/// on (seed, trial index), not on the grid, so estimates are comparable
/// across resolutions.
double poincare_constant_estimate(const AngularGrid& grid, double d, int trials = 100,
                                  std::uint64_t seed = 12345);

}  // namespace sokl
