#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sokl/collision.hpp"
#include "sokl/equilibria.hpp"
#include "sokl/grids.hpp"
#include "sokl/parallel.hpp"

namespace sokl {

/// Nonlinear: alignment direction and viscous drift follow the evolving
/// solution. Linearized: both are frozen at the initial state's macros.
enum class SokMode { Nonlinear, Linearized };

/// Kinetic phase-space state: f(x, alpha) samples with model parameters.
struct KineticField {
  TorusGrid xgrid = TorusGrid::line(8, 1.0);
  AngularGrid agrid = AngularGrid(8);
  Field2 f;
  double eps = 1.0;
  double d = 1.0;
  double eta0 = 0.0;
  double k = 0.0;
  SokMode mode = SokMode::Nonlinear;
};

void validate_kinetic_field(const KineticField& field);

struct SokStepperConfig {
  double dt = 0.0;         // 0 selects the stability-limited step (default_dt)
  double cfl_safety = 0.5;
  double j_floor = kCurrentFloor;
  Exec exec = Exec::Serial;
};

/// Cell-wise macroscopic fields derived from f. Where the current magnitude
/// is below the floor, aligned = 0 and phi / the drift are zeroed. The drift
/// (Dx, Dy) = dmag * Omega_perp is orthogonal to Omega by construction; it is
/// zero when eta0 = 0 or k = 0.
struct MacroFields {
  std::vector<double> rho;
  std::vector<double> jx, jy;
  std::vector<double> jmag;
  std::vector<double> phi;
  std::vector<std::uint8_t> aligned;
  std::vector<double> dmag;  // drift magnitude along Omega_perp
  std::vector<double> Dx, Dy;
};

MacroFields compute_macros(const KineticField& field, double j_floor = kCurrentFloor);

/// Strang-split integrator: half transport, half angular drift, full implicit
/// collision, half drift, half transport. Transport is integrated exactly in
/// Fourier space per angular node; the collision solve reuses one
/// factorization per (dt, eps) pair, so its cost does not depend on eps.
class SokStepper {
 public:
  SokStepper(const KineticField& prototype, const SokStepperConfig& config);

  void step(KineticField& field, double dt);
  /// Largest stable step for fields shaped like `field`: the transport CFL
  /// cfl_safety * min_spacing capped by the parabolic limit of the mean-field
  /// drift (its coefficient carries a Laplacian of the current). Homogeneous
  /// fields relax on the collision scale instead.
  double default_dt(const KineticField& field) const;
  /// Replaces the frozen macroscopic fields (linearized mode only), so a run
  /// can follow a prescribed macroscopic trajectory in time.
  void refreeze(const MacroFields& m);
  const SokStepperConfig& config() const { return config_; }
  const LinearizedOperator& op() const { return *op_; }

 private:
  void transport(KineticField& field, double dt) const;
  void angular_drift(KineticField& field, const MacroFields& m, double dt) const;
  void collision(KineticField& field, const MacroFields& m, double dt) const;

  SokStepperConfig config_;
  std::shared_ptr<LinearizedOperator> op_;
  bool frozen_ = false;
  MacroFields frozen_macros_;
};

/// Single step with a freshly prepared stepper (convenience entry point).
void sok_step(KineticField& field, const SokStepperConfig& config, double dt);

struct SokMonitorRow {
  double t = 0.0;
  double mass = 0.0;
  double jmag = 0.0;         // magnitude of the global mean current
  double dissipation = 0.0;  // collision pairing <Q(f), f/M_Omega>; <= 0 up to discretization
  double dist_eq = 0.0;      // L2 distance to the cell-wise aligned equilibrium
};

struct SokRunResult {
  KineticField field;
  std::vector<SokMonitorRow> monitors;
  std::vector<Field2> snapshots;
  std::vector<double> snapshot_times;
  bool completed = false;
  std::string halt_reason;
};

/// Integrates to time T with snapshots at n_samples evenly spaced times
/// (including 0 and T). Aborts (completed = false) if the state stops being
/// finite. T = 0 returns the initial state unchanged.
SokRunResult run_sok(const KineticField& init, const SokStepperConfig& config, double T,
                     int n_samples = 6, bool keep_snapshots = true);

// --- field calculus helpers (shared with the expansion diagnostics) --------

/// Angular derivative along rows (order 1 or 2).
Field2 field_da(const Field2& f, int order = 1);

/// Spatial derivative along the given axis (order 1 or 2).
Field2 field_dx(const Field2& f, const TorusGrid& grid, int axis = 0, int order = 1);

/// Spatial Laplacian of per-cell samples (vector over cells).
std::vector<double> cell_laplacian(const std::vector<double>& u, const TorusGrid& grid);

}  // namespace sokl
