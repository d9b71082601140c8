#pragma once

#include <string>
#include <vector>

#include "sokl/equilibria.hpp"
#include "sokl/grids.hpp"

namespace sokl {

/// Macroscopic state on a 1-D periodic slab: density rho > 0 and direction
/// angle phi per cell. phi must have zero winding around the slab (the
/// spectral stepper treats it as a periodic scalar), which is validated on
/// construction.
struct MacroState {
  TorusGrid grid = TorusGrid::line(8, 1.0);
  std::vector<double> rho;
  std::vector<double> phi;
};

/// Throws if sizes mismatch, values are non-finite, rho is not positive, or
/// the winding number of phi (sum of wrapped increments / 2 pi) is nonzero.
void validate_macro_state(const MacroState& state);

/// Winding number of an angle sample sequence around the periodic slab.
int winding_number(const std::vector<double>& phi);

struct SohRhs {
  std::vector<double> drho;
  std::vector<double> dphi;
};

/// Right-hand side of the macroscopic system
///   rho_t = -c1 (rho cos phi)_x
///   phi_t = -c2 cos(phi) phi_x + d sin(phi) rho_x / rho
///           + (c3 / rho) Omega_perp . (rho Omega)_xx
/// evaluated spectrally. Throws (runtime_error) if min rho < rho_floor.
SohRhs soh_rhs(const MacroState& state, const Coefficients& co, double rho_floor = 1e-6);

/// Largest characteristic speed of the first-order part over the slab.
double soh_max_wavespeed(const MacroState& state, const Coefficients& co);

/// Stable step size: advective CFL limit (the diffusion part is integrated
/// exactly and does not restrict dt).
double soh_stable_dt(const MacroState& state, const Coefficients& co, double cfl_safety = 0.4);

///// One step of the splitting scheme: exact Fourier integration of the
/// c3 phi_xx diffusion over dt/2, classical Runge-Kutta for the remaining
/// terms over dt, diffusion again over dt/2. Second order overall (the
/// splitting error dominates); conserves the rho mean to roundoff.
void soh_step(MacroState& state, const Coefficients& co, double dt, double rho_floor = 1e-6);

struct SohMonitorRow {
  double t = 0.0;
  double mass = 0.0;
  double min_rho = 0.0;
  double max_dphi = 0.0;  // max |phi_x|
};

struct SohRunResult {
  MacroState state;
  std::vector<SohMonitorRow> monitors;
  std::vector<MacroState> snapshots;
  std::vector<double> snapshot_times;
  bool completed = false;
  std::string halt_reason;
};

/// Integrates to time T, sampling monitors every step and storing snapshots
/// at n_samples evenly spaced times (including 0 and T). dt = 0 selects the
/// stable step; the step is then shrunk to divide the sample interval. Halts
/// (completed = false, with a reason) on non-finite values or density below
/// the floor instead of propagating garbage.
SohRunResult run_soh(const MacroState& init, const Coefficients& co, double T, double dt = 0.0,
                     int n_samples = 11, double rho_floor = 1e-6);

}  // namespace sokl
