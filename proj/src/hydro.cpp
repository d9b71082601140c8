#include "sokl/hydro.hpp"

#include <algorithm>
#include <cmath>

#include "sokl/fft.hpp"
#include "sokl/spectral.hpp"

namespace sokl {

namespace {

double wrap_pi(double a) {
  while (a > kPi) a -= kTwoPi;
  while (a <= -kPi) a += kTwoPi;
  return a;
}

// Advective part of the rhs: everything except the exact-diffusion term
// c3 phi_xx. The c3 cross terms 2 c3 (rho_x/rho) phi_x stay here.
SohRhs advective_rhs(const MacroState& st, const Coefficients& co, double rho_floor) {
  const int nx = st.grid.n[0];
  const double L = st.grid.length[0];
  for (double r : st.rho) {
    if (!(r >= rho_floor)) throw std::runtime_error("soh: density below floor");
  }
  std::vector<double> rc(nx);
  for (int i = 0; i < nx; ++i) {
    rc[i] = st.rho[i] * std::cos(st.phi[i]);
  }
  const std::vector<double> drc = spectral_derivative(rc, 1, L);
  const std::vector<double> drho = spectral_derivative(st.rho, 1, L);
  const std::vector<double> dphi = spectral_derivative(st.phi, 1, L);
  SohRhs out;
  out.drho.resize(nx);
  out.dphi.resize(nx);
  for (int i = 0; i < nx; ++i) {
    out.drho[i] = -co.c1 * drc[i];
    out.dphi[i] = -co.c2 * std::cos(st.phi[i]) * dphi[i] +
                  co.d * std::sin(st.phi[i]) * drho[i] / st.rho[i] +
                  2.0 * co.c3 * (drho[i] / st.rho[i]) * dphi[i];
  }
  return out;
}

void diffuse_phi(std::vector<double>& phi, double coeff, double dt, double L) {
  if (coeff == 0.0 || dt == 0.0) return;
  const int n = static_cast<int>(phi.size());
  const Fft& fft = Fft::of_size(n);
  std::vector<std::complex<double>> buf(phi.begin(), phi.end());
  fft.forward(buf.data());
  const double scale = kTwoPi / L;
  for (int j = 0; j < n; ++j) {
    const double k = scale * spectrum_index(j, n);
    buf[j] *= std::exp(-coeff * k * k * dt);
  }
  fft.inverse(buf.data());
  for (int j = 0; j < n; ++j) phi[j] = buf[j].real();
}

}  // namespace

int winding_number(const std::vector<double>& phi) {
  double total = 0.0;
  const int n = static_cast<int>(phi.size());
  for (int i = 0; i < n; ++i) {
    total += wrap_pi(phi[(i + 1) % n] - phi[i]);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

void validate_macro_state(const MacroState& state) {
  require(state.grid.dim == 1, "MacroState: grid must be 1-D");
  const int nx = state.grid.n[0];
  require(static_cast<int>(state.rho.size()) == nx, "MacroState: rho size mismatch");
  require(static_cast<int>(state.phi.size()) == nx, "MacroState: phi size mismatch");
  require_finite(state.rho, "MacroState rho");
  require_finite(state.phi, "MacroState phi");
  for (double r : state.rho) require(r > 0.0, "MacroState: rho must be strictly positive");
  require(winding_number(state.phi) == 0,
          "MacroState: phi must have zero winding around the slab");
}

SohRhs soh_rhs(const MacroState& st, const Coefficients& co, double rho_floor) {
  const int nx = st.grid.n[0];
  const double L = st.grid.length[0];
  require(st.grid.dim == 1, "soh_rhs: grid must be 1-D");
  require(static_cast<int>(st.rho.size()) == nx && static_cast<int>(st.phi.size()) == nx,
          "soh_rhs: size mismatch");
  SohRhs out = advective_rhs(st, co, rho_floor);
  if (co.c3 != 0.0) {
    // Full viscous coupling (c3/rho) Omega_perp . (rho Omega)_xx, minus the
    // cross part already present in the advective rhs, equals c3 phi_xx up to
    // spectral roundoff; assemble it from the original form for fidelity.
    std::vector<double> rc(nx), rs(nx);
    for (int i = 0; i < nx; ++i) {
      rc[i] = st.rho[i] * std::cos(st.phi[i]);
      rs[i] = st.rho[i] * std::sin(st.phi[i]);
    }
    const std::vector<double> d2rc = spectral_derivative(rc, 2, L);
    const std::vector<double> d2rs = spectral_derivative(rs, 2, L);
    const std::vector<double> drho = spectral_derivative(st.rho, 1, L);
    const std::vector<double> dphi = spectral_derivative(st.phi, 1, L);
    for (int i = 0; i < nx; ++i) {
      const double perp = -std::sin(st.phi[i]) * d2rc[i] + std::cos(st.phi[i]) * d2rs[i];
      // Replace the cross-term approximation by the exact original form:
      // subtract what advective_rhs added, add (c3/rho) * perp.
      out.dphi[i] += co.c3 / st.rho[i] * perp -
                     2.0 * co.c3 * (drho[i] / st.rho[i]) * dphi[i];
    }
  }
  return out;
}

double soh_max_wavespeed(const MacroState& st, const Coefficients& co) {
  double worst = 0.0;
  for (std::size_t i = 0; i < st.rho.size(); ++i) {
    const double c = std::cos(st.phi[i]);
    const double s = std::sin(st.phi[i]);
    const double disc = sqr((co.c1 - co.c2) * c) + 4.0 * co.d * co.c1 * s * s;
    const double root = std::sqrt(std::max(disc, 0.0));
    const double lp = 0.5 * ((co.c1 + co.c2) * c + root);
    const double lm = 0.5 * ((co.c1 + co.c2) * c - root);
    worst = std::max({worst, std::abs(lp), std::abs(lm)});
  }
  return worst;
}

double soh_stable_dt(const MacroState& st, const Coefficients& co, double cfl_safety) {
  require(cfl_safety > 0.0 && cfl_safety <= 1.0, "soh_stable_dt: safety in (0, 1]");
  const double speed = std::max(soh_max_wavespeed(st, co), 1e-12);
  return cfl_safety * st.grid.spacing(0) / speed;
}

void soh_step(MacroState& st, const Coefficients& co, double dt, double rho_floor) {
  const double L = st.grid.length[0];
  const int nx = st.grid.n[0];
  diffuse_phi(st.phi, co.c3, 0.5 * dt, L);
  // Classical RK4 for the advective part: its stability region covers the
  // imaginary axis up to 2*sqrt(2), so undamped spectral transport modes stay
  // bounded over long runs (a midpoint stage grows them near the CFL limit).
  MacroState stage = st;
  const auto set_stage = [&](const SohRhs& k, double c) {
    for (int i = 0; i < nx; ++i) {
      stage.rho[i] = st.rho[i] + c * dt * k.drho[i];
      stage.phi[i] = st.phi[i] + c * dt * k.dphi[i];
    }
  };
  const SohRhs k1 = advective_rhs(st, co, rho_floor);
  set_stage(k1, 0.5);
  const SohRhs k2 = advective_rhs(stage, co, rho_floor);
  set_stage(k2, 0.5);
  const SohRhs k3 = advective_rhs(stage, co, rho_floor);
  set_stage(k3, 1.0);
  const SohRhs k4 = advective_rhs(stage, co, rho_floor);
  for (int i = 0; i < nx; ++i) {
    st.rho[i] += dt / 6.0 * (k1.drho[i] + 2.0 * k2.drho[i] + 2.0 * k3.drho[i] + k4.drho[i]);
    st.phi[i] += dt / 6.0 * (k1.dphi[i] + 2.0 * k2.dphi[i] + 2.0 * k3.dphi[i] + k4.dphi[i]);
  }
  diffuse_phi(st.phi, co.c3, 0.5 * dt, L);
}

SohRunResult run_soh(const MacroState& init, const Coefficients& co, double T, double dt,
                     int n_samples, double rho_floor) {
  validate_macro_state(init);
  require(T >= 0.0, "run_soh: T must be nonnegative");
  require(n_samples >= 2, "run_soh: need at least 2 samples");
  SohRunResult out;
  out.state = init;
  const double w = init.grid.cell_volume();

  auto record_monitor = [&](double t) {
    SohMonitorRow row;
    row.t = t;
    double mass = 0.0, mn = out.state.rho[0];
    for (double r : out.state.rho) {
      mass += r;
      mn = std::min(mn, r);
    }
    row.mass = mass * w;
    row.min_rho = mn;
    const std::vector<double> dphi =
        spectral_derivative(out.state.phi, 1, init.grid.length[0]);
    double mx = 0.0;
    for (double v : dphi) mx = std::max(mx, std::abs(v));
    row.max_dphi = mx;
    out.monitors.push_back(row);
  };

  record_monitor(0.0);
  out.snapshots.push_back(out.state);
  out.snapshot_times.push_back(0.0);
  if (T == 0.0) {
    out.completed = true;
    return out;
  }

  const double sample_dt = T / (n_samples - 1);
  double dt_max = (dt > 0.0) ? dt : soh_stable_dt(init, co);
  const int per_sample = std::max(1, static_cast<int>(std::ceil(sample_dt / dt_max)));
  const double h = sample_dt / per_sample;

  double t = 0.0;
  for (int s = 1; s < n_samples; ++s) {
    for (int m = 0; m < per_sample; ++m) {
      try {
        soh_step(out.state, co, h, rho_floor);
      } catch (const std::runtime_error& e) {
        out.halt_reason = e.what();
        return out;
      }
      t += h;
      if (!all_finite(out.state.rho) || !all_finite(out.state.phi)) {
        out.halt_reason = "non-finite state (blow-up)";
        return out;
      }
      record_monitor(t);
    }
    out.snapshots.push_back(out.state);
    out.snapshot_times.push_back(s * sample_dt);
  }
  out.completed = true;
  return out;
}

}  // namespace sokl
