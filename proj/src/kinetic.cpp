#include "sokl/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "sokl/fft.hpp"
#include "sokl/spectral.hpp"

namespace sokl {

namespace {

// Applies op to each line of `f` along spatial axis `axis` (complex
// spectrum in, same length out). Used for transport phases and derivatives.
template <class Op>
void for_each_x_line(Field2& f, const TorusGrid& grid, int axis, Exec exec, Op&& op) {
  const int na = f.na;
  const int n0 = grid.n[0];
  const int n1 = grid.dim == 2 ? grid.n[1] : 1;
  const int len = grid.n[axis];
  const Fft& fft = Fft::of_size(len);
  if (axis == 0) {
    const std::ptrdiff_t lines = static_cast<std::ptrdiff_t>(n1) * na;
    parallel_for(exec, lines, [&](std::ptrdiff_t line) {
      const int i1 = static_cast<int>(line / na);
      const int ia = static_cast<int>(line % na);
      std::vector<std::complex<double>> buf(len);
      for (int i0 = 0; i0 < len; ++i0) {
        buf[i0] = f.v[static_cast<std::size_t>(i0 * n1 + i1) * na + ia];
      }
      fft.forward(buf.data());
      op(buf.data(), len, ia);
      fft.inverse(buf.data());
      for (int i0 = 0; i0 < len; ++i0) {
        f.v[static_cast<std::size_t>(i0 * n1 + i1) * na + ia] = buf[i0].real();
      }
    });
  } else {
    const std::ptrdiff_t lines = static_cast<std::ptrdiff_t>(n0) * na;
    parallel_for(exec, lines, [&](std::ptrdiff_t line) {
      const int i0 = static_cast<int>(line / na);
      const int ia = static_cast<int>(line % na);
      std::vector<std::complex<double>> buf(len);
      for (int i1 = 0; i1 < len; ++i1) {
        buf[i1] = f.v[static_cast<std::size_t>(i0 * n1 + i1) * na + ia];
      }
      fft.forward(buf.data());
      op(buf.data(), len, ia);
      fft.inverse(buf.data());
      for (int i1 = 0; i1 < len; ++i1) {
        f.v[static_cast<std::size_t>(i0 * n1 + i1) * na + ia] = buf[i1].real();
      }
    });
  }
}

}  // namespace

void validate_kinetic_field(const KineticField& field) {
  require(field.f.nx == field.xgrid.total_cells() && field.f.na == field.agrid.n,
          "KineticField: sample shape does not match the grids");
  require(field.eps > 0.0, "KineticField: eps must be positive");
  require(field.d > 0.0, "KineticField: d must be positive");
  require(field.eta0 >= 0.0, "KineticField: eta0 must be nonnegative");
  require_finite(field.f.v, "KineticField samples");
}

MacroFields compute_macros(const KineticField& field, double j_floor) {
  validate_kinetic_field(field);
  const int nx = field.f.nx;
  const int na = field.f.na;
  MacroFields m;
  m.rho.resize(nx);
  m.jx.resize(nx);
  m.jy.resize(nx);
  m.jmag.resize(nx);
  m.phi.assign(nx, 0.0);
  m.aligned.assign(nx, 0);
  m.dmag.assign(nx, 0.0);
  m.Dx.assign(nx, 0.0);
  m.Dy.assign(nx, 0.0);

  const double w = field.agrid.weight();
  for (int ix = 0; ix < nx; ++ix) {
    const double* row = field.f.row(ix);
    double rho = 0.0, jx = 0.0, jy = 0.0;
    for (int j = 0; j < na; ++j) {
      const auto om = field.agrid.omega(j);
      rho += row[j];
      jx += om[0] * row[j];
      jy += om[1] * row[j];
    }
    m.rho[ix] = rho * w;
    m.jx[ix] = jx * w;
    m.jy[ix] = jy * w;
    m.jmag[ix] = std::hypot(m.jx[ix], m.jy[ix]);
    if (m.jmag[ix] >= j_floor) {
      m.aligned[ix] = 1;
      m.phi[ix] = std::atan2(m.jy[ix], m.jx[ix]);
    }
  }

  if (field.eta0 != 0.0 && field.k != 0.0 && field.xgrid.total_cells() > 1) {
    const std::vector<double> ljx = cell_laplacian(m.jx, field.xgrid);
    const std::vector<double> ljy = cell_laplacian(m.jy, field.xgrid);
    for (int ix = 0; ix < nx; ++ix) {
      if (!m.aligned[ix]) continue;
      const double px = -std::sin(m.phi[ix]);
      const double py = std::cos(m.phi[ix]);
      // dmag = k (Omega_perp . lap j) / |j|; D = dmag * Omega_perp keeps
      // Omega . D = 0 exactly.
      m.dmag[ix] = field.k * (px * ljx[ix] + py * ljy[ix]) / m.jmag[ix];
      m.Dx[ix] = m.dmag[ix] * px;
      m.Dy[ix] = m.dmag[ix] * py;
    }
  }
  return m;
}

SokStepper::SokStepper(const KineticField& prototype, const SokStepperConfig& config)
    : config_(config) {
  validate_kinetic_field(prototype);
  require(config.cfl_safety > 0.0 && config.cfl_safety <= 1.0,
          "SokStepperConfig: cfl_safety in (0, 1]");
  require(config.dt >= 0.0, "SokStepperConfig: dt must be nonnegative");
  op_ = std::make_shared<LinearizedOperator>(prototype.agrid, prototype.d);
  if (prototype.mode == SokMode::Linearized) {
    frozen_ = true;
    frozen_macros_ = compute_macros(prototype, config.j_floor);
  }
}

double SokStepper::default_dt(const KineticField& field) const {
  if (config_.dt > 0.0) return config_.dt;
  if (field.xgrid.total_cells() == 1) {
    // Spatially homogeneous: no transport CFL; relax on the collision scale.
    return config_.cfl_safety * std::max(field.eps / field.d, 1e-3);
  }
  double dt = config_.cfl_safety * field.xgrid.min_spacing();
  if (field.eta0 > 0.0 && field.k != 0.0) {
    // The mean-field drift turns the local mean direction at rate eta0*dmag
    // with dmag built from a Laplacian of the current, so across steps it
    // integrates a diffusion of that direction explicitly. Its coefficient
    // is below eta0*|k|*(d+1); cap dt by the parabolic limit 2/(c*kmax^2)
    // or grid-scale direction noise is amplified every step.
    double kmax2 = 0.0;
    for (int axis = 0; axis < field.xgrid.dim; ++axis) {
      const double km = kPi * field.xgrid.n[axis] / field.xgrid.length[axis];
      kmax2 += km * km;
    }
    const double cdiff = field.eta0 * std::abs(field.k) * (field.d + 1.0);
    dt = std::min(dt, config_.cfl_safety * 2.0 / (cdiff * kmax2));
  }
  return dt;
}

void SokStepper::refreeze(const MacroFields& m) {
  require(frozen_, "SokStepper::refreeze: stepper is not in linearized mode");
  frozen_macros_ = m;
}

void SokStepper::transport(KineticField& field, double dt) const {
  if (field.xgrid.total_cells() == 1 || dt == 0.0) return;
  const AngularGrid& ag = field.agrid;
  for (int axis = 0; axis < field.xgrid.dim; ++axis) {
    const double L = field.xgrid.length[axis];
    const double scale = kTwoPi / L;
    for_each_x_line(field.f, field.xgrid, axis, config_.exec,
                    [&](std::complex<double>* spec, int len, int ia) {
                      const auto om = ag.omega(ia);
                      const double speed = (axis == 0) ? om[0] : om[1];
                      for (int j = 0; j < len; ++j) {
                        const double k = scale * spectrum_index(j, len);
                        const double ph = -k * speed * dt;
                        spec[j] *= std::complex<double>(std::cos(ph), std::sin(ph));
                      }
                    });
  }
}

void SokStepper::angular_drift(KineticField& field, const MacroFields& m, double dt) const {
  if (field.eta0 == 0.0 || field.k == 0.0 || dt == 0.0) return;
  const int nx = field.f.nx;
  const int na = field.f.na;
  const double eta0 = field.eta0;
  parallel_for(config_.exec, nx, [&](std::ptrdiff_t ix) {
    if (!m.aligned[ix] || m.dmag[ix] == 0.0) return;
    double* row = field.f.row(static_cast<int>(ix));
    std::vector<double> a(na), work(na), k1(na);
    for (int j = 0; j < na; ++j) {
      // drift speed in alpha: tangential component tau_perp . D = dmag * cos(alpha - phi)
      a[j] = eta0 * m.dmag[ix] * std::cos(field.agrid.node(j) - m.phi[ix]);
    }
    // midpoint rule for  f_t = -(a f)_alpha  over dt
    for (int j = 0; j < na; ++j) work[j] = a[j] * row[j];
    dealias_two_thirds_inplace(work);
    k1 = spectral_derivative(work, 1);
    for (int j = 0; j < na; ++j) work[j] = a[j] * (row[j] - 0.5 * dt * k1[j]);
    dealias_two_thirds_inplace(work);
    const std::vector<double> k2 = spectral_derivative(work, 1);
    for (int j = 0; j < na; ++j) row[j] -= dt * k2[j];
  });
}

void SokStepper::collision(KineticField& field, const MacroFields& m, double dt) const {
  if (dt == 0.0) return;
  const int nx = field.f.nx;
  const int na = field.f.na;
  const double lambda = dt * field.d / field.eps;
  op_->warm_implicit(lambda);
  const std::vector<double>& M0 = op_->M0();
  const Fft& fft = Fft::of_size(na);

  parallel_for(config_.exec, nx, [&](std::ptrdiff_t ix) {
    double* row = field.f.row(static_cast<int>(ix));
    if (m.aligned[ix]) {
      const double phi = m.phi[ix];
      std::vector<std::complex<double>> buf(na);
      // rotate the frame so the local mean direction sits at angle 0
      for (int j = 0; j < na; ++j) buf[j] = row[j];
      fft.forward(buf.data());
      spectral_detail::apply_shift_spectrum(buf.data(), na, phi, kTwoPi);
      fft.inverse(buf.data());
      std::vector<double> ft(na);
      for (int j = 0; j < na; ++j) ft[j] = buf[j].real() / M0[j];
      op_->implicit_solve_inplace(lambda, ft.data());
      for (int j = 0; j < na; ++j) buf[j] = ft[j] * M0[j];
      fft.forward(buf.data());
      spectral_detail::apply_shift_spectrum(buf.data(), na, -phi, kTwoPi);
      fft.inverse(buf.data());
      for (int j = 0; j < na; ++j) row[j] = buf[j].real();
    } else {
      // no alignment direction: pure angular diffusion, solved in Fourier
      std::vector<std::complex<double>> buf(na);
      for (int j = 0; j < na; ++j) buf[j] = row[j];
      fft.forward(buf.data());
      for (int j = 0; j < na; ++j) {
        const double k = spectrum_index(j, na);
        buf[j] /= 1.0 + lambda * k * k;
      }
      fft.inverse(buf.data());
      for (int j = 0; j < na; ++j) row[j] = buf[j].real();
    }
  });
}

void SokStepper::step(KineticField& field, double dt) {
  require(dt > 0.0, "SokStepper::step: dt must be positive");
  transport(field, 0.5 * dt);
  {
    const MacroFields& m1 =
        frozen_ ? frozen_macros_ : compute_macros(field, config_.j_floor);
    angular_drift(field, m1, 0.5 * dt);
  }
  {
    const MacroFields& mc =
        frozen_ ? frozen_macros_ : compute_macros(field, config_.j_floor);
    collision(field, mc, dt);
  }
  {
    const MacroFields& m2 =
        frozen_ ? frozen_macros_ : compute_macros(field, config_.j_floor);
    angular_drift(field, m2, 0.5 * dt);
  }
  transport(field, 0.5 * dt);
}

void sok_step(KineticField& field, const SokStepperConfig& config, double dt) {
  SokStepper stepper(field, config);
  stepper.step(field, dt);
}

namespace {

SokMonitorRow make_monitor(const KineticField& field, const MacroFields& m, double t) {
  SokMonitorRow row;
  row.t = t;
  const int nx = field.f.nx;
  const int na = field.f.na;
  const double wx = field.xgrid.total_cells() > 1 ? field.xgrid.cell_volume() : 1.0;
  const double wa = field.agrid.weight();
  double mass = 0.0, jx = 0.0, jy = 0.0, diss = 0.0, dist2 = 0.0;
  for (int ix = 0; ix < nx; ++ix) {
    const double* f = field.f.row(ix);
    mass += m.rho[ix];
    jx += m.jx[ix];
    jy += m.jy[ix];
    const std::vector<double> frow(f, f + na);
    const std::vector<double> q = apply_Q(field.agrid, frow, field.d);
    std::vector<double> eq(na);
    if (m.aligned[ix]) {
      eq = vmf_density({field.d, m.phi[ix]}, field.agrid);
    } else {
      eq.assign(na, 1.0 / kTwoPi);
    }
    for (int j = 0; j < na; ++j) {
      diss += wx * wa * q[j] * f[j] / eq[j];
      dist2 += wx * wa * sqr(f[j] - m.rho[ix] * eq[j]);
    }
  }
  row.mass = mass * wx;
  row.jmag = std::hypot(jx * wx, jy * wx);
  row.dissipation = diss;
  row.dist_eq = std::sqrt(dist2);
  return row;
}

}  // namespace

SokRunResult run_sok(const KineticField& init, const SokStepperConfig& config, double T,
                     int n_samples, bool keep_snapshots) {
  validate_kinetic_field(init);
  require(T >= 0.0, "run_sok: T must be nonnegative");
  require(n_samples >= 2, "run_sok: need at least 2 samples");
  SokRunResult out;
  out.field = init;
  SokStepper stepper(init, config);

  auto sample = [&](double t) {
    const MacroFields m = compute_macros(out.field, config.j_floor);
    out.monitors.push_back(make_monitor(out.field, m, t));
    if (keep_snapshots) {
      out.snapshots.push_back(out.field.f);
      out.snapshot_times.push_back(t);
    }
  };

  sample(0.0);
  if (T == 0.0) {
    out.completed = true;
    return out;
  }

  const double sample_dt = T / (n_samples - 1);
  const double dt_max = stepper.default_dt(init);
  const int per_sample = std::max(1, static_cast<int>(std::ceil(sample_dt / dt_max)));
  const double h = sample_dt / per_sample;

  for (int s = 1; s < n_samples; ++s) {
    for (int mstep = 0; mstep < per_sample; ++mstep) {
      stepper.step(out.field, h);
      if (!all_finite(out.field.f.v)) {
        out.halt_reason = "non-finite kinetic state";
        return out;
      }
    }
    sample(s * sample_dt);
  }
  out.completed = true;
  return out;
}

Field2 field_da(const Field2& f, int order) {
  Field2 out(f.nx, f.na);
  std::vector<double> row(f.na);
  for (int ix = 0; ix < f.nx; ++ix) {
    row.assign(f.row(ix), f.row(ix) + f.na);
    const std::vector<double> d = spectral_derivative(row, order);
    std::copy(d.begin(), d.end(), out.row(ix));
  }
  return out;
}

Field2 field_dx(const Field2& f, const TorusGrid& grid, int axis, int order) {
  require(axis >= 0 && axis < grid.dim, "field_dx: bad axis");
  Field2 out = f;
  const double L = grid.length[axis];
  for_each_x_line(out, grid, axis, Exec::Serial,
                  [order, L](std::complex<double>* spec, int len, int) {
                    spectral_detail::apply_derivative_spectrum(spec, len, order, L);
                  });
  return out;
}

std::vector<double> cell_laplacian(const std::vector<double>& u, const TorusGrid& grid) {
  require(static_cast<int>(u.size()) == grid.total_cells(), "cell_laplacian: size mismatch");
  if (grid.dim == 1) {
    return spectral_derivative(u, 2, grid.length[0]);
  }
  const int n0 = grid.n[0], n1 = grid.n[1];
  std::vector<double> out(u.size(), 0.0), line0(n0), line1(n1);
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i0 = 0; i0 < n0; ++i0) line0[i0] = u[static_cast<std::size_t>(i0) * n1 + i1];
    const std::vector<double> d2 = spectral_derivative(line0, 2, grid.length[0]);
    for (int i0 = 0; i0 < n0; ++i0) out[static_cast<std::size_t>(i0) * n1 + i1] += d2[i0];
  }
  for (int i0 = 0; i0 < n0; ++i0) {
    for (int i1 = 0; i1 < n1; ++i1) line1[i1] = u[static_cast<std::size_t>(i0) * n1 + i1];
    const std::vector<double> d2 = spectral_derivative(line1, 2, grid.length[1]);
    for (int i1 = 0; i1 < n1; ++i1) out[static_cast<std::size_t>(i0) * n1 + i1] += d2[i1];
  }
  return out;
}

}  // namespace sokl
