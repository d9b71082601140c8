// Compares the serial and OpenMP execution policies on the two parallel
// kernels: the kinetic Strang step (per-cell angular drift and implicit
// collision solves) and the particle force pass. Same inputs, same outputs;
// only the scheduling differs.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "sokl/equilibria.hpp"
#include "sokl/kinetic.hpp"
#include "sokl/parallel.hpp"
#include "sokl/particles.hpp"

namespace {

using namespace sokl;

double time_seconds(const std::function<void()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

KineticField make_field(int nx, int na) {
  KineticField field;
  field.xgrid = TorusGrid::line(nx, 1.0);
  field.agrid = AngularGrid(na);
  field.eps = 0.05;
  field.d = 1.0;
  field.eta0 = 1.0;
  field.k = 0.05;
  std::vector<double> rho(nx), phi(nx);
  for (int i = 0; i < nx; ++i) {
    const double x = field.xgrid.node(0, i);
    rho[i] = 1.0 + 0.1 * std::cos(kTwoPi * x);
    phi[i] = 0.1 * std::sin(kTwoPi * x);
  }
  field.f = equilibrium_field(rho, phi, field.xgrid, field.agrid, field.d);
  return field;
}

double bench_kinetic(Exec exec, int nx, int na, int steps) {
  KineticField field = make_field(nx, na);
  SokStepperConfig cfg;
  cfg.exec = exec;
  SokStepper stepper(field, cfg);
  const double dt = stepper.default_dt(field);
  stepper.step(field, dt);  // warm the factorization and FFT plans
  return time_seconds([&] {
    for (int s = 0; s < steps; ++s) stepper.step(field, dt);
  });
}

double bench_particles(Exec exec, int n, int steps) {
  SwarmParams p;
  p.n = n;
  p.nu = 1.0;
  p.D = 0.5;
  p.R = 0.2;
  p.box = 1.0;
  p.seed = 7;
  Swarm swarm = make_uniform_swarm(p);
  swarm_step(swarm, 1e-3, exec);  // warm-up
  return time_seconds([&] {
    for (int s = 0; s < steps; ++s) swarm_step(swarm, 1e-3, exec);
  });
}

void report(const char* name, double serial, double omp) {
  std::printf("%-28s %10.4f s %10.4f s %8.2fx\n", name, serial, omp,
              omp > 0.0 ? serial / omp : 0.0);
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", max_threads());
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    const int nx = 256, na = 64, steps = 40;
    const double ts = bench_kinetic(Exec::Serial, nx, na, steps);
    const double tp = bench_kinetic(Exec::OpenMP, nx, na, steps);
    report("kinetic step 256x64", ts, tp);
  }
  {
    const int n = 20000, steps = 50;
    const double ts = bench_particles(Exec::Serial, n, steps);
    const double tp = bench_particles(Exec::OpenMP, n, steps);
    report("particle pass n=20000", ts, tp);
  }
  return 0;
}
