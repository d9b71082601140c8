// Command-line driver for the kinetic alignment laboratory: coefficient
// tables, the angular invariant profile, kinetic and macroscopic runs, the
// eps-scaling study, the particle sampler, and a quick self-check.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sokl/collision.hpp"
#include "sokl/expansion.hpp"
#include "sokl/gci.hpp"
#include "sokl/hydro.hpp"
#include "sokl/io.hpp"
#include "sokl/kinetic.hpp"
#include "sokl/particles.hpp"

namespace {

using nlohmann::json;
using namespace sokl;

struct GlobalOpts {
  std::string output_dir_flag;
  int jobs = 0;  // 0 keeps the environment's thread count, serial execution
};

Exec exec_policy(const GlobalOpts& g) { return g.jobs > 0 ? Exec::OpenMP : Exec::Serial; }

double elapsed_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_coeffs(const GlobalOpts& g, const std::vector<double>& d_list, int n_dim, double k,
               double eta0, int resolution) {
  const auto t0 = std::chrono::steady_clock::now();
  require(!d_list.empty(), "coeffs: need at least one d value");
  const std::string dir = resolve_output_dir(g.output_dir_flag);
  std::vector<std::vector<double>> rows;
  for (double d : d_list) {
    const Coefficients co = compute_coefficients(d, n_dim, k, eta0, resolution);
    rows.push_back({co.d, co.c1, co.c2, co.c3});
    std::cout << "d=" << format_g17(co.d) << " c1=" << format_g17(co.c1)
              << " c2=" << format_g17(co.c2) << " c3=" << format_g17(co.c3) << "\n";
  }
  const std::string csv = dir + "/coeffs.csv";
  write_csv(csv, {}, {"d", "c1", "c2", "c3"}, rows);
  json cfg;
  cfg["command"] = "coeffs";
  cfg["d"] = d_list;
  cfg["n"] = n_dim;
  cfg["k"] = k;
  cfg["eta0"] = eta0;
  cfg["resolution"] = resolution;
  write_manifest(dir + "/coeffs.manifest.json", cfg, {csv}, elapsed_seconds(t0));
  return 0;
}

int run_gci(const GlobalOpts& g, double d, int n_dim, int resolution) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir = resolve_output_dir(g.output_dir_flag);
  const GciSolution sol = solve_gci_ode(d, n_dim, resolution);
  std::vector<std::vector<double>> rows;
  for (int q = 0; q < sol.grid.n; ++q) {
    rows.push_back({sol.grid.theta[q], sol.g[q], sol.dg[q], sol.h[q]});
  }
  const std::string csv = dir + "/gci_profile.csv";
  write_csv(csv,
            {"weighted residual " + format_g17(sol.residual_weighted),
             "rhs norm " + format_g17(sol.rhs_norm_weighted)},
            {"theta", "g", "dg", "h"}, rows);
  std::cout << "residual_weighted=" << format_g17(sol.residual_weighted)
            << " c2=" << format_g17(coefficient_c2(sol)) << "\n";
  json cfg;
  cfg["command"] = "gci";
  cfg["d"] = d;
  cfg["n"] = n_dim;
  cfg["resolution"] = resolution;
  write_manifest(dir + "/gci.manifest.json", cfg, {csv}, elapsed_seconds(t0));
  return 0;
}

KineticField build_kinetic_initial(const json& cfg, double eps) {
  const int nx = cfg.value("nx", 128);
  const int na = cfg.value("na", 64);
  const double L = cfg.value("L", 1.0);
  KineticField field;
  field.xgrid = TorusGrid::line(nx, L);
  field.agrid = AngularGrid(na);
  field.eps = eps;
  field.d = cfg.value("d", 1.0);
  field.eta0 = cfg.value("eta0", 1.0);
  field.k = cfg.value("k", 0.05);
  field.mode = cfg.value("mode", std::string("nonlinear")) == "linearized"
                   ? SokMode::Linearized
                   : SokMode::Nonlinear;

  const std::string type = cfg.value("initial", std::string("wave"));
  std::vector<double> rho(nx), phi(nx);
  const double rho_base = cfg.value("rho_base", 1.0);
  const double rho_amp = cfg.value("rho_amplitude", 0.0);
  const double phi_amp = cfg.value("phi_amplitude", 0.05);
  const int mwave = cfg.value("wave_number", 1);
  for (int i = 0; i < nx; ++i) {
    const double x = field.xgrid.node(0, i);
    rho[i] = rho_base + rho_amp * std::cos(kTwoPi * mwave * x / L);
    phi[i] = phi_amp * std::sin(kTwoPi * mwave * x / L);
  }
  if (type == "equilibrium") {
    for (int i = 0; i < nx; ++i) phi[i] = cfg.value("phi0", 0.0);
    rho.assign(nx, rho_base);
    field.f = equilibrium_field(rho, phi, field.xgrid, field.agrid, field.d);
  } else if (type == "wave") {
    field.f = equilibrium_field(rho, phi, field.xgrid, field.agrid, field.d);
  } else if (type == "prepared") {
    MacroState macro;
    macro.grid = field.xgrid;
    macro.rho = rho;
    macro.phi = phi;
    const Coefficients co =
        compute_coefficients(field.d, 2, field.k, field.eta0, cfg.value("gci_resolution", 128));
    const ExpansionBundle bundle = solve_f1(macro, co, field.agrid);
    field.f = prepared_initial(bundle, eps);
  } else {
    require(false, "run-sok: unknown initial type " + type);
  }
  return field;
}

int run_sok_cmd(const GlobalOpts& g, const std::string& config_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir = resolve_output_dir(g.output_dir_flag);
  json cfg;
  {
    std::ifstream in(config_path);
    require(in.good(), "run-sok: cannot open config " + config_path);
    in >> cfg;
  }
  const double eps = cfg.value("eps", 0.1);
  KineticField field = build_kinetic_initial(cfg, eps);
  SokStepperConfig scfg;
  scfg.dt = cfg.value("dt", 0.0);
  scfg.cfl_safety = cfg.value("cfl_safety", 0.5);
  scfg.exec = exec_policy(g);
  const double T = cfg.value("T", 0.25);
  const int n_samples = cfg.value("n_samples", 6);

  const SokRunResult res = run_sok(field, scfg, T, n_samples, true);

  std::vector<std::vector<double>> rows;
  for (const SokMonitorRow& r : res.monitors) {
    rows.push_back({r.t, r.mass, r.jmag, r.dissipation, r.dist_eq});
  }
  const std::string csv = dir + "/sok_monitors.csv";
  write_csv(csv, {}, {"t", "mass", "jmag", "dissipation", "dist_eq"}, rows);
  std::vector<std::string> outputs{csv};
  for (std::size_t s = 0; s < res.snapshots.size(); ++s) {
    KineticField snap = res.field;
    snap.f = res.snapshots[s];
    const std::string path = dir + "/sok_snapshot_" + std::to_string(s) + ".csv";
    write_snapshot_csv(path, snap, res.snapshot_times[s]);
    outputs.push_back(path);
  }
  json echo = cfg;
  echo["command"] = "run-sok";
  write_manifest(dir + "/run_sok.manifest.json", echo, outputs, elapsed_seconds(t0));
  if (!res.completed) {
    std::cerr << "run halted: " << res.halt_reason << "\n";
    return 1;
  }
  std::cout << "completed T=" << format_g17(T) << " mass=" << format_g17(rows.back()[1])
            << "\n";
  return 0;
}

int run_soh_cmd(const GlobalOpts& g, const std::string& config_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir = resolve_output_dir(g.output_dir_flag);
  json cfg;
  {
    std::ifstream in(config_path);
    require(in.good(), "run-soh: cannot open config " + config_path);
    in >> cfg;
  }
  const int nx = cfg.value("nx", 128);
  const double L = cfg.value("L", 1.0);
  MacroState macro;
  macro.grid = TorusGrid::line(nx, L);
  macro.rho.resize(nx);
  macro.phi.resize(nx);
  const double rho_base = cfg.value("rho_base", 1.0);
  const double rho_amp = cfg.value("rho_amplitude", 0.0);
  const double phi_amp = cfg.value("phi_amplitude", 0.05);
  const int mwave = cfg.value("wave_number", 1);
  for (int i = 0; i < nx; ++i) {
    const double x = macro.grid.node(0, i);
    macro.rho[i] = rho_base + rho_amp * std::cos(kTwoPi * mwave * x / L);
    macro.phi[i] = phi_amp * std::sin(kTwoPi * mwave * x / L);
  }
  const Coefficients co = compute_coefficients(cfg.value("d", 1.0), 2, cfg.value("k", 0.05),
                                               cfg.value("eta0", 1.0),
                                               cfg.value("gci_resolution", 128));
  const double T = cfg.value("T", 0.5);
  const SohRunResult res =
      run_soh(macro, co, T, cfg.value("dt", 0.0), cfg.value("n_samples", 11));

  std::vector<std::vector<double>> rows;
  for (const SohMonitorRow& r : res.monitors) {
    rows.push_back({r.t, r.mass, r.min_rho, r.max_dphi});
  }
  const std::string csv = dir + "/soh_monitors.csv";
  write_csv(csv, {}, {"t", "mass", "min_rho", "max_dphi"}, rows);
  std::vector<std::string> outputs{csv};
  std::vector<std::vector<double>> state_rows;
  const MacroState& fin = res.state;
  for (int i = 0; i < nx; ++i) {
    state_rows.push_back({fin.grid.node(0, i), fin.rho[i], fin.phi[i]});
  }
  const std::string state_csv = dir + "/soh_final_state.csv";
  write_csv(state_csv, {}, {"x", "rho", "phi"}, state_rows);
  outputs.push_back(state_csv);
  json echo = cfg;
  echo["command"] = "run-soh";
  write_manifest(dir + "/run_soh.manifest.json", echo, outputs, elapsed_seconds(t0));
  if (!res.completed) {
    std::cerr << "run halted: " << res.halt_reason << "\n";
    return 1;
  }
  std::cout << "completed T=" << format_g17(T)
            << " min_rho=" << format_g17(res.monitors.back().min_rho) << "\n";
  return 0;
}

int run_limit_study(const GlobalOpts& g, const std::vector<double>& eps_list,
                    const std::string& config_path) {
  const auto t0 = std::chrono::steady_clock::now();
  require(!eps_list.empty(), "limit-study: eps list must not be empty");
  const std::string dir = resolve_output_dir(g.output_dir_flag);
  LimitStudyConfig cfg;
  cfg.eps_list = eps_list;
  cfg.exec = exec_policy(g);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    require(in.good(), "limit-study: cannot open config " + config_path);
    json j;
    in >> j;
    cfg.nx = j.value("nx", cfg.nx);
    cfg.na = j.value("na", cfg.na);
    cfg.L = j.value("L", cfg.L);
    cfg.d = j.value("d", cfg.d);
    cfg.eta0 = j.value("eta0", cfg.eta0);
    cfg.k = j.value("k", cfg.k);
    cfg.T = j.value("T", cfg.T);
    cfg.phi_amplitude = j.value("phi_amplitude", cfg.phi_amplitude);
    cfg.rho_amplitude = j.value("rho_amplitude", cfg.rho_amplitude);
    cfg.rho_base = j.value("rho_base", cfg.rho_base);
    cfg.wave_number = j.value("wave_number", cfg.wave_number);
    cfg.n_samples = j.value("n_samples", cfg.n_samples);
    cfg.cfl_safety = j.value("cfl_safety", cfg.cfl_safety);
    cfg.kinetic_dt = j.value("kinetic_dt", cfg.kinetic_dt);
    cfg.dt_probe = j.value("dt_probe", cfg.dt_probe);
    cfg.gci_resolution = j.value("gci_resolution", cfg.gci_resolution);
  }

  const LimitStudyResult res = limit_study(cfg);

  std::vector<std::vector<double>> rows;
  for (const LimitRow& r : res.rows) {
    rows.push_back({r.eps, r.t, r.l2, r.h1, r.h2, r.scaled_l2, r.scaled_h1, r.scaled_h2,
                    r.mass_moment, r.current_moment});
  }
  const std::string csv = dir + "/limit_study.csv";
  write_csv(csv, {},
            {"eps", "t", "norm_L2_w", "norm_H1_w", "norm_H2_w", "scaled_L2", "scaled_H1",
             "scaled_H2", "mass_moment", "current_moment"},
            rows);

  json summary;
  summary["coefficients"] = {{"d", res.coeffs.d},   {"c1", res.coeffs.c1},
                             {"c2", res.coeffs.c2}, {"c3", res.coeffs.c3},
                             {"k", res.coeffs.k},   {"eta0", res.coeffs.eta0}};
  summary["slope_dist_vs_eps"] = res.slope;
  summary["onesided_ratio"] = res.onesided_ratio;
  summary["spread"] = res.spread;
  summary["per_eps"] = json::array();
  int failures = 0;
  for (const EpsSummary& s : res.per_eps) {
    json je;
    je["eps"] = s.eps;
    je["completed"] = s.completed;
    if (!s.completed) {
      je["error"] = s.error;
      ++failures;
    } else {
      je["sup_scaled_L2"] = s.sup_scaled[0];
      je["sup_scaled_H1"] = s.sup_scaled[1];
      je["sup_scaled_H2"] = s.sup_scaled[2];
      je["final_dist_f0"] = s.final_dist_f0;
      je["apriori_C95"] = s.apriori.C95;
      je["apriori_satisfied"] = s.apriori.satisfied;
    }
    summary["per_eps"].push_back(je);
  }
  const std::string summary_path = dir + "/limit_study_summary.json";
  {
    std::ofstream out(summary_path);
    require(out.good(), "limit-study: cannot open " + summary_path);
    out << summary.dump(2) << "\n";
  }

  json echo;
  echo["command"] = "limit-study";
  echo["eps"] = eps_list;
  echo["nx"] = cfg.nx;
  echo["na"] = cfg.na;
  echo["T"] = cfg.T;
  echo["d"] = cfg.d;
  echo["k"] = cfg.k;
  echo["eta0"] = cfg.eta0;
  echo["phi_amplitude"] = cfg.phi_amplitude;
  write_manifest(dir + "/limit_study.manifest.json", echo, {csv, summary_path},
                 elapsed_seconds(t0));

  std::cout << "slope=" << format_g17(res.slope) << " failures=" << failures << "/"
            << res.per_eps.size() << "\n";
  return failures == 0 ? 0 : 1;
}

int run_particles_cmd(const GlobalOpts& g, int n, double nu, double D, double R, double box,
                      double T, double dt, std::uint64_t seed, const std::string& scheme) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir = resolve_output_dir(g.output_dir_flag);
  SwarmParams p;
  p.n = n;
  p.nu = nu;
  p.D = D;
  p.R = R;
  p.box = box;
  p.seed = seed;
  p.scheme = (scheme == "heun") ? SdeScheme::Heun : SdeScheme::EulerMaruyama;
  Swarm swarm = make_uniform_swarm(p);
  const int steps = std::max(1, static_cast<int>(std::llround(T / dt)));
  for (int s = 0; s < steps; ++s) swarm_step(swarm, dt, exec_policy(g));

  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    rows.push_back({static_cast<double>(i), swarm.x1[i], swarm.x2[i], swarm.beta[i]});
  }
  const std::string csv = dir + "/particles.csv";
  write_csv(csv, {}, {"k", "x1", "x2", "beta"}, rows);

  json sidecar;
  sidecar["n"] = n;
  sidecar["nu"] = nu;
  sidecar["D"] = D;
  sidecar["R"] = R;
  sidecar["box"] = box;
  sidecar["T"] = steps * dt;
  sidecar["dt"] = dt;
  sidecar["seed"] = seed;
  sidecar["scheme"] = (p.scheme == SdeScheme::Heun) ? "heun" : "euler-maruyama";
  sidecar["steps"] = steps;
  const std::string sidecar_path = dir + "/particles.meta.json";
  {
    std::ofstream out(sidecar_path);
    require(out.good(), "particles: cannot open " + sidecar_path);
    out << sidecar.dump(2) << "\n";
  }
  json echo = sidecar;
  echo["command"] = "particles";
  write_manifest(dir + "/particles.manifest.json", echo, {csv, sidecar_path},
                 elapsed_seconds(t0));
  std::cout << "steps=" << steps << " mean_heading=" << format_g17(mean_heading(swarm))
            << "\n";
  return 0;
}

int run_check() {
  int failures = 0;
  auto report = [&](const char* name, bool ok, double value) {
    std::cout << (ok ? "PASS" : "FAIL") << " " << name << " (" << format_g17(value) << ")\n";
    if (!ok) ++failures;
  };

  const AngularGrid grid(64);
  {
    const std::vector<double> m = vmf_density({1.0, 0.7}, grid);
    const Moments mm = moment_integrals(grid, m);
    report("unit mass of the angular equilibrium", std::abs(mm.mass - 1.0) < 1e-12,
           mm.mass - 1.0);
  }
  {
    const double res = sphere_divergence_identity_check(grid, {0.3, -1.1});
    report("projected divergence identity", res < 1e-12, res);
  }
  {
    const GciSolution sol = solve_gci_ode(1.0, 2, 128);
    report("invariant profile residual", sol.residual_weighted < 1e-8, sol.residual_weighted);
  }
  {
    const double gap = poincare_constant_estimate(grid, 1.0, 20, 99);
    report("weighted spectral gap positive", gap > 0.0, gap);
  }
  {
    const Coefficients co = compute_coefficients(1.0, 2, 0.05, 1.0, 128);
    report("coefficient ordering 0 < c2 <= c1", co.c2 > 0.0 && co.c2 <= co.c1 + 1e-12,
           co.c1 - co.c2);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic alignment laboratory: collision invariants, kinetic and "
               "macroscopic solvers, eps-scaling studies, particle sampling"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--output-dir", g.output_dir_flag,
                 "Output directory (overrides SOKL_OUTPUT_DIR)");
  app.add_option("--jobs", g.jobs, "OpenMP thread count (0 = serial execution)");

  // coeffs
  std::vector<double> d_list;
  int n_dim = 2;
  double kgain = 0.05, eta0 = 1.0;
  int resolution = 128;
  CLI::App* coeffs = app.add_subcommand("coeffs", "Tabulate transport coefficients");
  coeffs->add_option("--d", d_list, "Noise parameter values")->required();
  coeffs->add_option("--n", n_dim, "Ambient dimension (>= 2)");
  coeffs->add_option("--k", kgain, "Viscous feedback gain");
  coeffs->add_option("--eta0", eta0, "Viscous feedback strength");
  coeffs->add_option("--res", resolution, "Polar resolution");

  // gci
  double gci_d = 1.0;
  int gci_n = 2, gci_res = 128;
  CLI::App* gci = app.add_subcommand("gci", "Solve the angular invariant profile");
  gci->add_option("--d", gci_d, "Noise parameter");
  gci->add_option("--n", gci_n, "Ambient dimension (>= 2)");
  gci->add_option("--res", gci_res, "Polar resolution");

  // run-sok
  std::string sok_config;
  CLI::App* sok = app.add_subcommand("run-sok", "Integrate the kinetic model");
  sok->add_option("--config", sok_config, "JSON configuration file")->required();

  // run-soh
  std::string soh_config;
  CLI::App* soh = app.add_subcommand("run-soh", "Integrate the macroscopic model");
  soh->add_option("--config", soh_config, "JSON configuration file")->required();

  // limit-study
  std::vector<double> eps_list;
  std::string limit_config;
  CLI::App* limit = app.add_subcommand("limit-study", "eps-scaling study of the remainder");
  limit->add_option("--eps", eps_list, "eps values (at least one)");
  limit->add_option("--config", limit_config, "JSON configuration file");

  // particles
  int pn = 10000;
  double pnu = 1.0, pD = 1.0, pR = 1.0, pbox = 1.0, pT = 1.0, pdt = 1e-3;
  std::uint64_t pseed = 1;
  std::string pscheme = "euler-maruyama";
  CLI::App* particles = app.add_subcommand("particles", "Sample the interacting-particle system");
  particles->add_option("--n", pn, "Particle count");
  particles->add_option("--nu", pnu, "Alignment rate");
  particles->add_option("--D", pD, "Angular diffusion");
  particles->add_option("--R", pR, "Interaction radius");
  particles->add_option("--box", pbox, "Torus side length");
  particles->add_option("--T", pT, "Final time");
  particles->add_option("--dt", pdt, "Step size");
  particles->add_option("--seed", pseed, "Random seed");
  particles->add_option("--scheme", pscheme, "euler-maruyama or heun");

  CLI::App* check = app.add_subcommand("check", "Quick self-check of core invariants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (g.jobs > 0) omp_set_num_threads(g.jobs);

  try {
    if (coeffs->parsed()) return run_coeffs(g, d_list, n_dim, kgain, eta0, resolution);
    if (gci->parsed()) return run_gci(g, gci_d, gci_n, gci_res);
    if (sok->parsed()) return run_sok_cmd(g, sok_config);
    if (soh->parsed()) return run_soh_cmd(g, soh_config);
    if (limit->parsed()) return run_limit_study(g, eps_list, limit_config);
    if (particles->parsed())
      return run_particles_cmd(g, pn, pnu, pD, pR, pbox, pT, pdt, pseed, pscheme);
    if (check->parsed()) return run_check();
  } catch (const ContractError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
