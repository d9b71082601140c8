#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sokl/common.hpp"
#include "sokl/equilibria.hpp"
#include "sokl/particles.hpp"

using namespace sokl;

namespace {

double wrap_diff(double a) { return std::remainder(a, kTwoPi); }

// Reference neighbor targets by direct minimum-image double loop.
void brute_force_targets(const Swarm& s, std::vector<double>& target,
                         std::vector<int>& defined) {
  const int n = s.params.n;
  const double box = s.params.box;
  const double R2 = s.params.R * s.params.R;
  target.assign(n, 0.0);
  defined.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    double jx = 0.0, jy = 0.0;
    for (int j = 0; j < n; ++j) {
      double dx = s.x1[j] - s.x1[i];
      double dy = s.x2[j] - s.x2[i];
      dx -= box * std::round(dx / box);
      dy -= box * std::round(dy / box);
      if (dx * dx + dy * dy <= R2) {
        jx += std::cos(s.beta[j]);
        jy += std::sin(s.beta[j]);
      }
    }
    if (std::hypot(jx, jy) >= s.params.j_floor) {
      target[i] = std::atan2(jy, jx);
      defined[i] = 1;
    }
  }
}

}  // namespace

TEST_CASE("counter generator is keyed, not sequential") {
  const CounterRng rng{42};
  CHECK(rng.uniform(3, 7, 11) == rng.uniform(3, 7, 11));
  CHECK(rng.uniform(3, 7, 11) != rng.uniform(7, 3, 11));
  CHECK(rng.uniform(3, 7, 11) != rng.uniform(3, 7, 12));
  const CounterRng other{43};
  CHECK(rng.uniform(3, 7, 11) != other.uniform(3, 7, 11));
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(i, 5, 1);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("keyed normals have standard moments") {
  const CounterRng rng{2718};
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(i, 0);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("swarm construction, wrapping, and validation") {
  SwarmParams p;
  p.n = 5000;
  p.box = 2.0;
  p.seed = 9;
  const Swarm s = make_uniform_swarm(p);
  for (int i = 0; i < p.n; ++i) {
    CHECK(s.x1[i] >= 0.0);
    CHECK(s.x1[i] < p.box);
    CHECK(s.x2[i] >= 0.0);
    CHECK(s.x2[i] < p.box);
    CHECK(s.beta[i] >= 0.0);
    CHECK(s.beta[i] < kTwoPi);
  }
  // Occupancy of the four quadrants is roughly even.
  int q = 0;
  for (int i = 0; i < p.n; ++i) {
    if (s.x1[i] < 1.0 && s.x2[i] < 1.0) ++q;
  }
  CHECK(std::abs(q - 1250) < 150);

  SwarmParams p2 = p;
  p2.n = 2;
  const Swarm w = make_swarm(p2, {-0.5, 2.5}, {1.0, 1.0}, {-1.0, 7.0});
  CHECK(w.x1[0] == doctest::Approx(1.5));
  CHECK(w.x1[1] == doctest::Approx(0.5));
  CHECK(w.beta[0] == doctest::Approx(kTwoPi - 1.0));
  CHECK(w.beta[1] == doctest::Approx(7.0 - kTwoPi));

  SwarmParams bad = p;
  bad.n = 0;
  CHECK_THROWS_AS(make_uniform_swarm(bad), ContractError);
  bad = p;
  bad.R = 0.0;
  CHECK_THROWS_AS(make_uniform_swarm(bad), ContractError);
  bad = p;
  bad.D = -1.0;
  CHECK_THROWS_AS(make_uniform_swarm(bad), ContractError);
}

TEST_CASE("two aligned particles follow the pairwise relaxation law") {
  // Global-coupling fast path: the target is the bisector, so the heading
  // difference obeys  Delta' = -2 nu sin(Delta/2), i.e.
  // tan(Delta/4) = tan(Delta0/4) exp(-nu t).
  const double delta0 = 2.0, nu = 1.0, T = 1.5;
  auto run = [&](SdeScheme scheme, double dt) {
    SwarmParams p;
    p.n = 2;
    p.box = 1.0;
    p.R = 1.0;
    p.nu = nu;
    p.D = 0.0;
    p.scheme = scheme;
    Swarm s = make_swarm(p, {0.5, 0.5}, {0.5, 0.5}, {0.3, 0.3 + delta0});
    const int steps = static_cast<int>(std::llround(T / dt));
    for (int q = 0; q < steps; ++q) swarm_step(s, dt);
    return std::abs(wrap_diff(s.beta[1] - s.beta[0]));
  };
  const double expect = 4.0 * std::atan(std::tan(delta0 / 4.0) * std::exp(-nu * T));
  CHECK(run(SdeScheme::Heun, 1e-3) == doctest::Approx(expect).epsilon(1e-5));
  CHECK(run(SdeScheme::EulerMaruyama, 1e-3) == doctest::Approx(expect).epsilon(5e-3));
  // Halving dt quarters the Heun error (second order).
  const double e1 = std::abs(run(SdeScheme::Heun, 2e-3) - expect);
  const double e2 = std::abs(run(SdeScheme::Heun, 1e-3) - expect);
  CHECK(e2 < 0.35 * e1);
}

TEST_CASE("cell-list and fallback neighbor sums match a direct reference") {
  for (double R : {0.2, 0.3}) {  // 0.2 -> cell list, 0.3 -> plain double loop
    SwarmParams p;
    p.n = 300;
    p.box = 1.0;
    p.R = R;
    p.nu = 1.0;
    p.D = 0.0;
    p.seed = 31;
    Swarm s = make_uniform_swarm(p);
    std::vector<double> target;
    std::vector<int> defined;
    brute_force_targets(s, target, defined);
    const double dt = 1e-3;
    std::vector<double> expected(p.n);
    for (int i = 0; i < p.n; ++i) {
      const double drift = defined[i] ? p.nu * std::sin(target[i] - s.beta[i]) : 0.0;
      expected[i] = std::fmod(s.beta[i] + drift * dt + kTwoPi, kTwoPi);
    }
    swarm_step(s, dt);
    for (int i = 0; i < p.n; ++i) {
      CHECK(s.beta[i] == doctest::Approx(expected[i]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("trajectories are bitwise deterministic across runs and policies") {
  SwarmParams p;
  p.n = 2000;
  p.box = 1.0;
  p.R = 0.25;
  p.nu = 1.0;
  p.D = 0.5;
  p.seed = 77;
  Swarm a = make_uniform_swarm(p);
  Swarm b = make_uniform_swarm(p);
  for (int q = 0; q < 5; ++q) {
    swarm_step(a, 0.01, Exec::Serial);
    swarm_step(b, 0.01, Exec::OpenMP);
  }
  for (int i = 0; i < p.n; ++i) {
    CHECK(a.beta[i] == b.beta[i]);
    CHECK(a.x1[i] == b.x1[i]);
    CHECK(a.x2[i] == b.x2[i]);
  }
  CHECK(a.step_count == 5);
  CHECK(a.time == doctest::Approx(0.05));
}

TEST_CASE("drawn headings match the target angular distribution") {
  const int n = 100000;
  const double d = 0.5, mean = 1.0;
  std::vector<double> angles = sample_vmf_angles(n, d, mean, 4242);
  // Reference CDF on a fine grid of the density exp(cos(a - mean)/d).
  const int m = 40960;
  std::vector<double> cdf(m + 1, 0.0);
  for (int j = 0; j < m; ++j) {
    const double a = kTwoPi * (j + 0.5) / m;
    cdf[j + 1] = cdf[j] + std::exp(std::cos(a - mean) / d);
  }
  for (double& c : cdf) c /= cdf[m];
  std::sort(angles.begin(), angles.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const int cell = std::min(m - 1, static_cast<int>(angles[i] / kTwoPi * m));
    const double F = cdf[cell];
    ks = std::max(ks, std::abs(F - (i + 0.5) / n));
  }
  CHECK(ks < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("globally coupled swarm equilibrates to the angular equilibrium") {
  SwarmParams p;
  p.n = 50000;
  p.box = 1.0;
  p.R = 1.0;  // covers the torus: mean-field fast path
  p.nu = 1.0;
  p.D = 0.5;  // noise-to-alignment ratio d = D/nu = 0.5
  p.seed = 123;
  Swarm s = make_uniform_swarm(p);
  s.beta = sample_vmf_angles(p.n, p.D / p.nu, 1.0, 888);  // warm start near equilibrium
  const double dt = 0.005;  // small enough that the sampler's invariant-law bias
  for (int q = 0; q < 800; ++q) swarm_step(s, dt);  // stays below the test bounds

  const double phi = mean_heading(s);
  CHECK(std::abs(wrap_diff(phi - 1.0)) < 0.2);  // direction wanders only slowly

  const int nb = 64;
  const std::vector<double> emp = empirical_density(s, nb);
  // Reference density at bin centers, normalized over the same bins.
  std::vector<double> ref(nb);
  double norm = 0.0;
  for (int b = 0; b < nb; ++b) {
    const double a = kTwoPi * (b + 0.5) / nb;
    ref[b] = std::exp(std::cos(a - phi) / (p.D / p.nu));
    norm += ref[b] * (kTwoPi / nb);
  }
  for (double& v : ref) v /= norm;

  const double w = kTwoPi / nb;
  double l1 = 0.0, ks = 0.0, cum = 0.0, mass = 0.0;
  for (int b = 0; b < nb; ++b) {
    l1 += std::abs(emp[b] - ref[b]) * w;
    cum += (emp[b] - ref[b]) * w;
    ks = std::max(ks, std::abs(cum));
    mass += emp[b] * w;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  const double root_n = std::sqrt(static_cast<double>(p.n));
  CHECK(ks < 3.0 / root_n);
  CHECK(l1 < 5.0 * kTwoPi / root_n);
}

TEST_CASE("histogram prerequisites are enforced") {
  SwarmParams p;
  p.n = 100;
  Swarm s = make_uniform_swarm(p);
  CHECK_THROWS_AS(empirical_density(s, 32), ContractError);
  p.n = 2000;
  s = make_uniform_swarm(p);
  CHECK_THROWS_AS(empirical_density(s, 2), ContractError);
  CHECK(empirical_density(s, 32).size() == 32);
}
