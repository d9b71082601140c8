#include "sokl/particles.hpp"

#include <algorithm>
#include <cmath>

#include "sokl/equilibria.hpp"

namespace sokl {

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t k1, std::uint64_t k2, std::uint64_t salt) const {
  const std::uint64_t h = mix(seed ^ mix(k1 ^ mix(k2 ^ mix(salt))));
  // 53 mantissa bits; offset keeps the value strictly inside (0, 1).
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t particle, std::uint64_t step) const {
  const double u1 = uniform(particle, step, 0x5ca1ab1eULL);
  const double u2 = uniform(particle, step, 0xdecafbadULL);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

namespace {

double wrap_box(double x, double box) {
  x = std::fmod(x, box);
  if (x < 0.0) x += box;
  return x;
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

void validate_params(const SwarmParams& p) {
  require(p.n >= 1, "Swarm: need at least one particle");
  require(p.box > 0.0, "Swarm: box side must be positive");
  require(p.nu >= 0.0, "Swarm: nu must be nonnegative");
  require(p.D >= 0.0, "Swarm: D must be nonnegative");
  require(p.R > 0.0, "Swarm: interaction radius must be positive");
}

struct CellList {
  int nc = 0;
  double cell = 0.0;
  std::vector<std::vector<int>> members;

  CellList(const Swarm& s, int nc_) : nc(nc_), cell(s.params.box / nc_) {
    members.assign(static_cast<std::size_t>(nc) * nc, {});
    for (int i = 0; i < s.params.n; ++i) {
      members[index_of(s.x1[i], s.x2[i])].push_back(i);
    }
  }

  int index_of(double x, double y) const {
    int c1 = std::min(nc - 1, static_cast<int>(x / cell));
    int c2 = std::min(nc - 1, static_cast<int>(y / cell));
    return c1 * nc + c2;
  }
};

// Mean-heading targets for every particle (self-inclusive neighbor sums).
void neighbor_targets(const Swarm& s, Exec exec, std::vector<double>& target,
                      std::vector<std::uint8_t>& defined) {
  const int n = s.params.n;
  const double R = s.params.R;
  const double R2 = R * R;
  const double box = s.params.box;
  target.assign(n, 0.0);
  defined.assign(n, 0);

  // On the square torus no two points are farther apart than box/sqrt(2).
  if (R >= box * 0.7071067811865476) {
    double jx = 0.0, jy = 0.0;
    for (int i = 0; i < n; ++i) {
      jx += std::cos(s.beta[i]);
      jy += std::sin(s.beta[i]);
    }
    const double mag = std::hypot(jx, jy);
    const double angle = (mag >= s.params.j_floor) ? std::atan2(jy, jx) : 0.0;
    const std::uint8_t ok = (mag >= s.params.j_floor) ? 1 : 0;
    for (int i = 0; i < n; ++i) {
      target[i] = angle;
      defined[i] = ok;
    }
    return;
  }

  auto min_image = [box](double d) {
    d -= box * std::round(d / box);
    return d;
  };

  const int nc = static_cast<int>(box / R);
  if (nc >= 4) {
    const CellList cl(s, nc);
    parallel_for(exec, n, [&](std::ptrdiff_t ip) {
      const int i = static_cast<int>(ip);
      const int c1 = std::min(nc - 1, static_cast<int>(s.x1[i] / cl.cell));
      const int c2 = std::min(nc - 1, static_cast<int>(s.x2[i] / cl.cell));
      double jx = 0.0, jy = 0.0;
      for (int d1 = -1; d1 <= 1; ++d1) {
        for (int d2 = -1; d2 <= 1; ++d2) {
          const int cc1 = (c1 + d1 + nc) % nc;
          const int cc2 = (c2 + d2 + nc) % nc;
          for (int j : cl.members[cc1 * nc + cc2]) {
            const double dx = min_image(s.x1[j] - s.x1[i]);
            const double dy = min_image(s.x2[j] - s.x2[i]);
            if (dx * dx + dy * dy <= R2) {
              jx += std::cos(s.beta[j]);
              jy += std::sin(s.beta[j]);
            }
          }
        }
      }
      const double mag = std::hypot(jx, jy);
      if (mag >= s.params.j_floor) {
        target[i] = std::atan2(jy, jx);
        defined[i] = 1;
      }
    });
    return;
  }

  // Radius comparable to the box but not covering it: plain double loop.
  parallel_for(exec, n, [&](std::ptrdiff_t ip) {
    const int i = static_cast<int>(ip);
    double jx = 0.0, jy = 0.0;
    for (int j = 0; j < n; ++j) {
      const double dx = min_image(s.x1[j] - s.x1[i]);
      const double dy = min_image(s.x2[j] - s.x2[i]);
      if (dx * dx + dy * dy <= R2) {
        jx += std::cos(s.beta[j]);
        jy += std::sin(s.beta[j]);
      }
    }
    const double mag = std::hypot(jx, jy);
    if (mag >= s.params.j_floor) {
      target[i] = std::atan2(jy, jx);
      defined[i] = 1;
    }
  });
}

}  // namespace

Swarm make_uniform_swarm(const SwarmParams& params) {
  validate_params(params);
  Swarm s;
  s.params = params;
  s.x1.resize(params.n);
  s.x2.resize(params.n);
  s.beta.resize(params.n);
  const CounterRng rng{params.seed};
  for (int i = 0; i < params.n; ++i) {
    s.x1[i] = params.box * rng.uniform(i, 0, 101);
    s.x2[i] = params.box * rng.uniform(i, 0, 202);
    s.beta[i] = kTwoPi * rng.uniform(i, 0, 303);
  }
  return s;
}

Swarm make_swarm(const SwarmParams& params, std::vector<double> x1, std::vector<double> x2,
                 std::vector<double> beta) {
  validate_params(params);
  require(static_cast<int>(x1.size()) == params.n && static_cast<int>(x2.size()) == params.n &&
              static_cast<int>(beta.size()) == params.n,
          "make_swarm: state size mismatch");
  require_finite(x1, "make_swarm x1");
  require_finite(x2, "make_swarm x2");
  require_finite(beta, "make_swarm beta");
  Swarm s;
  s.params = params;
  s.x1 = std::move(x1);
  s.x2 = std::move(x2);
  s.beta = std::move(beta);
  for (int i = 0; i < params.n; ++i) {
    s.x1[i] = wrap_box(s.x1[i], params.box);
    s.x2[i] = wrap_box(s.x2[i], params.box);
    s.beta[i] = wrap_angle(s.beta[i]);
  }
  return s;
}

std::vector<double> sample_vmf_angles(int n, double d, double mean_angle, std::uint64_t seed) {
  require(n >= 1, "sample_vmf_angles: need n >= 1");
  require(d > 0.0, "sample_vmf_angles: d must be positive");
  // Inverse CDF on a fine grid; the density is smooth so linear
  // interpolation of the CDF is ample for sampling.
  const int m = 4096;
  const AngularGrid grid(m);
  const std::vector<double> pdf = vmf_density({d, 0.0}, grid);
  std::vector<double> cdf(m + 1, 0.0);
  for (int j = 0; j < m; ++j) cdf[j + 1] = cdf[j] + pdf[j] * grid.weight();
  for (double& c : cdf) c /= cdf[m];
  const CounterRng rng{seed};
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(i, 0, 404);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const int hi = std::max<int>(1, std::min<int>(m, static_cast<int>(it - cdf.begin())));
    const double frac = (u - cdf[hi - 1]) / std::max(cdf[hi] - cdf[hi - 1], 1e-300);
    out[i] = wrap_angle(kTwoPi * (hi - 1 + frac) / m + mean_angle);
  }
  return out;
}

void swarm_step(Swarm& s, double dt, Exec exec) {
  require(dt > 0.0, "swarm_step: dt must be positive");
  const int n = s.params.n;
  const double sigma = std::sqrt(2.0 * s.params.D * dt);
  const CounterRng rng{s.params.seed};

  std::vector<double> target;
  std::vector<std::uint8_t> defined;
  neighbor_targets(s, exec, target, defined);

  std::vector<double> beta_new(n);
  if (s.params.scheme == SdeScheme::EulerMaruyama) {
    parallel_for(exec, n, [&](std::ptrdiff_t ip) {
      const int i = static_cast<int>(ip);
      const double drift =
          defined[i] ? s.params.nu * std::sin(target[i] - s.beta[i]) : 0.0;
      const double noise = (sigma > 0.0) ? sigma * rng.normal(i, s.step_count) : 0.0;
      beta_new[i] = wrap_angle(s.beta[i] + drift * dt + noise);
    });
  } else {
    // Heun: predictor with the same noise increment, trapezoidal drift with
    // neighbor targets recomputed at the predictor state.
    Swarm pred = s;
    std::vector<double> noise(n, 0.0);
    for (int i = 0; i < n; ++i) {
      noise[i] = (sigma > 0.0) ? sigma * rng.normal(i, s.step_count) : 0.0;
      const double drift =
          defined[i] ? s.params.nu * std::sin(target[i] - s.beta[i]) : 0.0;
      pred.beta[i] = wrap_angle(s.beta[i] + drift * dt + noise[i]);
    }
    std::vector<double> target2;
    std::vector<std::uint8_t> defined2;
    neighbor_targets(pred, exec, target2, defined2);
    parallel_for(exec, n, [&](std::ptrdiff_t ip) {
      const int i = static_cast<int>(ip);
      const double d1 = defined[i] ? s.params.nu * std::sin(target[i] - s.beta[i]) : 0.0;
      const double d2 =
          defined2[i] ? s.params.nu * std::sin(target2[i] - pred.beta[i]) : 0.0;
      beta_new[i] = wrap_angle(s.beta[i] + 0.5 * dt * (d1 + d2) + noise[i]);
    });
  }

  parallel_for(exec, n, [&](std::ptrdiff_t ip) {
    const int i = static_cast<int>(ip);
    s.x1[i] = wrap_box(s.x1[i] + std::cos(s.beta[i]) * dt, s.params.box);
    s.x2[i] = wrap_box(s.x2[i] + std::sin(s.beta[i]) * dt, s.params.box);
    s.beta[i] = beta_new[i];
  });
  s.step_count += 1;
  s.time += dt;
}

std::vector<double> empirical_density(const Swarm& s, int n_bins) {
  require(s.params.n >= 1000, "empirical_density: need at least 1000 particles");
  require(n_bins >= 4, "empirical_density: need at least 4 bins");
  std::vector<double> density(n_bins, 0.0);
  const double width = kTwoPi / n_bins;
  for (int i = 0; i < s.params.n; ++i) {
    int b = static_cast<int>(s.beta[i] / width);
    b = std::clamp(b, 0, n_bins - 1);
    density[b] += 1.0;
  }
  const double norm = 1.0 / (s.params.n * width);
  for (double& v : density) v *= norm;
  return density;
}

double mean_heading(const Swarm& s) {
  double jx = 0.0, jy = 0.0;
  for (int i = 0; i < s.params.n; ++i) {
    jx += std::cos(s.beta[i]);
    jy += std::sin(s.beta[i]);
  }
  if (std::hypot(jx, jy) < s.params.j_floor) return 0.0;
  return std::atan2(jy, jx);
}

}  // namespace sokl
