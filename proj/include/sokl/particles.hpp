#pragma once

#include <cstdint>
#include <vector>

#include "sokl/collision.hpp"
#include "sokl/grids.hpp"
#include "sokl/parallel.hpp"

namespace sokl {

/// Counter-based normal generator: the draw for (particle, step) depends only
/// on the key, never on call order, so threaded runs are bitwise reproducible.
struct CounterRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix(std::uint64_t z);
  /// Uniform in (0, 1), keyed by (k1, k2, salt).
  double uniform(std::uint64_t k1, std::uint64_t k2, std::uint64_t salt) const;
  /// Standard normal via Box-Muller on two keyed uniforms.
  double normal(std::uint64_t particle, std::uint64_t step) const;
};

enum class SdeScheme { EulerMaruyama, Heun };

struct SwarmParams {
  int n = 0;               // particle count
  double box = 1.0;        // square torus side
  double nu = 1.0;         // alignment relaxation rate
  double D = 0.0;          // angular diffusion
  double R = 0.25;         // interaction radius
  double j_floor = kCurrentFloor;
  std::uint64_t seed = 1;
  SdeScheme scheme = SdeScheme::EulerMaruyama;
};

struct Swarm {
  SwarmParams params;
  std::vector<double> x1, x2;  // positions in [0, box)
  std::vector<double> beta;    // headings in [0, 2 pi)
  std::uint64_t step_count = 0;
  double time = 0.0;
};

/// Uniform positions and headings drawn from the keyed counter generator.
Swarm make_uniform_swarm(const SwarmParams& params);

/// Swarm with caller-provided state (validated).
Swarm make_swarm(const SwarmParams& params, std::vector<double> x1, std::vector<double> x2,
                 std::vector<double> beta);

/// Headings drawn from the von Mises-Fisher density by inverse-CDF sampling.
std::vector<double> sample_vmf_angles(int n, double d, double mean_angle, std::uint64_t seed);

/// One step: each particle steers toward the mean heading of its neighbors
/// within radius R (itself included), with rate nu and angular noise of
/// strength sqrt(2 D). Positions advance with unit speed along the heading.
/// Neighbor sums use a cell list; when R covers the whole torus a global sum
/// is used instead. Results do not depend on the execution policy.
void swarm_step(Swarm& swarm, double dt, Exec exec = Exec::Serial);

/// Unit-mass angular histogram density on n_bins uniform bins
/// (requires at least 1000 particles).
std::vector<double> empirical_density(const Swarm& swarm, int n_bins);

/// Mean heading angle of the swarm (undefined directions fall back to 0).
double mean_heading(const Swarm& swarm);

}  // namespace sokl
