#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nphase/fem.hpp"

namespace nphase {

// Deterministic random source shared by the initial-condition generators.
// The engine is the 64-bit Mersenne Twister exactly as specified by the
// C++ standard (mt19937_64), and the variate mappings below are fixed here
// rather than delegated to the standard distributions (whose output is
// implementation-defined). Fields therefore reproduce bit-for-bit for a
// given seed on any conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1): top 53 bits of one engine draw.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n): scaled floor of one uniform draw.
  int uniform_int(int n) {
    int v = static_cast<int>(uniform() * n);
    return v < n ? v : n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

// Axis-aligned rectangle [x0,x1] x [y0,y1] assigned to one phase.
struct Region {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  int phase = 0;  // 1-based
};

// Voronoi-like grain tessellation: `count` circles with centers uniform in
// the unit square, radii uniform in [r_min, r_max] and phases uniform in
// 1..n_phases. Each node takes the phase of the last circle covering it;
// uncovered nodes take the phase of the nearest circle center. The result
// is a sharp indicator field.
PhaseField init_grains(const Mesh& mesh, int n_phases, int count, double r_min,
                       double r_max, std::uint64_t seed);

// Mixture rho perturbed inside the constraint tangent space:
// c = rho + (amplitude * N / 2) * P * xi with xi_i iid uniform on [0,1] and
// P the centering projector. Per-node concentration sums are exactly 1; for
// N = 3 the largest componentwise deviation equals `amplitude`.
PhaseField init_spinodal(const Mesh& mesh, const Eigen::VectorXd& rho,
                         double amplitude, std::uint64_t seed);

// Sharp field from a rectangle list; later entries overwrite earlier ones.
// Throws ConfigError when some node is covered by no rectangle.
PhaseField init_regions(const Mesh& mesh, const std::vector<Region>& regions,
                        int n_phases);

// Replaces the jump of a sharp indicator field by a linear ramp of the
// (grid-approximated) signed distance, clamped to [0,1] and renormalized,
// so the transition has width `width`. width = 0 returns the input.
PhaseField smooth_sharp_field(const PhaseField& sharp, double width);

}  // namespace nphase
