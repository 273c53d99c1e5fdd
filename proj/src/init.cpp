#include "nphase/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nphase/errors.hpp"

namespace nphase {

namespace {

PhaseField indicator_field(const Mesh& mesh, int n_phases,
                           const std::vector<int>& phase_at_node) {
  PhaseField field(mesh, n_phases);
  const int nodes = mesh.node_count();
  for (int v = 0; v < nodes; ++v) {
    int p = phase_at_node[static_cast<std::size_t>(v)];
    if (p < n_phases) field.component(p - 1)(v) = 1.0;
  }
  return field;
}

}  // namespace

PhaseField init_grains(const Mesh& mesh, int n_phases, int count, double r_min,
                       double r_max, std::uint64_t seed) {
  if (n_phases < 2) throw InvalidInput("grains need at least two phases");
  if (count < 1) throw InvalidInput("grain count must be at least 1");
  if (!(r_min > 0.0) || r_min > r_max)
    throw InvalidInput("grain radii must satisfy 0 < r_min <= r_max");

  struct Circle {
    double cx, cy, r2;
    int phase;
  };
  Rng rng(seed);
  std::vector<Circle> circles;
  circles.reserve(static_cast<std::size_t>(count));
  // Fixed draw order per circle: center x, center y, radius, phase.
  for (int g = 0; g < count; ++g) {
    Circle c;
    c.cx = rng.uniform();
    c.cy = rng.uniform();
    double r = rng.uniform(r_min, r_max);
    c.r2 = r * r;
    c.phase = 1 + rng.uniform_int(n_phases);
    circles.push_back(c);
  }

  const int nodes = mesh.node_count();
  std::vector<int> phase_at_node(static_cast<std::size_t>(nodes), 0);
  for (int v = 0; v < nodes; ++v) {
    Eigen::Vector2d p = mesh.node_coords(v);
    int chosen = 0;
    for (int g = count - 1; g >= 0; --g) {
      const Circle& c = circles[static_cast<std::size_t>(g)];
      double dx = p.x() - c.cx, dy = p.y() - c.cy;
      if (dx * dx + dy * dy <= c.r2) {
        chosen = c.phase;
        break;
      }
    }
    if (chosen == 0) {
      double best = std::numeric_limits<double>::infinity();
      for (const Circle& c : circles) {
        double dx = p.x() - c.cx, dy = p.y() - c.cy;
        double d2 = dx * dx + dy * dy;
        if (d2 < best) {
          best = d2;
          chosen = c.phase;
        }
      }
    }
    phase_at_node[static_cast<std::size_t>(v)] = chosen;
  }
  return indicator_field(mesh, n_phases, phase_at_node);
}

PhaseField init_spinodal(const Mesh& mesh, const Eigen::VectorXd& rho,
                         double amplitude, std::uint64_t seed) {
  const int n_phases = static_cast<int>(rho.size());
  if (n_phases < 2) throw InvalidInput("mixture needs at least two phases");
  if (rho.minCoeff() < 0.0 || std::abs(rho.sum() - 1.0) > 1e-9)
    throw InvalidInput("mixture fractions must be nonnegative and sum to 1");
  if (amplitude < 0.0) throw InvalidInput("perturbation amplitude < 0");

  PhaseField field(mesh, n_phases);
  const int nodes = mesh.node_count();
  const double scale = 0.5 * amplitude * n_phases;
  Rng rng(seed);
  Eigen::VectorXd xi(n_phases);
  for (int v = 0; v < nodes; ++v) {
    for (int i = 0; i < n_phases; ++i) xi(i) = rng.uniform();
    double mean = xi.mean();
    for (int i = 0; i < n_phases - 1; ++i)
      field.component(i)(v) = rho(i) + scale * (xi(i) - mean);
  }
  return field;
}

PhaseField init_regions(const Mesh& mesh, const std::vector<Region>& regions,
                        int n_phases) {
  if (n_phases < 2) throw InvalidInput("regions need at least two phases");
  for (const Region& r : regions)
    if (r.phase < 1 || r.phase > n_phases)
      throw InvalidInput("region phase index out of range");

  const int nodes = mesh.node_count();
  std::vector<int> phase_at_node(static_cast<std::size_t>(nodes), 0);
  for (int v = 0; v < nodes; ++v) {
    Eigen::Vector2d p = mesh.node_coords(v);
    int chosen = 0;
    for (auto it = regions.rbegin(); it != regions.rend(); ++it) {
      if (p.x() >= it->x0 && p.x() <= it->x1 && p.y() >= it->y0 &&
          p.y() <= it->y1) {
        chosen = it->phase;
        break;
      }
    }
    if (chosen == 0)
      throw ConfigError("regions leave node (" + std::to_string(p.x()) + ", " +
                        std::to_string(p.y()) + ") uncovered");
    phase_at_node[static_cast<std::size_t>(v)] = chosen;
  }
  return indicator_field(mesh, n_phases, phase_at_node);
}

PhaseField smooth_sharp_field(const PhaseField& sharp, double width) {
  if (width < 0.0) throw InvalidInput("smoothing width < 0");
  if (width == 0.0) return sharp;
  const Mesh& mesh = sharp.mesh;
  const int nodes = mesh.node_count();
  const int n_phases = sharp.n_phases;

  std::vector<int> phase_at_node(static_cast<std::size_t>(nodes));
  for (int v = 0; v < nodes; ++v) {
    Eigen::VectorXd c = sharp.full_at(v);
    int best = 0;
    c.maxCoeff(&best);
    phase_at_node[static_cast<std::size_t>(v)] = best + 1;
  }

  // Nearest node of each phase, by brute force over node pairs. Init-time
  // only; quadratic in node count but cheap at solver-relevant grids.
  std::vector<std::vector<Eigen::Vector2d>> sites(
      static_cast<std::size_t>(n_phases) + 1);
  for (int v = 0; v < nodes; ++v)
    sites[static_cast<std::size_t>(phase_at_node[static_cast<std::size_t>(v)])]
        .push_back(mesh.node_coords(v));

  const double half_h = 0.5 * mesh.h();
  PhaseField out(mesh, n_phases);
  Eigen::VectorXd c(n_phases);
  for (int v = 0; v < nodes; ++v) {
    Eigen::Vector2d p = mesh.node_coords(v);
    int own = phase_at_node[static_cast<std::size_t>(v)];
    for (int i = 1; i <= n_phases; ++i) {
      double d2 = std::numeric_limits<double>::infinity();
      if (i == own) {
        // Distance to the nearest differently assigned node.
        for (int j = 1; j <= n_phases; ++j) {
          if (j == own) continue;
          for (const Eigen::Vector2d& q : sites[static_cast<std::size_t>(j)])
            d2 = std::min(d2, (p - q).squaredNorm());
        }
      } else {
        for (const Eigen::Vector2d& q : sites[static_cast<std::size_t>(i)])
          d2 = std::min(d2, (p - q).squaredNorm());
      }
      // Signed distance to the set boundary, which lies half a spacing
      // beyond the nearest opposite node; positive inside phase i.
      double d = std::isfinite(d2) ? std::sqrt(d2) - half_h : 1.0;
      if (i != own) d = -d;
      c(i - 1) = std::clamp(0.5 + d / width, 0.0, 1.0);
    }
    double sum = c.sum();
    if (sum <= 0.0) sum = 1.0;
    for (int i = 0; i < n_phases - 1; ++i) out.component(i)(v) = c(i) / sum;
  }
  return out;
}

}  // namespace nphase
