#include "nphase/potential.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>

namespace nphase {

double double_well(double c) {
  const double g = c * (1.0 - c);
  return g * g;
}

double double_well_deriv(double c) { return 2.0 * c * (1.0 - c) * (1.0 - 2.0 * c); }

double double_well_second(double c) { return 2.0 * (6.0 * c * c - 6.0 * c + 1.0); }

double secant_scalar(double a, double b) {
  return (1.0 - a - b) * (a * (1.0 - a) + b * (1.0 - b));
}

// ===================================================================
// PotentialSpec
// ===================================================================

PotentialSpec PotentialSpec::homogeneous(double strength, int n_phases) {
  if (n_phases < 2) throw InvalidInput("need at least 2 phases");
  if (!(strength > 0.0)) throw InvalidInput("potential strength must be positive");
  PotentialSpec spec;
  spec.kind = Kind::homogeneous;
  spec.n_phases = n_phases;
  spec.strength = strength;
  return spec;
}

PotentialSpec PotentialSpec::pairwise(const SurfaceTension& sigma, double s) {
  PotentialSpec spec;
  spec.kind = Kind::pairwise;
  spec.n_phases = sigma.n_phases();
  spec.sigma = sigma.matrix();
  spec.s = s;
  return spec;
}

namespace {

void check_size(const PotentialSpec& spec, const Eigen::VectorXd& c) {
  if (c.size() != spec.n_phases)
    throw InvalidInput("concentration vector has wrong length");
}

// Visit every strictly increasing index quadruple (0-based).
template <typename F>
void for_each_quadruple(int n, F&& fn) {
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        for (int d = c + 1; d < n; ++d) fn(a, b, c, d);
}

}  // namespace

// ===================================================================
// Value / gradient / Hessian
// ===================================================================

double potential_value(const PotentialSpec& spec, const Eigen::VectorXd& c) {
  check_size(spec, c);
  const int n = spec.n_phases;

  if (spec.kind == PotentialSpec::Kind::homogeneous) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += double_well(c(i));
    v *= 2.0 * spec.strength;
    if (n >= 4) {
      double quad = 0.0;
      for_each_quadruple(n, [&](int a, int b, int p, int q) {
        quad += c(a) * c(b) * c(p) * c(q);
      });
      v += 8.0 * spec.strength * quad;
    }
    return v;
  }

  double v = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double sij = spec.sigma(i, j);
      v += 2.0 * sij *
           (double_well(c(i)) + double_well(c(j)) - double_well(c(i) + c(j)));
      if (spec.s != 0.0) {
        double cross = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          const double m = c(i) * c(j) * c(k);
          cross += m * m;
        }
        v += spec.s * 2.0 * sij * cross;
      }
    }
  return v;
}

Eigen::VectorXd potential_gradient(const PotentialSpec& spec,
                                   const Eigen::VectorXd& c) {
  check_size(spec, c);
  const int n = spec.n_phases;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);

  if (spec.kind == PotentialSpec::Kind::homogeneous) {
    for (int i = 0; i < n; ++i) g(i) = 2.0 * spec.strength * double_well_deriv(c(i));
    if (n >= 4) {
      for_each_quadruple(n, [&](int a, int b, int p, int q) {
        const std::array<int, 4> idx{a, b, p, q};
        for (int slot = 0; slot < 4; ++slot) {
          double prod = 8.0 * spec.strength;
          for (int other = 0; other < 4; ++other)
            if (other != slot) prod *= c(idx[other]);
          g(idx[slot]) += prod;
        }
      });
    }
    return g;
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double sij = spec.sigma(i, j);
      const double fij = double_well_deriv(c(i) + c(j));
      g(i) += 2.0 * sij * (double_well_deriv(c(i)) - fij);
      g(j) += 2.0 * sij * (double_well_deriv(c(j)) - fij);
      if (spec.s != 0.0) {
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          // monomial 2 s sigma_ij (c_i c_j c_k)^2
          const double w = 2.0 * spec.s * sij;
          const double ci = c(i), cj = c(j), ck = c(k);
          g(i) += w * 2.0 * ci * cj * cj * ck * ck;
          g(j) += w * 2.0 * cj * ci * ci * ck * ck;
          g(k) += w * 2.0 * ck * ci * ci * cj * cj;
        }
      }
    }
  return g;
}

Eigen::MatrixXd potential_hessian(const PotentialSpec& spec,
                                  const Eigen::VectorXd& c) {
  check_size(spec, c);
  const int n = spec.n_phases;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);

  if (spec.kind == PotentialSpec::Kind::homogeneous) {
    for (int i = 0; i < n; ++i)
      h(i, i) = 2.0 * spec.strength * double_well_second(c(i));
    if (n >= 4) {
      for_each_quadruple(n, [&](int a, int b, int p, int q) {
        const std::array<int, 4> idx{a, b, p, q};
        for (int s1 = 0; s1 < 4; ++s1)
          for (int s2 = s1 + 1; s2 < 4; ++s2) {
            double prod = 8.0 * spec.strength;
            for (int other = 0; other < 4; ++other)
              if (other != s1 && other != s2) prod *= c(idx[other]);
            h(idx[s1], idx[s2]) += prod;
            h(idx[s2], idx[s1]) += prod;
          }
      });
    }
    return h;
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double sij = spec.sigma(i, j);
      const double fij = double_well_second(c(i) + c(j));
      h(i, i) += 2.0 * sij * (double_well_second(c(i)) - fij);
      h(j, j) += 2.0 * sij * (double_well_second(c(j)) - fij);
      h(i, j) -= 2.0 * sij * fij;
      h(j, i) -= 2.0 * sij * fij;
      if (spec.s != 0.0) {
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          const double w = 2.0 * spec.s * sij;
          const double ci = c(i), cj = c(j), ck = c(k);
          h(i, i) += w * 2.0 * cj * cj * ck * ck;
          h(j, j) += w * 2.0 * ci * ci * ck * ck;
          h(k, k) += w * 2.0 * ci * ci * cj * cj;
          const double hij = w * 4.0 * ci * cj * ck * ck;
          const double hik = w * 4.0 * ci * ck * cj * cj;
          const double hjk = w * 4.0 * cj * ck * ci * ci;
          h(i, j) += hij;
          h(j, i) += hij;
          h(i, k) += hik;
          h(k, i) += hik;
          h(j, k) += hjk;
          h(k, j) += hjk;
        }
      }
    }
  return h;
}

// ===================================================================
// Hessian bounds over the dilated simplex
// ===================================================================

HessianBounds hessian_bounds(const PotentialSpec& spec, double margin,
                             double spacing) {
  if (margin < 0.0 || !(spacing > 0.0))
    throw InvalidInput("hessian_bounds: bad sampling parameters");
  const int n = spec.n_phases;

  // Lattice points c_i = -margin + step * m_i with sum(m_i) = total, which
  // puts every point on the dilated unit-sum hyperplane.
  const double span = 1.0 + n * margin;
  const int total = std::max(1, static_cast<int>(std::lround(span / spacing)));
  const double step = span / total;

  HessianBounds bounds;
  Eigen::VectorXd c(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;

  std::vector<int> m(n, 0);
  // enumerate compositions of `total` into n nonnegative parts
  auto visit = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      m[pos] = remaining;
      for (int i = 0; i < n; ++i) c(i) = -margin + step * m[i];
      es.compute(potential_hessian(spec, c), Eigen::EigenvaluesOnly);
      bounds.upper = std::max(bounds.upper, es.eigenvalues().maxCoeff());
      bounds.lower = std::max(bounds.lower, -es.eigenvalues().minCoeff());
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      m[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  visit(visit, 0, total);
  return bounds;
}

// ===================================================================
// Divided differences
// ===================================================================

Eigen::VectorXd monomial_secant(const std::vector<int>& set,
                                const Eigen::VectorXd& c,
                                const Eigen::VectorXd& cs) {
  const int n = static_cast<int>(c.size());
  const int k = static_cast<int>(set.size());
  if (cs.size() != n) throw InvalidInput("monomial_secant: size mismatch");
  if (k < 1 || k > 4) throw InvalidInput("monomial_secant: set size must be 1..4");
  for (int idx : set)
    if (idx < 1 || idx > n) throw InvalidInput("monomial_secant: index out of range");

  static constexpr std::array<double, 5> factorial{1, 1, 2, 6, 24};

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int l = 0; l < k; ++l) {
    // remaining indices once set[l] is taken out
    std::vector<int> rest;
    rest.reserve(k - 1);
    for (int t = 0; t < k; ++t)
      if (t != l) rest.push_back(set[t]);

    double comp = 0.0;
    const int subsets = 1 << (k - 1);
    for (int mask = 0; mask < subsets; ++mask) {
      double qc = 1.0, qs = 1.0;
      int size = 0;
      for (int t = 0; t < k - 1; ++t) {
        if (mask & (1 << t)) {
          qc *= c(rest[t] - 1);
          ++size;
        } else {
          qs *= cs(rest[t] - 1);
        }
      }
      comp += factorial[size] * factorial[k - size - 1] * qc * qs;
    }
    out(set[l] - 1) += comp / factorial[k];
  }
  return out;
}

Eigen::VectorXd potential_secant(const PotentialSpec& spec,
                                 const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& cs) {
  check_size(spec, c);
  check_size(spec, cs);
  const int n = spec.n_phases;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);

  if (spec.kind == PotentialSpec::Kind::homogeneous) {
    for (int i = 0; i < n; ++i)
      out(i) = 2.0 * spec.strength * secant_scalar(c(i), cs(i));
    if (n >= 4) {
      for_each_quadruple(n, [&](int a, int b, int p, int q) {
        out += 8.0 * spec.strength *
               monomial_secant({a + 1, b + 1, p + 1, q + 1}, c, cs);
      });
    }
    return out;
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double sij = spec.sigma(i, j);
      const double pair_c = secant_scalar(c(i) + c(j), cs(i) + cs(j));
      out(i) += 2.0 * sij * (secant_scalar(c(i), cs(i)) - pair_c);
      out(j) += 2.0 * sij * (secant_scalar(c(j), cs(j)) - pair_c);
      if (spec.s != 0.0) {
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          const double sum =
              c(i) * c(j) * c(k) + cs(i) * cs(j) * cs(k);
          out += 2.0 * spec.s * sij * sum *
                 monomial_secant({i + 1, j + 1, k + 1}, c, cs);
        }
      }
    }
  return out;
}

ConcentrationVector ConcentrationVector::from(const Eigen::VectorXd& c) {
  if (std::abs(c.sum() - 1.0) > 1e-10)
    throw InvalidInput("concentrations must sum to 1");
  return ConcentrationVector(c);
}

}  // namespace nphase
