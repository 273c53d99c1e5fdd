#include "nphase/tension.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nphase {

namespace {

constexpr double kRelTol = 1e-12;

std::string entry_name(int i, int j) {
  std::ostringstream os;
  os << "(" << i + 1 << "," << j + 1 << ")";
  return os.str();
}

}  // namespace

// ===================================================================
// SurfaceTension
// ===================================================================

SurfaceTension SurfaceTension::validate(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols())
    throw InvalidInput("tension matrix must be square");
  const int n = static_cast<int>(sigma.rows());
  if (n < 2) throw InvalidInput("need at least 2 phases");

  const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1.0);
  for (int i = 0; i < n; ++i) {
    if (std::abs(sigma(i, i)) > kRelTol * scale)
      throw InvalidInput("tension diagonal entry " + entry_name(i, i) +
                         " must be zero");
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(sigma(i, j) - sigma(j, i)) > kRelTol * scale)
        throw InvalidInput("tension matrix not symmetric at entry " +
                           entry_name(i, j));
      if (!(sigma(i, j) > 0.0))
        throw InvalidInput("tension entry " + entry_name(i, j) +
                           " must be positive");
    }
  }
  Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  sym.diagonal().setZero();
  return SurfaceTension(std::move(sym));
}

// ===================================================================
// Reduced pair matrix and SPD tests
// ===================================================================

Eigen::MatrixXd reduced_tensions(const SurfaceTension& sigma, int m) {
  const int n = sigma.n_phases();
  if (m < 1 || m > n) throw InvalidInput("reduced_tensions: phase index out of range");
  std::vector<int> keep;
  keep.reserve(n - 1);
  for (int i = 1; i <= n; ++i)
    if (i != m) keep.push_back(i);

  Eigen::MatrixXd out(n - 1, n - 1);
  for (int a = 0; a < n - 1; ++a)
    for (int b = 0; b < n - 1; ++b)
      out(a, b) =
          0.5 * (sigma(keep[a], m) + sigma(keep[b], m) - sigma(keep[a], keep[b]));
  return out;
}

bool reduced_spd(const SurfaceTension& sigma, int m) {
  const Eigen::MatrixXd red = reduced_tensions(sigma, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(red);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return hi > 0.0 && lo > kRelTol * hi;
}

SpdReport spd_check(const SurfaceTension& sigma) {
  const int n = sigma.n_phases();
  const int m = n - 1;
  Eigen::MatrixXd s = reduced_tensions(sigma, n);

  // Pivoted Cholesky with diagonal pivoting: P s P^T = L L^T. A nonpositive
  // pivot means s is not positive definite and no simplex embedding exists.
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  const double tol = kRelTol * std::max(s.diagonal().maxCoeff(), 0.0);

  for (int j = 0; j < m; ++j) {
    int piv = j;
    for (int i = j + 1; i < m; ++i)
      if (s(i, i) > s(piv, piv)) piv = i;
    if (piv != j) {
      s.row(j).swap(s.row(piv));
      s.col(j).swap(s.col(piv));
      L.row(j).swap(L.row(piv));
      std::swap(perm[j], perm[piv]);
    }
    const double d = s(j, j);
    if (!(d > tol) || !std::isfinite(d)) return SpdReport{};
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < m; ++i) L(i, j) = s(i, j) / L(j, j);
    for (int i = j + 1; i < m; ++i)
      for (int k = j + 1; k <= i; ++k) {
        s(i, k) -= L(i, j) * L(k, j);
        s(k, i) = s(i, k);
      }
  }

  // s(orig i, orig j) = row_i(L') . row_j(L') after undoing the permutation,
  // so vertex p_i is the permuted row of L; p_N is the origin.
  Eigen::MatrixXd vertices = Eigen::MatrixXd::Zero(m, n);
  for (int newpos = 0; newpos < m; ++newpos)
    vertices.col(perm[newpos]) = L.row(newpos).transpose();

  SpdReport rep;
  rep.is_spd = true;
  rep.vertices = std::move(vertices);
  return rep;
}

// ===================================================================
// PhaseMap
// ===================================================================

PhaseMap PhaseMap::general(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols()) throw InvalidInput("phase map matrix must be square");
  const int n = static_cast<int>(A.rows());
  if (b.size() != n) throw InvalidInput("phase map offset has wrong size");

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(kRelTol);
  if (!lu.isInvertible()) throw InvalidInput("phase map matrix is singular");

  PhaseMap map;
  map.A = A;
  map.b = b;
  map.d = A.transpose().fullPivLu().solve(Eigen::VectorXd::Ones(n));
  map.P = Eigen::MatrixXd::Identity(n, n) -
          map.d * map.d.transpose() / map.d.squaredNorm();
  return map;
}

PhaseMap PhaseMap::special(int n_phases) {
  if (n_phases < 2) throw InvalidInput("need at least 2 phases");
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n_phases, n_phases);
  A.row(n_phases - 1).setOnes();
  return general(A, Eigen::VectorXd::Zero(n_phases));
}

// ===================================================================
// Coefficient assembly
// ===================================================================

namespace {

// Smallest tangent eigenvalue and tangent pseudo-inverse of the
// concentration-space coupling. The matrix annihilates 1; shifting by
// theta/N * 11^T moves that direction to eigenvalue theta so a plain
// eigensolve separates it from the tangent spectrum.
void tangent_spectrum(const Eigen::MatrixXd& cap_tangent, double* eig_min,
                      Eigen::MatrixXd* pinv) {
  const int n = static_cast<int>(cap_tangent.rows());
  double theta = cap_tangent.trace();
  if (!(theta > 0.0)) theta = std::abs(theta) + 1.0;

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd deflated =
      cap_tangent + (theta / n) * ones * ones.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(deflated);

  int artificial = 0;
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    const double overlap = std::abs(es.eigenvectors().col(i).dot(ones));
    if (overlap > best) {
      best = overlap;
      artificial = i;
    }
  }

  double lo = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == artificial) continue;
    lo = std::min(lo, es.eigenvalues()(i));
    scale = std::max(scale, std::abs(es.eigenvalues()(i)));
  }
  *eig_min = lo;

  *pinv = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i == artificial) continue;
    const double lam = es.eigenvalues()(i);
    if (std::abs(lam) <= kRelTol * scale) continue;
    Eigen::VectorXd v = es.eigenvectors().col(i);
    v -= (v.sum() / n) * ones;  // guard against degenerate mixing with 1
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    v /= norm;
    *pinv += v * v.transpose() / lam;
  }
}

CoefficientMatrix finish_coefficients(const SurfaceTension& sigma,
                                      Eigen::MatrixXd lambda,
                                      const PhaseMap& map) {
  const int n = sigma.n_phases();
  CoefficientMatrix out;
  out.capillary = std::move(lambda);
  out.reduced = reduced_tensions(sigma, n);

  const Eigen::MatrixXd pc =
      Eigen::MatrixXd::Identity(n, n) -
      Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd apc = map.A * pc;
  out.capillary_tangent = apc.transpose() * out.capillary * apc;
  // symmetrize away assembly roundoff; the result is symmetric by theory
  out.capillary_tangent =
      0.5 * (out.capillary_tangent + out.capillary_tangent.transpose()).eval();

  tangent_spectrum(out.capillary_tangent, &out.tangent_eig_min,
                   &out.tangent_pinv);
  out.is_spd = spd_check(sigma).is_spd;
  return out;
}

}  // namespace

CoefficientMatrix assemble_coefficients(
    const SurfaceTension& sigma, const PhaseMap& map,
    const std::vector<std::pair<int, int>>& pair_order) {
  const int n = sigma.n_phases();
  if (map.A.rows() != n) throw InvalidInput("phase map size does not match tensions");
  const int npairs = n * (n - 1) / 2;
  if (static_cast<int>(pair_order.size()) != npairs)
    throw InvalidInput("pair enumeration must cover each unordered pair once");

  // Edge vectors between phase vertices a_k = A e_k; all lie in the
  // hyperplane d.v = 0, so every dyad L L^T annihilates d.
  std::vector<Eigen::VectorXd> edges;
  edges.reserve(npairs);
  Eigen::VectorXd rhs(npairs);
  for (int idx = 0; idx < npairs; ++idx) {
    const auto [k, l] = pair_order[idx];
    if (k < 1 || l < 1 || k > n || l > n || k == l)
      throw InvalidInput("invalid phase pair in enumeration");
    edges.push_back(map.A.col(k - 1) - map.A.col(l - 1));
    rhs(idx) = 4.5 * sigma(k, l);
  }

  // Gram system of the dyad basis under the Frobenius inner product:
  // <L_a L_a^T, L_b L_b^T> = (L_a . L_b)^2.
  Eigen::MatrixXd gram(npairs, npairs);
  for (int a = 0; a < npairs; ++a)
    for (int b = 0; b < npairs; ++b) {
      const double dot = edges[a].dot(edges[b]);
      gram(a, b) = dot * dot;
    }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible())
    throw InvalidInput("pair dyads are degenerate; phase map is unsuitable");
  const Eigen::VectorXd alpha = lu.solve(rhs);

  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(n, n);
  for (int idx = 0; idx < npairs; ++idx)
    lambda += alpha(idx) * edges[idx] * edges[idx].transpose();

  return finish_coefficients(sigma, std::move(lambda), map);
}

CoefficientMatrix assemble_coefficients(const SurfaceTension& sigma,
                                        const PhaseMap& map) {
  std::vector<std::pair<int, int>> pairs;
  const int n = sigma.n_phases();
  for (int k = 1; k <= n; ++k)
    for (int l = k + 1; l <= n; ++l) pairs.emplace_back(k, l);
  return assemble_coefficients(sigma, map, pairs);
}

CoefficientMatrix assemble_coefficients_special(const SurfaceTension& sigma) {
  const int n = sigma.n_phases();
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(n, n);
  lambda.topLeftCorner(n - 1, n - 1) = 4.5 * reduced_tensions(sigma, n);
  return finish_coefficients(sigma, std::move(lambda), PhaseMap::special(n));
}

}  // namespace nphase
