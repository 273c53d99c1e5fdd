#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "nphase/errors.hpp"

namespace nphase {

// Pairwise surface tensions between N phases: symmetric, zero diagonal,
// positive off-diagonal. Phase indices are 1-based in the public interface.
class SurfaceTension {
 public:
  // Validates and takes ownership. Throws InvalidInput naming the first
  // offending entry.
  static SurfaceTension validate(const Eigen::MatrixXd& sigma);

  int n_phases() const { return static_cast<int>(mat_.rows()); }
  double operator()(int i, int j) const { return mat_(i - 1, j - 1); }
  const Eigen::MatrixXd& matrix() const { return mat_; }

 private:
  explicit SurfaceTension(Eigen::MatrixXd m) : mat_(std::move(m)) {}
  Eigen::MatrixXd mat_;
};

// Pair matrix with phase m removed: entry (i,j) = (sigma_im + sigma_jm -
// sigma_ij)/2 over the remaining phases in increasing order. m is 1-based.
Eigen::MatrixXd reduced_tensions(const SurfaceTension& sigma, int m);

// True when reduced_tensions(sigma, m) is symmetric positive definite,
// decided by eigensolve with a scale-invariant threshold.
bool reduced_spd(const SurfaceTension& sigma, int m);

// Outcome of the simplex-embedding test. When the tension set admits a
// nondegenerate simplex with |p_i - p_j|^2 = sigma_ij the vertices are
// returned: column i (0-based) holds p_{i+1} in R^{N-1}, and p_N = 0.
struct SpdReport {
  bool is_spd = false;
  std::optional<Eigen::MatrixXd> vertices;  // (N-1) x N when present
};

// Attempts a pivoted symmetric factorization of the reduced pair matrix.
// A nonpositive pivot means no embedding exists and is_spd = false.
SpdReport spd_check(const SurfaceTension& sigma);

// Linear change of variables phi = A c + b between concentrations and the
// phase variables the schemes act on.
struct PhaseMap {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd d;  // A^{-T} 1, normal of the phase-variable hyperplane
  Eigen::MatrixXd P;  // I - d d^T / |d|^2

  // Any invertible A. Throws InvalidInput when A is (numerically) singular.
  static PhaseMap general(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

  // A = identity with the last row replaced by ones, b = 0. In these
  // variables phi_i = c_i for i < N and phi_N = 1.
  static PhaseMap special(int n_phases);
};

// Gradient coupling coefficients determined by the tension set.
struct CoefficientMatrix {
  Eigen::MatrixXd capillary;         // N x N, annihilates map.d
  Eigen::MatrixXd reduced;           // (N-1)x(N-1) pair matrix, phase N removed
  Eigen::MatrixXd capillary_tangent; // N x N, invariant under the map choice
  Eigen::MatrixXd tangent_pinv;      // pseudo-inverse on the tangent space
  double tangent_eig_min = 0.0;      // smallest tangent eigenvalue
  bool is_spd = false;
};

// Solves the interpolation conditions (L_kl L_kl^T) : Lambda = 9/2 sigma_kl
// over the span of the pair dyads L_kl = a_k - a_l (columns of A^{-T}-dual
// basis; here a_k is the k-th column of the inverse-transpose image of e_k
// under the map). The solution is unique in that span.
CoefficientMatrix assemble_coefficients(const SurfaceTension& sigma,
                                        const PhaseMap& map);

// Same, but with an explicit enumeration order of the pairs (k,l), 1-based.
// The result does not depend on the order; exposed for verification.
CoefficientMatrix assemble_coefficients(
    const SurfaceTension& sigma, const PhaseMap& map,
    const std::vector<std::pair<int, int>>& pair_order);

// Closed form for the special map: capillary = blockdiag(9/2 * reduced, 0).
CoefficientMatrix assemble_coefficients_special(const SurfaceTension& sigma);

}  // namespace nphase
