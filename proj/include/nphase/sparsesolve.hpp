#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <vector>

#include "nphase/errors.hpp"
#include "nphase/fem.hpp"

namespace nphase {

// Additive operator term: y_i += coupling(i,j) * (op * x_j).
// The scalar operator is referenced, not owned; it must outlive the system.
struct KronTerm {
  Eigen::MatrixXd coupling;
  const SpMat* op = nullptr;
};

// Per-node dense coupling with a diagonal weight:
// y(:,p) += weights(p) * block_p * x(:,p).
// blocks holds either a single matrix shared by all nodes or one per node.
struct NodalTerm {
  Eigen::VectorXd weights;
  std::vector<Eigen::MatrixXd> blocks;
};

// Scalar operator applied after a per-node coupling:
// y_i += scale * op * u_i with u(:,p) = block_p * x(:,p).
// Generally asymmetric even for symmetric blocks (Newton Jacobians of
// consistent-mass nonlinear terms have this shape).
struct SandwichTerm {
  const SpMat* op = nullptr;
  std::vector<Eigen::MatrixXd> blocks;
  double scale = 1.0;
};

// Linear system over an m-component nodal field stored component-major
// (component i occupies rows [i*nodes, (i+1)*nodes)). The operator is a sum
// of coupling-times-scalar-operator terms plus nodal blocks; it can be
// applied matrix-free or assembled into one sparse matrix.
class BlockSystem {
 public:
  BlockSystem(int components, int nodes);

  void add_kron(Eigen::MatrixXd coupling, const SpMat& op);
  void add_nodal(Eigen::VectorXd weights, std::vector<Eigen::MatrixXd> blocks);
  // One block per node; the sandwich couples nodes through op, so the system
  // is marked asymmetric.
  void add_sandwich(const SpMat& op, std::vector<Eigen::MatrixXd> blocks,
                    double scale = 1.0);

  int components() const { return components_; }
  int nodes() const { return nodes_; }
  Eigen::Index size() const {
    return static_cast<Eigen::Index>(components_) * nodes_;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd diagonal() const;
  SpMat assemble() const;

  Eigen::VectorXd rhs;
  bool symmetric = true;

 private:
  int components_;
  int nodes_;
  std::vector<KronTerm> kron_;
  std::vector<NodalTerm> nodal_;
  std::vector<SandwichTerm> sandwich_;
};

struct SolveStats {
  int iterations = 0;
  // True relative residual of the returned solution.
  double residual = 0.0;
  // Per-iteration residual norms; nonincreasing for solve_spd.
  std::vector<double> history;
};

// Preconditioned conjugate-residual solve of a symmetric positive-definite
// block system with a Jacobi preconditioner. max_iter < 0 selects the
// default 10*sqrt(dof) + 1000. An initial guess (time steppers pass the
// previous state) is returned untouched when it already meets the tolerance.
// Throws SolveError on non-convergence.
Eigen::VectorXd solve_spd(const BlockSystem& sys, double tol = 1e-9,
                          SolveStats* stats = nullptr, int max_iter = -1,
                          const Eigen::VectorXd* initial_guess = nullptr);

// Direct sparse factorization of an assembled block system, reusable across
// right-hand sides (factorization is the expensive part).
class SaddleSolver {
 public:
  explicit SaddleSolver(const BlockSystem& sys, double tol = 1e-9);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs,
                        SolveStats* stats = nullptr) const;

 private:
  SpMat matrix_;
  Eigen::SparseLU<SpMat> lu_;
  double tol_;
};

// One-shot direct solve of a symmetric indefinite (or any nonsingular)
// block system.
Eigen::VectorXd solve_saddle(const BlockSystem& sys, double tol = 1e-9,
                             SolveStats* stats = nullptr);

// Direct factorization reused across Newton iterations and steps. Symbolic
// analysis is redone only when the sparsity pattern changes; the numeric
// factorization only when the caller refreshes it. Solving against a
// deliberately stale factorization yields chord (frozen-Jacobian) Newton
// steps; the outer loop still checks the true nonlinear residual, so
// stopping criteria are unchanged.
class JacobianCache {
 public:
  bool ready() const { return ready_; }
  void reset() { ready_ = false; }

  // Assembles and numerically factorizes `sys`.
  void factorize(const BlockSystem& sys);

  // Solves against the last factorized matrix; the residual check certifies
  // the linear solve relative to that matrix.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double tol = 1e-9,
                        SolveStats* stats = nullptr) const;

 private:
  SpMat matrix_;
  Eigen::SparseLU<SpMat> lu_;
  bool ready_ = false;
  bool analyzed_ = false;
};

struct NewtonOptions {
  double rel_tol = 1e-5;
  double abs_tol = 1e-12;
  int max_iter = 50;
};

struct NewtonStats {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  // Relative residual of the last inner linear solve.
  double linear_residual = 0.0;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Solves J(x) * delta = r for delta. How the Jacobian system is formed and
// solved (solve_spd or a saddle factorization) is the caller's choice.
using JacobianSolveFn = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x, const Eigen::VectorXd& r, SolveStats*)>;

// Plain Newton iteration (no line search). Stops once the residual norm is
// below rel_tol times the initial norm or below abs_tol; throws NewtonError
// carrying the residual-norm history when max_iter is exhausted.
Eigen::VectorXd newton_solve(const ResidualFn& residual,
                             const JacobianSolveFn& jacobian_solve,
                             Eigen::VectorXd guess,
                             const NewtonOptions& opts = {},
                             NewtonStats* stats = nullptr);

}  // namespace nphase
