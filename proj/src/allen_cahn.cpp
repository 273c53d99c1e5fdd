#include "nphase/allen_cahn.hpp"

#include <cmath>
#include <limits>

#include "stepper_util.hpp"

namespace nphase {

namespace {

void check_inputs(const PhaseField& state, const AcConfig& cfg,
                  const CoefficientMatrix& coeff, const PotentialSpec& spec,
                  const ScalarOperators& ops) {
  if (!coeff.is_spd)
    throw InvalidInput("tension set is not simplicial; step rejected");
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta) || !(cfg.gamma > 0.0) ||
      !std::isfinite(cfg.gamma) || !(cfg.k > 0.0) || !std::isfinite(cfg.k))
    throw InvalidInput("eta, gamma and k must be positive and finite");
  if (spec.n_phases != state.n_phases)
    throw InvalidInput("potential and field phase counts differ");
  if (coeff.reduced.rows() != state.n_phases - 1)
    throw InvalidInput("coefficient matrix phase count differs");
  if (ops.mass.rows() != state.mesh.node_count())
    throw InvalidInput("operators assembled for a different mesh");
}

PhaseField with_data(const PhaseField& like, Eigen::VectorXd data) {
  PhaseField out(like.mesh, like.n_phases);
  out.data = std::move(data);
  return out;
}

}  // namespace

PhaseField ac_step_semi_implicit(const PhaseField& state, const AcConfig& cfg,
                                 const CoefficientMatrix& coeff,
                                 const PotentialSpec& spec,
                                 const ScalarOperators& ops,
                                 StepStats* stats) {
  check_inputs(state, cfg, coeff, spec, ops);
  const int m = state.stored_components();
  const int nodes = state.mesh.node_count();

  const Eigen::MatrixXd mass_c = (cfg.gamma / cfg.k) * 4.5 * coeff.reduced;
  const Eigen::MatrixXd stiff_c = cfg.eta * 4.5 * coeff.reduced;

  // The explicit gradient term is paired with the consistent mass, like the
  // time-derivative term; lumping it would weaken the stability constant on
  // rough modes by the local mass ratio.
  BlockSystem sys(m, nodes);
  sys.add_kron(mass_c, ops.mass);
  sys.add_kron(stiff_c, ops.stiffness);
  sys.rhs = detail::kron_apply(mass_c, ops.mass, state.data) -
            detail::kron_apply(
                (1.0 / cfg.eta) * Eigen::MatrixXd::Identity(m, m), ops.mass,
                detail::reduced_gradient(state.data, state.n_phases, nodes,
                                         spec));

  SolveStats lin;
  Eigen::VectorXd sol = solve_spd(sys, cfg.solver_tol, &lin, -1, &state.data);
  if (stats) *stats = {0, lin.residual};
  return with_data(state, std::move(sol));
}

namespace {

// Decides per Newton iteration whether the held factorization may serve as a
// frozen Jacobian. A chain that loses contraction or runs long refreshes at
// the current iterate, so stale-Jacobian chains degrade into plain Newton
// rather than stalling.
class ChordPolicy {
 public:
  explicit ChordPolicy(JacobianCache* cache) : cache_(cache) {}

  bool reuse(double rnorm) {
    ++chain_;
    const bool ok = cache_ && cache_->ready() && rnorm < prev_ && chain_ < 8;
    prev_ = rnorm;
    return ok;
  }

  Eigen::VectorXd refresh_and_solve(const BlockSystem& jac,
                                    const Eigen::VectorXd& r, double tol,
                                    SolveStats* lin) {
    chain_ = 0;
    if (!cache_) return solve_saddle(jac, tol, lin);
    cache_->factorize(jac);
    return cache_->solve(r, tol, lin);
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& r, double tol,
                        SolveStats* lin) const {
    return cache_->solve(r, tol, lin);
  }

 private:
  JacobianCache* cache_;
  int chain_ = 0;
  double prev_ = std::numeric_limits<double>::infinity();
};

}  // namespace

PhaseField ac_step_fully_implicit(const PhaseField& state, const AcConfig& cfg,
                                  const CoefficientMatrix& coeff,
                                  const PotentialSpec& spec,
                                  const ScalarOperators& ops,
                                  StepStats* stats, JacobianCache* cache) {
  check_inputs(state, cfg, coeff, spec, ops);
  const int m = state.stored_components();
  const int nodes = state.mesh.node_count();
  const int n_phases = state.n_phases;

  const Eigen::MatrixXd mass_c = (cfg.gamma / cfg.k) * 4.5 * coeff.reduced;
  const Eigen::MatrixXd stiff_c = cfg.eta * 4.5 * coeff.reduced;
  const Eigen::VectorXd mass_old =
      detail::kron_apply(mass_c, ops.mass, state.data);

  const Eigen::MatrixXd gradient_c =
      (1.0 / cfg.eta) * Eigen::MatrixXd::Identity(m, m);
  auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return detail::kron_apply(mass_c, ops.mass, x) - mass_old +
           detail::kron_apply(stiff_c, ops.stiffness, x) +
           detail::kron_apply(gradient_c, ops.mass,
                              detail::reduced_gradient(x, n_phases, nodes,
                                                       spec));
  };
  // The consistent-mass gradient term differentiates to a node-coupled,
  // asymmetric sandwich (I (x) M) * blockdiag(H_p), and the full Jacobian is
  // indefinite for steps near the convexity bound, so each Newton system is
  // solved by direct factorization.
  ChordPolicy policy(cache);
  auto jacobian_solve = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                            SolveStats* lin) -> Eigen::VectorXd {
    if (policy.reuse(r.norm())) return policy.solve(r, cfg.solver_tol, lin);
    BlockSystem jac(m, nodes);
    jac.add_kron(mass_c, ops.mass);
    jac.add_kron(stiff_c, ops.stiffness);
    jac.add_sandwich(ops.mass,
                     detail::reduced_hessian_blocks(x, n_phases, nodes, spec),
                     1.0 / cfg.eta);
    jac.rhs = r;
    return policy.refresh_and_solve(jac, r, cfg.solver_tol, lin);
  };

  NewtonStats nstats;
  Eigen::VectorXd sol =
      newton_solve(residual, jacobian_solve, state.data, cfg.newton, &nstats);
  if (stats) *stats = {nstats.iterations, nstats.linear_residual};
  return with_data(state, std::move(sol));
}

PhaseField ac_step_crank_nicolson(const PhaseField& state, const AcConfig& cfg,
                                  const CoefficientMatrix& coeff,
                                  const PotentialSpec& spec,
                                  const ScalarOperators& ops,
                                  StepStats* stats, JacobianCache* cache) {
  check_inputs(state, cfg, coeff, spec, ops);
  const int m = state.stored_components();
  const int nodes = state.mesh.node_count();
  const int n_phases = state.n_phases;

  const Eigen::MatrixXd mass_c = (cfg.gamma / cfg.k) * 4.5 * coeff.reduced;
  const Eigen::MatrixXd stiff_c = cfg.eta * 4.5 * coeff.reduced;
  const Eigen::VectorXd mass_old =
      detail::kron_apply(mass_c, ops.mass, state.data);
  const Eigen::VectorXd stiff_old =
      detail::kron_apply(stiff_c, ops.stiffness, state.data);

  auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return detail::kron_apply(mass_c, ops.mass, x) - mass_old +
           0.5 * (detail::kron_apply(stiff_c, ops.stiffness, x) + stiff_old) +
           detail::lumped_scale(
               ops.lumped,
               detail::reduced_secant(x, state.data, n_phases, nodes, spec), m,
               1.0 / cfg.eta);
  };
  // The secant term's derivative blocks are asymmetric and can push the
  // Jacobian indefinite at usable steps; solve directly.
  ChordPolicy policy(cache);
  auto jacobian_solve = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                            SolveStats* lin) -> Eigen::VectorXd {
    if (policy.reuse(r.norm())) return policy.solve(r, cfg.solver_tol, lin);
    BlockSystem jac(m, nodes);
    jac.add_kron(mass_c, ops.mass);
    jac.add_kron(0.5 * stiff_c, ops.stiffness);
    jac.add_nodal((1.0 / cfg.eta) * ops.lumped,
                  detail::secant_jacobian_blocks(x, state.data, n_phases,
                                                 nodes, spec));
    jac.symmetric = false;
    jac.rhs = r;
    return policy.refresh_and_solve(jac, r, cfg.solver_tol, lin);
  };

  NewtonStats nstats;
  Eigen::VectorXd sol =
      newton_solve(residual, jacobian_solve, state.data, cfg.newton, &nstats);
  if (stats) *stats = {nstats.iterations, nstats.linear_residual};
  return with_data(state, std::move(sol));
}

PhaseField ac_step(const PhaseField& state, const AcConfig& cfg,
                   const CoefficientMatrix& coeff, const PotentialSpec& spec,
                   const ScalarOperators& ops, StepStats* stats,
                   JacobianCache* cache) {
  switch (cfg.scheme) {
    case Scheme::SemiImplicit:
      return ac_step_semi_implicit(state, cfg, coeff, spec, ops, stats);
    case Scheme::FullyImplicit:
      return ac_step_fully_implicit(state, cfg, coeff, spec, ops, stats,
                                    cache);
    case Scheme::ModifiedCN:
      return ac_step_crank_nicolson(state, cfg, coeff, spec, ops, stats,
                                    cache);
  }
  throw InvalidInput("unknown scheme");
}

AcStableSteps ac_stable_step(const AcConfig& cfg,
                             const CoefficientMatrix& coeff,
                             const PotentialSpec& spec, double margin) {
  if (!coeff.is_spd)
    throw InvalidInput("tension set is not simplicial; no stable step");
  if (!(cfg.eta > 0.0) || !(cfg.gamma > 0.0))
    throw InvalidInput("eta and gamma must be positive");
  const HessianBounds hb = hessian_bounds(spec, margin);
  const double lam = coeff.tangent_eig_min;
  const double base = lam * cfg.gamma * cfg.eta;
  const double inf = std::numeric_limits<double>::infinity();
  AcStableSteps out;
  out.semi = hb.upper > 0.0 ? 2.0 * base / hb.upper : inf;
  out.fully = hb.lower > 0.0 ? 2.0 * base / hb.lower : inf;
  out.convex = hb.lower > 0.0 ? base / hb.lower : inf;
  return out;
}

}  // namespace nphase
