#include "nphase/cahn_hilliard.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "stepper_util.hpp"

namespace nphase {

namespace {

void check_inputs(const PhaseField& state, const ChConfig& cfg,
                  const CoefficientMatrix& coeff, const PotentialSpec& spec,
                  const ScalarOperators& ops) {
  if (!coeff.is_spd)
    throw InvalidInput("tension set is not simplicial; step rejected");
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta) || !(cfg.m0 > 0.0) ||
      !std::isfinite(cfg.m0) || !(cfg.k > 0.0) || !std::isfinite(cfg.k))
    throw InvalidInput("eta, m0 and k must be positive and finite");
  if (spec.n_phases != state.n_phases)
    throw InvalidInput("potential and field phase counts differ");
  if (coeff.reduced.rows() != state.n_phases - 1)
    throw InvalidInput("coefficient matrix phase count differs");
  if (ops.mass.rows() != state.mesh.node_count())
    throw InvalidInput("operators assembled for a different mesh");
}

Eigen::MatrixXd ones_plus_identity(int m) {
  return Eigen::MatrixXd::Identity(m, m) + Eigen::MatrixXd::Ones(m, m);
}

// Couplings of the assembled (c, w) system: components 0..m-1 carry the
// concentrations, m..2m-1 the potentials. The potential-definition rows are
// negated so the block matrix is symmetric.
Eigen::MatrixXd stiffness_coupling(const ChConfig& cfg,
                                   const CoefficientMatrix& coeff,
                                   const Eigen::MatrixXd& factor,
                                   double c_weight) {
  const int m = static_cast<int>(coeff.reduced.rows());
  Eigen::MatrixXd kc = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  kc.topLeftCorner(m, m) = c_weight * 4.5 * cfg.eta * coeff.reduced;
  kc.bottomRightCorner(m, m) = -cfg.k * (2.0 * cfg.m0 / 9.0) * factor;
  return kc;
}

Eigen::MatrixXd mass_coupling(const Eigen::MatrixXd& atilde) {
  const int m = static_cast<int>(atilde.rows());
  Eigen::MatrixXd mc = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  mc.topRightCorner(m, m) = -atilde;
  mc.bottomLeftCorner(m, m) = -atilde;
  return mc;
}

// Embeds per-node m x m blocks into the concentration corner of the stacked
// (c, w) component space.
std::vector<Eigen::MatrixXd> pad_blocks(std::vector<Eigen::MatrixXd> blocks,
                                        int m) {
  for (auto& b : blocks) {
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    full.topLeftCorner(m, m) = b;
    b = std::move(full);
  }
  return blocks;
}

// Newton guess for the mixed system: the old concentrations together with
// the potential that zeroes the potential-definition rows at the old state,
// (atilde ⊗ M) w0 = b. Plain Newton (no damping) needs this: from w = 0 the
// first step overshoots into the quartic tail of the potential and cycles.
Eigen::VectorXd consistent_guess(const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& b,
                                 const Eigen::MatrixXd& atilde,
                                 const SpMat& mass) {
  const int m = static_cast<int>(atilde.rows());
  const Eigen::Index nodes = mass.rows();
  Eigen::SimplicialLDLT<SpMat> mass_solver(mass);
  Eigen::VectorXd y(b.size());
  for (int i = 0; i < m; ++i)
    y.segment(i * nodes, nodes) =
        mass_solver.solve(b.segment(i * nodes, nodes));
  const Eigen::MatrixXd atinv = atilde.inverse();
  Eigen::VectorXd guess(2 * b.size());
  guess.head(b.size()) = c;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd wi = Eigen::VectorXd::Zero(nodes);
    for (int j = 0; j < m; ++j)
      wi += atinv(i, j) * y.segment(j * nodes, nodes);
    guess.segment(b.size() + i * nodes, nodes) = wi;
  }
  return guess;
}

ChStepResult split_solution(const PhaseField& like,
                            const Eigen::VectorXd& sol) {
  const Eigen::Index half = sol.size() / 2;
  ChStepResult out{PhaseField(like.mesh, like.n_phases),
                   ChemicalPotentialField(like.mesh, like.n_phases)};
  out.concentration.data = sol.head(half);
  out.potential.data = sol.tail(half);
  return out;
}

}  // namespace

Eigen::MatrixXd ch_mobility_factor(const CoefficientMatrix& coeff) {
  if (!coeff.is_spd)
    throw InvalidInput("tension set is not simplicial; no mobility factor");
  const int m = static_cast<int>(coeff.reduced.rows());
  const Eigen::MatrixXd atilde = ones_plus_identity(m);
  const Eigen::MatrixXd c = atilde * coeff.reduced.ldlt().solve(atilde);
  return 0.5 * (c + c.transpose());
}

ChStepResult ch_step_semi_implicit(const PhaseField& state,
                                   const ChConfig& cfg,
                                   const CoefficientMatrix& coeff,
                                   const PotentialSpec& spec,
                                   const ScalarOperators& ops,
                                   StepStats* stats) {
  ChSemiImplicitStepper stepper(cfg, coeff, spec, ops, state.mesh,
                                state.n_phases);
  return stepper.step(state, stats);
}

ChSemiImplicitStepper::ChSemiImplicitStepper(const ChConfig& cfg,
                                             const CoefficientMatrix& coeff,
                                             const PotentialSpec& spec,
                                             const ScalarOperators& ops,
                                             const Mesh& mesh, int n_phases)
    : cfg_(cfg),
      coeff_(coeff),
      spec_(spec),
      ops_(ops),
      mesh_(mesh),
      n_phases_(n_phases) {
  PhaseField probe(mesh, n_phases);
  check_inputs(probe, cfg, coeff, spec, ops);
  const int m = n_phases - 1;
  atilde_ = ones_plus_identity(m);

  BlockSystem sys(2 * m, mesh.node_count());
  sys.add_kron(stiffness_coupling(cfg, coeff, ch_mobility_factor(coeff), 1.0),
               ops.stiffness);
  sys.add_kron(mass_coupling(atilde_), ops.mass);
  solver_ = std::make_unique<SaddleSolver>(sys, cfg.solver_tol);
}

ChStepResult ChSemiImplicitStepper::step(const PhaseField& state,
                                         StepStats* stats) const {
  if (state.n_phases != n_phases_ ||
      state.mesh.node_count() != mesh_.node_count())
    throw InvalidInput("state does not match the prepared stepper");
  const int m = n_phases_ - 1;
  const int nodes = mesh_.node_count();

  Eigen::VectorXd rhs(2 * static_cast<Eigen::Index>(m) * nodes);
  rhs.head(static_cast<Eigen::Index>(m) * nodes) =
      -detail::kron_apply((1.0 / cfg_.eta) * Eigen::MatrixXd::Identity(m, m),
                          ops_.mass,
                          detail::reduced_gradient(state.data, n_phases_,
                                                   nodes, spec_));
  rhs.tail(static_cast<Eigen::Index>(m) * nodes) =
      -detail::kron_apply(atilde_, ops_.mass, state.data);

  SolveStats lin;
  Eigen::VectorXd sol = solver_->solve(rhs, &lin);
  if (stats) *stats = {0, lin.residual};
  return split_solution(state, sol);
}

ChStepResult ch_step_fully_implicit(const PhaseField& state,
                                    const ChConfig& cfg,
                                    const CoefficientMatrix& coeff,
                                    const PotentialSpec& spec,
                                    const ScalarOperators& ops,
                                    StepStats* stats) {
  check_inputs(state, cfg, coeff, spec, ops);
  const int m = state.stored_components();
  const int nodes = state.mesh.node_count();
  const int n_phases = state.n_phases;
  const Eigen::Index half = static_cast<Eigen::Index>(m) * nodes;

  const Eigen::MatrixXd atilde = ones_plus_identity(m);
  const Eigen::MatrixXd factor = ch_mobility_factor(coeff);
  const Eigen::MatrixXd stiff_c = 4.5 * cfg.eta * coeff.reduced;
  const Eigen::MatrixXd pot_c = cfg.k * (2.0 * cfg.m0 / 9.0) * factor;
  const Eigen::MatrixXd gradient_c =
      (1.0 / cfg.eta) * Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd mass_old =
      detail::kron_apply(atilde, ops.mass, state.data);

  auto residual = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const Eigen::VectorXd x = u.head(half);
    const Eigen::VectorXd w = u.tail(half);
    Eigen::VectorXd r(2 * half);
    r.head(half) = detail::kron_apply(stiff_c, ops.stiffness, x) -
                   detail::kron_apply(atilde, ops.mass, w) +
                   detail::kron_apply(gradient_c, ops.mass,
                                      detail::reduced_gradient(x, n_phases,
                                                               nodes, spec));
    r.tail(half) = mass_old - detail::kron_apply(atilde, ops.mass, x) -
                   detail::kron_apply(pot_c, ops.stiffness, w);
    return r;
  };
  auto jacobian_solve = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& r,
                            SolveStats* lin) -> Eigen::VectorXd {
    BlockSystem jac(2 * m, nodes);
    jac.add_kron(stiffness_coupling(cfg, coeff, factor, 1.0), ops.stiffness);
    jac.add_kron(mass_coupling(atilde), ops.mass);
    jac.add_sandwich(
        ops.mass,
        pad_blocks(detail::reduced_hessian_blocks(u.head(half), n_phases,
                                                  nodes, spec),
                   m),
        1.0 / cfg.eta);
    jac.rhs = r;
    return solve_saddle(jac, cfg.solver_tol, lin);
  };

  Eigen::VectorXd guess = consistent_guess(
      state.data,
      detail::kron_apply(stiff_c, ops.stiffness, state.data) +
          detail::kron_apply(gradient_c, ops.mass,
                             detail::reduced_gradient(state.data, n_phases,
                                                      nodes, spec)),
      atilde, ops.mass);
  NewtonStats nstats;
  Eigen::VectorXd sol =
      newton_solve(residual, jacobian_solve, std::move(guess), cfg.newton,
                   &nstats);
  if (stats) *stats = {nstats.iterations, nstats.linear_residual};
  return split_solution(state, sol);
}

ChStepResult ch_step_crank_nicolson(const PhaseField& state,
                                    const ChConfig& cfg,
                                    const CoefficientMatrix& coeff,
                                    const PotentialSpec& spec,
                                    const ScalarOperators& ops,
                                    StepStats* stats) {
  check_inputs(state, cfg, coeff, spec, ops);
  const int m = state.stored_components();
  const int nodes = state.mesh.node_count();
  const int n_phases = state.n_phases;
  const Eigen::Index half = static_cast<Eigen::Index>(m) * nodes;

  const Eigen::MatrixXd atilde = ones_plus_identity(m);
  const Eigen::MatrixXd factor = ch_mobility_factor(coeff);
  const Eigen::MatrixXd stiff_c = 4.5 * cfg.eta * coeff.reduced;
  const Eigen::MatrixXd pot_c = cfg.k * (2.0 * cfg.m0 / 9.0) * factor;
  const Eigen::VectorXd mass_old =
      detail::kron_apply(atilde, ops.mass, state.data);
  const Eigen::VectorXd stiff_old =
      detail::kron_apply(stiff_c, ops.stiffness, state.data);

  auto residual = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const Eigen::VectorXd x = u.head(half);
    const Eigen::VectorXd w = u.tail(half);
    Eigen::VectorXd r(2 * half);
    r.head(half) =
        0.5 * (detail::kron_apply(stiff_c, ops.stiffness, x) + stiff_old) -
        detail::kron_apply(atilde, ops.mass, w) +
        detail::lumped_scale(
            ops.lumped,
            detail::reduced_secant(x, state.data, n_phases, nodes, spec), m,
            1.0 / cfg.eta);
    r.tail(half) = mass_old - detail::kron_apply(atilde, ops.mass, x) -
                   detail::kron_apply(pot_c, ops.stiffness, w);
    return r;
  };
  auto jacobian_solve = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& r,
                            SolveStats* lin) -> Eigen::VectorXd {
    BlockSystem jac(2 * m, nodes);
    jac.add_kron(stiffness_coupling(cfg, coeff, factor, 0.5), ops.stiffness);
    jac.add_kron(mass_coupling(atilde), ops.mass);
    jac.add_nodal(
        (1.0 / cfg.eta) * ops.lumped,
        pad_blocks(detail::secant_jacobian_blocks(u.head(half), state.data,
                                                  n_phases, nodes, spec),
                   m));
    jac.symmetric = false;
    jac.rhs = r;
    return solve_saddle(jac, cfg.solver_tol, lin);
  };

  Eigen::VectorXd guess = consistent_guess(
      state.data,
      stiff_old + detail::lumped_scale(
                      ops.lumped,
                      detail::reduced_gradient(state.data, n_phases, nodes,
                                               spec),
                      m, 1.0 / cfg.eta),
      atilde, ops.mass);
  NewtonStats nstats;
  Eigen::VectorXd sol =
      newton_solve(residual, jacobian_solve, std::move(guess), cfg.newton,
                   &nstats);
  if (stats) *stats = {nstats.iterations, nstats.linear_residual};
  return split_solution(state, sol);
}

ChStepResult ch_step(const PhaseField& state, const ChConfig& cfg,
                     const CoefficientMatrix& coeff, const PotentialSpec& spec,
                     const ScalarOperators& ops, StepStats* stats) {
  switch (cfg.scheme) {
    case Scheme::SemiImplicit:
      return ch_step_semi_implicit(state, cfg, coeff, spec, ops, stats);
    case Scheme::FullyImplicit:
      return ch_step_fully_implicit(state, cfg, coeff, spec, ops, stats);
    case Scheme::ModifiedCN:
      return ch_step_crank_nicolson(state, cfg, coeff, spec, ops, stats);
  }
  throw InvalidInput("unknown scheme");
}

ChStableSteps ch_stable_step(const ChConfig& cfg,
                             const CoefficientMatrix& coeff,
                             const PotentialSpec& spec, double margin) {
  if (!coeff.is_spd)
    throw InvalidInput("tension set is not simplicial; no stable step");
  if (!(cfg.eta > 0.0) || !(cfg.m0 > 0.0))
    throw InvalidInput("eta and m0 must be positive");
  const HessianBounds hb = hessian_bounds(spec, margin);
  const double lam = coeff.tangent_eig_min;
  const double base =
      8.0 * lam * lam * cfg.eta * cfg.eta * cfg.eta / cfg.m0;
  const double inf = std::numeric_limits<double>::infinity();
  ChStableSteps out;
  out.semi = hb.upper > 0.0 ? base / (hb.upper * hb.upper) : inf;
  out.fully = hb.lower > 0.0 ? base / (hb.lower * hb.lower) : inf;
  return out;
}

}  // namespace nphase
