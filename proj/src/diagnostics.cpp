#include "nphase/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace nphase {

StepReport report(const PhaseField& state, const PhaseField& prev_state,
                  const ScalarOperators& ops, const CoefficientMatrix& coeff,
                  const PotentialSpec& spec, const AcConfig& cfg, int step,
                  double time, const StepStats* stats) {
  if (state.mesh.node_count() != prev_state.mesh.node_count() ||
      state.n_phases != prev_state.n_phases)
    throw InvalidInput("report states live on different discretizations");
  if (ops.mass.rows() != state.mesh.node_count())
    throw InvalidInput("operators assembled for a different mesh");

  StepReport r;
  r.step = step;
  r.time = time;
  if (stats) {
    r.newton_iterations = stats->newton_iterations;
    r.linear_residual = stats->linear_residual;
  }

  r.energy = total_energy(state, ops, coeff, spec, cfg.eta);

  const int m = state.stored_components();
  const Eigen::Index nodes = state.mesh.node_count();
  r.masses.reserve(state.n_phases);
  for (int i = 0; i < m; ++i) r.masses.push_back(ops.lumped.dot(state.component(i)));
  r.masses.push_back(ops.lumped.dot(state.last_component()));

  const Eigen::VectorXd last = state.last_component();
  r.min_c = std::min(state.data.minCoeff(), last.minCoeff());
  r.max_c = std::max(state.data.maxCoeff(), last.maxCoeff());

  const double prev_energy =
      total_energy(prev_state, ops, coeff, spec, cfg.eta);
  const Eigen::VectorXd d = state.data - prev_state.data;
  double q = 0.0;
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd mdi = ops.mass * d.segment(i * nodes, nodes);
    for (int j = 0; j < m; ++j)
      q += coeff.reduced(i, j) * mdi.dot(d.segment(j * nodes, nodes));
  }
  r.dissipation_residual =
      std::abs(r.energy - prev_energy + (cfg.gamma / cfg.k) * 4.5 * q);
  return r;
}

std::pair<double, double> admissibility_violation(const PhaseField& state) {
  const Eigen::VectorXd last = state.last_component();
  const double lo = std::min(state.data.minCoeff(), last.minCoeff());
  const double hi = std::max(state.data.maxCoeff(), last.maxCoeff());
  return {std::max(0.0, -lo), std::max(0.0, hi - 1.0)};
}

}  // namespace nphase
