#pragma once

#include <vector>

#include "nphase/allen_cahn.hpp"
#include "nphase/fem.hpp"

namespace nphase {

// Per-step log record: the quantities the energy-stability and conservation
// statements are about, plus solver effort.
struct StepReport {
  int step = 0;
  double time = 0.0;
  double energy = 0.0;
  std::vector<double> masses;  // all N phases, eliminated one included
  double min_c = 0.0;          // over nodes and phases
  double max_c = 0.0;
  // |E(new) - E(old) + (gamma/k) * weighted increment|; an identity only for
  // the midpoint scheme, reported for all.
  double dissipation_residual = 0.0;
  int newton_iterations = 0;  // 0 for linear schemes
  double linear_residual = 0.0;
};

// Builds the report for `state`, with the dissipation residual measured
// against `prev_state`. Energy goes through total_energy, masses through the
// lumped weights (identical to 1^T M c). Pass the step index, elapsed time
// and solver stats through; they are copied into the report.
StepReport report(const PhaseField& state, const PhaseField& prev_state,
                  const ScalarOperators& ops, const CoefficientMatrix& coeff,
                  const PotentialSpec& spec, const AcConfig& cfg, int step = 0,
                  double time = 0.0, const StepStats* stats = nullptr);

// Maximum distance below 0 and above 1 over all nodal concentrations,
// eliminated phase included. (0, 0) means the field is admissible.
std::pair<double, double> admissibility_violation(const PhaseField& state);

}  // namespace nphase
