#pragma once

#include <cmath>
#include <memory>

#include "nphase/allen_cahn.hpp"
#include "nphase/fem.hpp"
#include "nphase/scheme.hpp"
#include "nphase/sparsesolve.hpp"

namespace nphase {

// Mobility that makes the N=2 reduction match the standard two-phase
// equation with unit coefficients.
inline double default_mobility() { return 3.0 / (2.0 * std::sqrt(2.0)); }

struct ChConfig {
  double eta = 0.01;  // interfacial thickness scale
  double m0 = default_mobility();
  double k = 1e-6;  // time step
  Scheme scheme = Scheme::SemiImplicit;
  double solver_tol = 1e-9;
  NewtonOptions newton;
};

// Nodal chemical potentials in reduced coordinates, one length-(N-1) vector
// per node, stored component-major like PhaseField.
struct ChemicalPotentialField {
  Mesh mesh;
  int n_phases = 0;
  Eigen::VectorXd data;

  ChemicalPotentialField() = default;
  ChemicalPotentialField(const Mesh& m, int phases)
      : mesh(m),
        n_phases(phases),
        data(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(phases - 1) *
                                   m.node_count())) {
    if (phases < 2) throw InvalidInput("need at least 2 phases");
  }

  int stored_components() const { return n_phases - 1; }

  Eigen::VectorBlock<const Eigen::VectorXd> component(int i) const {
    return data.segment(static_cast<Eigen::Index>(i) * mesh.node_count(),
                        mesh.node_count());
  }
};

struct ChStepResult {
  PhaseField concentration;
  ChemicalPotentialField potential;
};

// Coupling factor of the potential block: (I + 11^T) reduced^{-1} (I + 11^T).
// SPD whenever the reduced tension matrix is.
Eigen::MatrixXd ch_mobility_factor(const CoefficientMatrix& coeff);

// One step of the conserved dynamics in mixed (concentration, potential)
// form: the two reduced fields are solved monolithically from the symmetric
// indefinite block system by direct factorization. The potential terms are
// treated as in the relaxation schemes: consistent-mass pairing for the
// first-order schemes, lumped pairing for the midpoint secant so its
// dissipation identity is exact.
ChStepResult ch_step_semi_implicit(const PhaseField& state,
                                   const ChConfig& cfg,
                                   const CoefficientMatrix& coeff,
                                   const PotentialSpec& spec,
                                   const ScalarOperators& ops,
                                   StepStats* stats = nullptr);

ChStepResult ch_step_fully_implicit(const PhaseField& state,
                                    const ChConfig& cfg,
                                    const CoefficientMatrix& coeff,
                                    const PotentialSpec& spec,
                                    const ScalarOperators& ops,
                                    StepStats* stats = nullptr);

// Midpoint scheme; satisfies
// E(new) - E(old) = -k * (2 m0 / 9) * w'^T (factor ⊗ K) w'
// exactly, up to the Newton residual.
ChStepResult ch_step_crank_nicolson(const PhaseField& state,
                                    const ChConfig& cfg,
                                    const CoefficientMatrix& coeff,
                                    const PotentialSpec& spec,
                                    const ScalarOperators& ops,
                                    StepStats* stats = nullptr);

// Dispatches on cfg.scheme.
ChStepResult ch_step(const PhaseField& state, const ChConfig& cfg,
                     const CoefficientMatrix& coeff, const PotentialSpec& spec,
                     const ScalarOperators& ops, StepStats* stats = nullptr);

// Semi-implicit stepping with the block matrix factored once; valid while
// cfg, coeff and ops stay fixed.
class ChSemiImplicitStepper {
 public:
  ChSemiImplicitStepper(const ChConfig& cfg, const CoefficientMatrix& coeff,
                        const PotentialSpec& spec, const ScalarOperators& ops,
                        const Mesh& mesh, int n_phases);

  ChStepResult step(const PhaseField& state, StepStats* stats = nullptr) const;

 private:
  ChConfig cfg_;
  const CoefficientMatrix& coeff_;
  const PotentialSpec& spec_;
  const ScalarOperators& ops_;
  Mesh mesh_;
  int n_phases_;
  Eigen::MatrixXd atilde_;
  std::unique_ptr<SaddleSolver> solver_;
};

struct ChStableSteps {
  double semi = 0.0;   // guaranteed energy decrease, semi-implicit
  double fully = 0.0;  // guaranteed energy decrease, fully implicit
};

// Largest time steps with guaranteed energy stability; cubic in eta. Margin
// as in ac_stable_step.
ChStableSteps ch_stable_step(const ChConfig& cfg,
                             const CoefficientMatrix& coeff,
                             const PotentialSpec& spec, double margin = 0.0);

}  // namespace nphase
