#pragma once

#include "nphase/fem.hpp"
#include "nphase/potential.hpp"
#include "nphase/scheme.hpp"
#include "nphase/sparsesolve.hpp"
#include "nphase/tension.hpp"

namespace nphase {

struct AcConfig {
  double eta = 0.01;    // interfacial thickness scale
  double gamma = 0.01;  // relaxation; conventionally set equal to eta
  double k = 1e-4;      // time step
  Scheme scheme = Scheme::SemiImplicit;
  double solver_tol = 1e-9;
  NewtonOptions newton;
};

struct StepStats {
  int newton_iterations = 0;  // 0 for linear schemes
  double linear_residual = 0.0;
};

// One step of the relaxation dynamics in reduced coordinates. The potential
// terms are evaluated nodally; the first-order schemes pair them with the
// consistent mass (same as the time-derivative term, which keeps the
// theoretical step bounds sharp on rough modes), while the midpoint scheme
// pairs its secant term with the lumped mass, the exact discrete gradient
// of the nodal bulk quadrature used by total_energy, which is what makes
// its energy identity exact.
PhaseField ac_step_semi_implicit(const PhaseField& state, const AcConfig& cfg,
                                 const CoefficientMatrix& coeff,
                                 const PotentialSpec& spec,
                                 const ScalarOperators& ops,
                                 StepStats* stats = nullptr);

// The nonlinear schemes run plain Newton, one fresh factorization per
// iteration. Passing a JacobianCache opts into reuse: the held factorization
// serves as a frozen Jacobian until the iteration shows it is stale, which
// trades Newton's quadratic tail for far fewer factorizations on slowly
// varying trajectories. Stopping criteria are identical either way.
PhaseField ac_step_fully_implicit(const PhaseField& state, const AcConfig& cfg,
                                  const CoefficientMatrix& coeff,
                                  const PotentialSpec& spec,
                                  const ScalarOperators& ops,
                                  StepStats* stats = nullptr,
                                  JacobianCache* cache = nullptr);

// Midpoint scheme with the secant form of the potential: satisfies
// E(new) - E(old) = -(gamma/k) * 4.5 * (new-old)^T (reduced ⊗ M) (new-old)
// exactly, up to the Newton residual.
PhaseField ac_step_crank_nicolson(const PhaseField& state, const AcConfig& cfg,
                                  const CoefficientMatrix& coeff,
                                  const PotentialSpec& spec,
                                  const ScalarOperators& ops,
                                  StepStats* stats = nullptr,
                                  JacobianCache* cache = nullptr);

// Dispatches on cfg.scheme.
PhaseField ac_step(const PhaseField& state, const AcConfig& cfg,
                   const CoefficientMatrix& coeff, const PotentialSpec& spec,
                   const ScalarOperators& ops, StepStats* stats = nullptr,
                   JacobianCache* cache = nullptr);

struct AcStableSteps {
  double semi = 0.0;    // guaranteed energy decrease, semi-implicit
  double fully = 0.0;   // guaranteed energy decrease, fully implicit
  double convex = 0.0;  // guaranteed convexity of the implicit problem
};

// Largest time steps with guaranteed energy stability. Curvature bounds are
// taken over the concentration simplex itself (margin 0); pass a positive
// margin to cover off-simplex excursions.
AcStableSteps ac_stable_step(const AcConfig& cfg,
                             const CoefficientMatrix& coeff,
                             const PotentialSpec& spec, double margin = 0.0);

}  // namespace nphase
