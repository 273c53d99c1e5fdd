#include "nphase/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>

#include "nphase/allen_cahn.hpp"
#include "nphase/cahn_hilliard.hpp"
#include "nphase/diagnostics.hpp"
#include "nphase/snapshot.hpp"
#include "stepper_util.hpp"

namespace nphase {

namespace {

PhaseField initial_field(const RunConfig& cfg, const Mesh& mesh) {
  PhaseField field = [&] {
    switch (cfg.init) {
      case InitKind::Grains:
        return init_grains(mesh, cfg.n_phases, cfg.grains_count,
                           cfg.grains_r_min, cfg.grains_r_max, cfg.seed);
      case InitKind::Spinodal:
        return init_spinodal(mesh, cfg.spinodal_rho, cfg.spinodal_amplitude,
                             cfg.seed);
      case InitKind::Regions:
      default:
        return init_regions(mesh, cfg.regions, cfg.n_phases);
    }
  }();
  return smooth_sharp_field(field, cfg.smooth_width);
}

// Semi-implicit relaxation step with the constant system matrix factorized
// once and reused across steps; rebuilt only when the ramp changes k.
class AcSemiSolver {
 public:
  AcSemiSolver(const AcConfig& cfg, const CoefficientMatrix& coeff,
               const ScalarOperators& ops, int components, int nodes)
      : ops_(ops),
        eta_(cfg.eta),
        mass_c_((cfg.gamma / cfg.k) * 4.5 * coeff.reduced) {
    BlockSystem sys(components, nodes);
    sys.add_kron(mass_c_, ops.mass);
    sys.add_kron(cfg.eta * 4.5 * coeff.reduced, ops.stiffness);
    solver_ = std::make_unique<SaddleSolver>(sys, cfg.solver_tol);
  }

  PhaseField step(const PhaseField& state, const PotentialSpec& spec,
                  StepStats* stats) const {
    const int m = state.stored_components();
    const int nodes = state.mesh.node_count();
    Eigen::VectorXd rhs =
        detail::kron_apply(mass_c_, ops_.mass, state.data) -
        detail::kron_apply((1.0 / eta_) * Eigen::MatrixXd::Identity(m, m),
                           ops_.mass,
                           detail::reduced_gradient(state.data, state.n_phases,
                                                    nodes, spec));
    SolveStats lin;
    PhaseField out(state.mesh, state.n_phases);
    out.data = solver_->solve(rhs, &lin);
    if (stats) *stats = {0, lin.residual};
    return out;
  }

 private:
  const ScalarOperators& ops_;
  double eta_;
  Eigen::MatrixXd mass_c_;
  std::unique_ptr<SaddleSolver> solver_;
};

int run_impl(const RunConfig& cfg) {
  Mesh mesh = build_uniform_mesh(cfg.n);
  ScalarOperators ops = assemble_operators(mesh);
  SurfaceTension sigma = SurfaceTension::validate(cfg.sigma);
  CoefficientMatrix coeff = assemble_coefficients_special(sigma);
  if (!coeff.is_spd) {
    std::fprintf(stderr,
                 "tension set admits no simplex embedding; run rejected\n");
    return 1;
  }
  PotentialSpec spec =
      cfg.potential == PotentialSpec::Kind::homogeneous
          ? PotentialSpec::homogeneous(cfg.sigma(0, 1), cfg.n_phases)
          : PotentialSpec::pairwise(sigma, cfg.s);
  PhaseField field = initial_field(cfg, mesh);

  std::filesystem::create_directories(cfg.output_dir);
  CsvLog log(cfg.output_dir + "/energy.csv", cfg.n_phases);

  AcConfig acfg;
  acfg.eta = cfg.eta;
  acfg.gamma = cfg.gamma;
  acfg.k = cfg.k;
  acfg.scheme = cfg.scheme;
  ChConfig ccfg;
  ccfg.eta = cfg.eta;
  ccfg.m0 = cfg.m0;
  ccfg.k = cfg.k;
  ccfg.scheme = cfg.scheme;

  log.write(report(field, field, ops, coeff, spec, acfg, 0, 0.0));
  if (cfg.snapshot_every > 0) write_snapshots(cfg.output_dir, field, 0);

  const int m = cfg.n_phases - 1;
  std::unique_ptr<AcSemiSolver> ac_semi;
  std::unique_ptr<ChSemiImplicitStepper> ch_semi;
  JacobianCache newton_cache;
  const bool is_ac = cfg.model == Model::AllenCahn;
  const bool semi = cfg.scheme == Scheme::SemiImplicit;

  double time = 0.0;
  std::size_t ramp_pos = 0;
  for (int step = 1; step <= cfg.steps; ++step) {
    if (ramp_pos < cfg.ramp.size() && cfg.ramp[ramp_pos].first == step) {
      acfg.k = ccfg.k = cfg.ramp[ramp_pos].second;
      ++ramp_pos;
      ac_semi.reset();
      ch_semi.reset();
      newton_cache.reset();
    }
    StepStats stats;
    PhaseField next(mesh, cfg.n_phases);
    try {
      if (is_ac) {
        if (semi) {
          if (!ac_semi)
            ac_semi = std::make_unique<AcSemiSolver>(acfg, coeff, ops, m,
                                                     mesh.node_count());
          next = ac_semi->step(field, spec, &stats);
        } else {
          next = ac_step(field, acfg, coeff, spec, ops, &stats, &newton_cache);
        }
      } else {
        if (semi) {
          if (!ch_semi)
            ch_semi = std::make_unique<ChSemiImplicitStepper>(
                ccfg, coeff, spec, ops, mesh, cfg.n_phases);
          next = ch_semi->step(field, &stats).concentration;
        } else {
          next = ch_step(field, ccfg, coeff, spec, ops, &stats).concentration;
        }
      }
    } catch (const Error& e) {
      std::fprintf(stderr, "solver failure at step %d: %s\n", step, e.what());
      return 3;
    }
    time += is_ac ? acfg.k : ccfg.k;
    log.write(report(next, field, ops, coeff, spec, acfg, step, time, &stats));
    field = std::move(next);
    if (cfg.snapshot_every > 0 &&
        (step % cfg.snapshot_every == 0 || step == cfg.steps))
      write_snapshots(cfg.output_dir, field, step);
  }
  return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    return run_impl(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

int check_tensions(const RunConfig& cfg) {
  try {
    SurfaceTension sigma = SurfaceTension::validate(cfg.sigma);
    SpdReport spd = spd_check(sigma);
    if (!spd.is_spd) {
      std::printf("tension set admits a simplex embedding: no\n");
      return 1;
    }
    CoefficientMatrix coeff = assemble_coefficients_special(sigma);
    std::printf("tension set admits a simplex embedding: yes\n");
    std::printf("smallest tangent eigenvalue: %.12g\n", coeff.tangent_eig_min);
    return 0;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  }
}

int print_bounds(const RunConfig& cfg) {
  try {
    SurfaceTension sigma = SurfaceTension::validate(cfg.sigma);
    CoefficientMatrix coeff = assemble_coefficients_special(sigma);
    if (!coeff.is_spd) {
      std::fprintf(stderr,
                   "tension set admits no simplex embedding; no bounds\n");
      return 1;
    }
    PotentialSpec spec =
      cfg.potential == PotentialSpec::Kind::homogeneous
          ? PotentialSpec::homogeneous(cfg.sigma(0, 1), cfg.n_phases)
          : PotentialSpec::pairwise(sigma, cfg.s);
    AcConfig acfg;
    acfg.eta = cfg.eta;
    acfg.gamma = cfg.gamma;
    acfg.k = cfg.k;
    ChConfig ccfg;
    ccfg.eta = cfg.eta;
    ccfg.m0 = cfg.m0;
    ccfg.k = cfg.k;
    AcStableSteps ac = ac_stable_step(acfg, coeff, spec);
    ChStableSteps ch = ch_stable_step(ccfg, coeff, spec);
    std::printf("relaxation semi-implicit bound:   %.12g\n", ac.semi);
    std::printf("relaxation fully-implicit bound:  %.12g\n", ac.fully);
    std::printf("relaxation convexity bound:       %.12g\n", ac.convex);
    std::printf("conserved semi-implicit bound:    %.12g\n", ch.semi);
    std::printf("conserved fully-implicit bound:   %.12g\n", ch.fully);
    return 0;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  }
}

}  // namespace nphase
