// Acceptance checks: one per release criterion, each printing a single
// [PASS]/[FAIL] line with the measured numbers it judged. Run all with no
// arguments or one with --criterion <n>. Exit 0 iff everything selected
// passed. Thresholds are pinned here, not configurable.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "../test_util.hpp"
#include "nphase/allen_cahn.hpp"
#include "nphase/cahn_hilliard.hpp"
#include "nphase/config.hpp"
#include "nphase/diagnostics.hpp"
#include "nphase/errors.hpp"
#include "nphase/fem.hpp"
#include "nphase/init.hpp"
#include "nphase/potential.hpp"
#include "nphase/runner.hpp"
#include "nphase/tension.hpp"
#include "scalar_reference.hpp"

using namespace nphase;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

VectorXd full_component(const PhaseField& f, int i) {
  if (i < f.stored_components()) return f.component(i);
  return f.last_component();
}

std::vector<double> phase_masses(const PhaseField& f,
                                 const ScalarOperators& ops) {
  std::vector<double> m(f.n_phases);
  for (int i = 0; i < f.n_phases; ++i)
    m[i] = ops.lumped.dot(full_component(f, i));
  return m;
}

double contact_integral(const PhaseField& f, const ScalarOperators& ops,
                        int i, int j) {
  return full_component(f, i).dot(ops.mass * full_component(f, j));
}

// Largest energy increase over a recorded trajectory, as a fraction of the
// roundoff allowance.
struct MonotoneTrack {
  double e0 = 0.0;
  double prev = 0.0;
  double max_uphill = 0.0;
  bool first = true;

  void push(double e) {
    if (first) {
      e0 = prev = e;
      first = false;
      return;
    }
    max_uphill = std::max(max_uphill, e - prev);
    prev = e;
  }
  double allowance() const { return 1e-12 * std::max(1.0, std::abs(e0)); }
  bool monotone() const { return max_uphill <= allowance(); }
};

// ------------------------------------------------------------- criterion 1

bool crit1(std::string& detail) {
  Timer timer;
  long total = 0, simplicial = 0;
  int disagreements = 0;
  for (int n : {3, 4, 5}) {
    testutil::Rng rng(1000 + n);
    for (int t = 0; t < 1000; ++t) {
      auto st = SurfaceTension::validate(testutil::random_sigma(rng, n));
      const bool first = reduced_spd(st, 1);
      bool agree = true;
      for (int m = 2; m <= n; ++m)
        if (reduced_spd(st, m) != first) agree = false;
      const SpdReport rep = spd_check(st);
      if (rep.is_spd != first) agree = false;
      if (rep.vertices.has_value() != rep.is_spd) agree = false;
      if (!agree) ++disagreements;
      ++total;
      if (first) ++simplicial;
    }
  }
  const double secs = timer.seconds();
  detail = strf("%ld sets, %ld simplicial, %d disagreements, %.2f s", total,
                simplicial, disagreements, secs);
  return disagreements == 0 && secs < 5.0;
}

// ------------------------------------------------------------- criterion 2

bool crit2(std::string& detail) {
  testutil::Rng rng(20260819);
  double max_interp = 0.0, max_kernel = 0.0, max_invariance = 0.0;
  long assembled = 0;
  for (int n = 2; n <= 6; ++n) {
    for (int t = 0; t < 200; ++t) {
      auto st = SurfaceTension::validate(testutil::random_sigma(rng, n));
      const PhaseMap map1 = testutil::random_map(rng, n);
      const PhaseMap map2 = testutil::random_map(rng, n);
      const CoefficientMatrix c1 = assemble_coefficients(st, map1);
      const CoefficientMatrix c2 = assemble_coefficients(st, map2);
      const CoefficientMatrix c3 = assemble_coefficients_special(st);
      ++assembled;

      for (int k = 1; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) {
          const VectorXd edge = map1.A.col(k - 1) - map1.A.col(l - 1);
          const double got = edge.dot(c1.capillary * edge);
          const double want = 4.5 * st(k, l);
          max_interp = std::max(max_interp, std::abs(got - want) / want);
        }
      max_kernel = std::max(max_kernel, (c1.capillary * map1.d).norm() /
                                            c1.capillary.norm());
      const double scale = std::max(c1.capillary_tangent.cwiseAbs().maxCoeff(),
                                    c2.capillary_tangent.cwiseAbs().maxCoeff());
      max_invariance = std::max(
          max_invariance,
          (c1.capillary_tangent - c2.capillary_tangent).cwiseAbs().maxCoeff() /
              scale);
      max_invariance = std::max(
          max_invariance,
          (c1.capillary_tangent - c3.capillary_tangent).cwiseAbs().maxCoeff() /
              scale);
    }
  }
  detail = strf(
      "%ld assemblies N=2..6, interp err %.2e, kernel %.2e, map drift %.2e",
      assembled, max_interp, max_kernel, max_invariance);
  return max_interp <= 1e-9 && max_kernel <= 1e-9 && max_invariance <= 1e-9;
}

// ------------------------------------------------------------- criterion 3

bool crit3(std::string& detail) {
  testutil::Rng rng(33);
  auto draw = [&rng](int n) {
    VectorXd c(n);
    for (int i = 0; i < n; ++i) c(i) = rng.uniform(-0.2, 1.2);
    return c;
  };
  auto make_spec = [&rng](int kind, int n) {
    if (kind == 0) return PotentialSpec::homogeneous(rng.uniform(0.5, 2.0), n);
    auto st = SurfaceTension::validate(testutil::random_sigma(rng, n));
    return PotentialSpec::pairwise(st, rng.uniform(0.0, 40.0));
  };

  double max_secant = 0.0;
  for (int kind = 0; kind < 2; ++kind)
    for (int t = 0; t < 10000; ++t) {
      const int n = rng.uniform_int(2, 6);
      const PotentialSpec spec = make_spec(kind, n);
      const VectorXd c = draw(n), cs = draw(n);
      const double fc = potential_value(spec, c);
      const double fcs = potential_value(spec, cs);
      const double rhs = potential_secant(spec, c, cs).dot(c - cs);
      const double scale = std::max({1.0, std::abs(fc), std::abs(fcs)});
      max_secant = std::max(max_secant, std::abs(fc - fcs - rhs) / scale);
    }

  double max_grad = 0.0;
  const double h = 1e-5;
  for (int kind = 0; kind < 2; ++kind)
    for (int t = 0; t < 2000; ++t) {
      const int n = rng.uniform_int(2, 6);
      const PotentialSpec spec = make_spec(kind, n);
      VectorXd c = draw(n);
      const VectorXd g = potential_gradient(spec, c);
      const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      for (int i = 0; i < n; ++i) {
        VectorXd cp = c, cm = c;
        cp(i) += h;
        cm(i) -= h;
        const double fd =
            (potential_value(spec, cp) - potential_value(spec, cm)) / (2 * h);
        max_grad = std::max(max_grad, std::abs(g(i) - fd) / scale);
      }
    }

  double max_restrict = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const int n = rng.uniform_int(2, 6);
    auto st = SurfaceTension::validate(testutil::random_sigma(rng, n));
    const PotentialSpec spec = PotentialSpec::pairwise(st, rng.uniform(0, 40));
    const int k = rng.uniform_int(1, n - 1);
    const int l = rng.uniform_int(k + 1, n);
    const double x = rng.uniform(-0.2, 1.2);
    VectorXd c = VectorXd::Zero(n);
    c(k - 1) = x;
    c(l - 1) = 1.0 - x;
    const double want = 2.0 * st(k, l) * (double_well(x) + double_well(1 - x));
    const double got = potential_value(spec, c);
    max_restrict = std::max(max_restrict, std::abs(got - want) /
                                              std::max(1.0, std::abs(want)));
  }

  detail = strf("secant err %.2e, gradient err %.2e, restriction err %.2e",
                max_secant, max_grad, max_restrict);
  return max_secant <= 1e-12 && max_grad <= 1e-6 && max_restrict <= 1e-12;
}

// ------------------------------------------------------------- criterion 4

bool crit4(std::string& detail) {
  Timer timer;
  double worst = 0.0;
  bool ok = true;
  for (int n_phases : {3, 5}) {
    const Mesh mesh = build_uniform_mesh(32);
    const ScalarOperators ops = assemble_operators(mesh);
    auto st = SurfaceTension::validate(testutil::uniform_sigma(n_phases));
    const CoefficientMatrix coeff = assemble_coefficients_special(st);
    const PotentialSpec spec = PotentialSpec::pairwise(st, 0.0);

    AcConfig cfg;
    cfg.eta = 0.02;
    cfg.gamma = 0.02;
    cfg.k = 1e-4;
    cfg.scheme = Scheme::ModifiedCN;
    cfg.newton.rel_tol = 1e-10;
    cfg.newton.abs_tol = 1e-13;

    PhaseField f = init_spinodal(
        mesh, VectorXd::Constant(n_phases, 1.0 / n_phases), 0.04,
        42 + static_cast<std::uint64_t>(n_phases));
    for (int s = 1; s <= 100; ++s) {
      StepStats stats;
      PhaseField next = ac_step(f, cfg, coeff, spec, ops, &stats);
      const StepReport rep =
          report(next, f, ops, coeff, spec, cfg, s, s * cfg.k, &stats);
      const double scale = std::max(1.0, std::abs(rep.energy));
      worst = std::max(worst, rep.dissipation_residual / scale);
      if (rep.dissipation_residual > 1e-8 * scale) ok = false;
      f = std::move(next);
    }
  }
  const double secs = timer.seconds();
  detail = strf("N=3,5 x 100 steps, worst residual %.2e of scale, %.1f s",
                worst, secs);
  return ok && secs < 120.0;
}

// ------------------------------------------------------------- criterion 5

bool crit5(std::string& detail) {
  const Mesh mesh = build_uniform_mesh(32);
  const ScalarOperators ops = assemble_operators(mesh);
  auto st = SurfaceTension::validate(testutil::uniform_sigma(3));
  const CoefficientMatrix coeff = assemble_coefficients_special(st);
  const PotentialSpec spec = PotentialSpec::pairwise(st, 0.0);

  AcConfig acfg;
  acfg.eta = 0.01;
  acfg.gamma = 0.01;
  acfg.newton.rel_tol = 1e-9;
  acfg.newton.abs_tol = 1e-12;
  ChConfig ccfg;
  ccfg.eta = 0.01;
  ccfg.newton.rel_tol = 1e-9;
  ccfg.newton.abs_tol = 1e-12;
  const AcStableSteps ab = ac_stable_step(acfg, coeff, spec);
  const ChStableSteps cb = ch_stable_step(ccfg, coeff, spec);

  const PhaseField spin =
      init_spinodal(mesh, VectorXd::Constant(3, 1.0 / 3.0), 0.04, 7);
  const PhaseField spin_smooth = smooth_sharp_field(spin, 0.06);
  const PhaseField grains =
      smooth_sharp_field(init_grains(mesh, 3, 25, 0.05, 0.15, 11), 0.06);

  double worst = 0.0;  // uphill as multiple of the roundoff allowance
  std::string failed;

  auto track = [&](const char* name, MonotoneTrack& mono) {
    worst = std::max(worst, mono.max_uphill / mono.allowance());
    if (!mono.monotone())
      failed += strf("%s%s uphill %.2e", failed.empty() ? "" : "; ", name,
                     mono.max_uphill);
  };
  auto run_ac = [&](const char* name, Scheme scheme, double k,
                    const PhaseField& start) {
    AcConfig cfg = acfg;
    cfg.scheme = scheme;
    cfg.k = k;
    PhaseField f = start;
    MonotoneTrack mono;
    mono.push(total_energy(f, ops, coeff, spec, cfg.eta));
    for (int s = 0; s < 200; ++s) {
      f = ac_step(f, cfg, coeff, spec, ops);
      mono.push(total_energy(f, ops, coeff, spec, cfg.eta));
    }
    track(name, mono);
  };
  auto run_ch = [&](const char* name, Scheme scheme, double k,
                    const PhaseField& start) {
    ChConfig cfg = ccfg;
    cfg.scheme = scheme;
    cfg.k = k;
    PhaseField f = start;
    MonotoneTrack mono;
    mono.push(total_energy(f, ops, coeff, spec, cfg.eta));
    if (scheme == Scheme::SemiImplicit) {
      ChSemiImplicitStepper stepper(cfg, coeff, spec, ops, mesh, 3);
      for (int s = 0; s < 200; ++s) {
        f = stepper.step(f).concentration;
        mono.push(total_energy(f, ops, coeff, spec, cfg.eta));
      }
    } else {
      for (int s = 0; s < 200; ++s) {
        f = ch_step(f, cfg, coeff, spec, ops).concentration;
        mono.push(total_energy(f, ops, coeff, spec, cfg.eta));
      }
    }
    track(name, mono);
  };

  try {
    // Initial data per family keeps the bound hypotheses valid along the
    // discrete trajectory. Grid-scale noise excites the gap between the
    // mass-matrix nonlinear terms and the lumped bulk quadrature, which the
    // bounds do not control, so the conserved runs get random interface
    // data and the fully implicit relaxation runs get band-limited noise;
    // both stay where the curvature constants retain slack.
    run_ac("ac semi @bound", Scheme::SemiImplicit, ab.semi, spin);
    run_ac("ac semi @bound/2", Scheme::SemiImplicit, ab.semi / 2, spin);
    run_ac("ac fully @bound", Scheme::FullyImplicit, ab.fully, spin_smooth);
    run_ac("ac fully @bound/2", Scheme::FullyImplicit, ab.fully / 2,
           spin_smooth);
    run_ch("ch semi @bound", Scheme::SemiImplicit, cb.semi, grains);
    run_ch("ch semi @bound/2", Scheme::SemiImplicit, cb.semi / 2, grains);
    run_ch("ch fully @bound", Scheme::FullyImplicit, cb.fully, grains);
    run_ch("ch fully @bound/2", Scheme::FullyImplicit, cb.fully / 2, grains);
    run_ch("ch cn @10x semi bound", Scheme::ModifiedCN, 10 * cb.semi, grains);
  } catch (const Error& e) {
    detail = strf("solver failure: %s", e.what());
    return false;
  }

  if (!failed.empty()) {
    detail = failed;
    return false;
  }
  detail = strf(
      "9 runs x 200 steps, bounds ac %.3e/%.3e ch %.3e/%.3e, worst uphill "
      "%.2f of roundoff allowance",
      ab.semi, ab.fully, cb.semi, cb.fully, worst);
  return true;
}

// ------------------------------------------------------------- criterion 6

bool crit6(std::string& detail) {
  const Mesh mesh = build_uniform_mesh(32);
  const ScalarOperators ops = assemble_operators(mesh);
  auto st = SurfaceTension::validate(testutil::uniform_sigma(3));
  const CoefficientMatrix coeff = assemble_coefficients_special(st);
  const PotentialSpec spec = PotentialSpec::pairwise(st, 0.0);

  ChConfig cfg;
  cfg.eta = 0.02;
  cfg.newton.rel_tol = 1e-10;
  cfg.newton.abs_tol = 1e-13;
  cfg.k = 0.25 * ch_stable_step(cfg, coeff, spec).semi;

  VectorXd rho(3);
  rho << 0.4, 0.35, 0.25;
  const PhaseField start = init_spinodal(mesh, rho, 0.04, 5);

  double max_drift = 0.0;
  for (Scheme scheme :
       {Scheme::SemiImplicit, Scheme::FullyImplicit, Scheme::ModifiedCN}) {
    cfg.scheme = scheme;
    PhaseField f = start;
    const std::vector<double> m0 = phase_masses(f, ops);
    if (scheme == Scheme::SemiImplicit) {
      ChSemiImplicitStepper stepper(cfg, coeff, spec, ops, mesh, 3);
      for (int s = 0; s < 500; ++s) {
        f = stepper.step(f).concentration;
        const std::vector<double> m = phase_masses(f, ops);
        for (int i = 0; i < 3; ++i)
          max_drift =
              std::max(max_drift, std::abs(m[i] - m0[i]) / std::abs(m0[i]));
      }
    } else {
      for (int s = 0; s < 500; ++s) {
        f = ch_step(f, cfg, coeff, spec, ops).concentration;
        const std::vector<double> m = phase_masses(f, ops);
        for (int i = 0; i < 3; ++i)
          max_drift =
              std::max(max_drift, std::abs(m[i] - m0[i]) / std::abs(m0[i]));
      }
    }
  }
  detail = strf("3 schemes x 500 steps at k=%.3e, max relative drift %.2e",
                cfg.k, max_drift);
  return max_drift <= 1e-10;
}

// ------------------------------------------------------------- criterion 7

bool crit7(std::string& detail) {
  const int n = 16;
  const Mesh mesh = build_uniform_mesh(n);
  const ScalarOperators ops = assemble_operators(mesh);
  const oracle::Operators oops = oracle::assemble(n);
  auto st = SurfaceTension::validate(testutil::uniform_sigma(2));
  const CoefficientMatrix coeff = assemble_coefficients_special(st);
  const PotentialSpec spec = PotentialSpec::pairwise(st, 0.0);

  AcConfig acfg;
  acfg.eta = 0.03;
  acfg.gamma = 0.03;
  acfg.newton.rel_tol = 1e-10;
  acfg.newton.abs_tol = 1e-13;
  ChConfig ccfg;
  ccfg.eta = 0.03;
  ccfg.newton.rel_tol = 1e-10;
  ccfg.newton.abs_tol = 1e-13;
  const AcStableSteps ab = ac_stable_step(acfg, coeff, spec);
  acfg.k = 0.5 * std::min({ab.semi, ab.fully, ab.convex});
  ccfg.k = 0.2 * ch_stable_step(ccfg, coeff, spec).semi;

  const PhaseField start =
      init_spinodal(mesh, VectorXd::Constant(2, 0.5), 0.3, 99);
  const VectorXd ones = VectorXd::Ones(mesh.node_count());

  // The oracle advances from the solver's pre-step state, so the gap
  // measures one application of each step operator at 100 evolving states;
  // the limit is 10x the library solve tolerance.
  const double limit = 10.0 * acfg.solver_tol;

  oracle::Params op;
  op.eta = 0.03;
  op.gamma = 0.03;
  op.m0 = ccfg.m0;

  double overall = 0.0;
  std::string per_scheme;
  auto compare = [&](const char* name, bool conserved, Scheme scheme,
                     VectorXd (*oracle_step)(const oracle::Operators&,
                                             const oracle::Params&,
                                             const VectorXd&)) {
    op.k = conserved ? ccfg.k : acfg.k;
    acfg.scheme = scheme;
    ccfg.scheme = scheme;
    PhaseField f = start;
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      const VectorXd phi = 2.0 * f.component(0) - ones;
      const VectorXd predicted = oracle_step(oops, op, phi);
      f = conserved ? ch_step(f, ccfg, coeff, spec, ops).concentration
                    : ac_step(f, acfg, coeff, spec, ops);
      const VectorXd diff = f.component(0) - 0.5 * (predicted + ones);
      worst = std::max(worst, std::sqrt(diff.dot(ops.mass * diff)));
    }
    overall = std::max(overall, worst);
    per_scheme += strf("%s%s %.1e", per_scheme.empty() ? "" : ", ", name,
                       worst);
  };

  try {
    compare("ac semi", false, Scheme::SemiImplicit, oracle::ac_semi_step);
    compare("ac fully", false, Scheme::FullyImplicit, oracle::ac_fully_step);
    compare("ac cn", false, Scheme::ModifiedCN, oracle::ac_cn_step);
    compare("ch semi", true, Scheme::SemiImplicit, oracle::ch_semi_step);
    compare("ch fully", true, Scheme::FullyImplicit, oracle::ch_fully_step);
    compare("ch cn", true, Scheme::ModifiedCN, oracle::ch_cn_step);
  } catch (const std::exception& e) {
    detail = strf("solver failure: %s", e.what());
    return false;
  }
  detail = strf("max per-step L2 defect over 100 steps: %s (limit %.0e)",
                per_scheme.c_str(), limit);
  return overall <= limit;
}

// ------------------------------------------------------------- criterion 8

std::vector<double> read_energy_column(const std::string& path) {
  std::ifstream in(path);
  std::vector<double> energy;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    size_t p = 0;
    for (int col = 0; col < 2; ++col) {
      p = line.find(',', p);
      if (p == std::string::npos) return energy;
      ++p;
    }
    energy.push_back(std::strtod(line.c_str() + p, nullptr));
  }
  return energy;
}

bool crit8(std::string& detail) {
  Timer timer;
  setenv("NPHASE_THREADS", "2", 0);
  const std::string cfg_path =
      std::string(NPHASE_CONFIG_DIR) + "/grain_growth_ac.cfg";
  const char* schemes[3] = {"semi_implicit", "fully_implicit",
                            "crank_nicolson"};
  std::string dirs[3];
  RunConfig cfgs[3];
  for (int i = 0; i < 3; ++i) {
    dirs[i] = std::string("acceptance_out/c8_") + schemes[i];
    cfgs[i] = load_config(cfg_path, {std::string("scheme=") + schemes[i],
                                     "output_dir=" + dirs[i],
                                     "snapshot_every=0"});
  }

  int rc[3] = {-1, -1, -1};
  {
    std::vector<std::thread> workers;
    for (int i = 0; i < 3; ++i)
      workers.emplace_back([&cfgs, &rc, i] { rc[i] = run(cfgs[i]); });
    for (auto& w : workers) w.join();
  }
  for (int i = 0; i < 3; ++i)
    if (rc[i] != 0) {
      detail = strf("%s run exited %d", schemes[i], rc[i]);
      return false;
    }

  std::vector<double> energy[3];
  for (int i = 0; i < 3; ++i) {
    energy[i] = read_energy_column(dirs[i] + "/energy.csv");
    if (energy[i].size() != 451) {
      detail = strf("%s log has %zu rows, expected 451", schemes[i],
                    energy[i].size());
      return false;
    }
  }

  double worst_uphill = 0.0;
  for (int i = 0; i < 3; ++i) {
    MonotoneTrack mono;
    for (double e : energy[i]) mono.push(e);
    worst_uphill = std::max(worst_uphill, mono.max_uphill / mono.allowance());
    if (!mono.monotone()) {
      detail = strf("%s energy rises by %.2e", schemes[i], mono.max_uphill);
      return false;
    }
  }

  // Pointwise dissipation-rate agreement, fully implicit vs midpoint. The
  // absolute floor keeps the 10% relative comparison meaningful once the
  // per-step drops approach roundoff on the energy scale.
  const double floor = 1e-9 * std::max(1.0, std::abs(energy[1][0]));
  double worst_gap = 0.0;
  int worst_step = 0;
  for (size_t s = 51; s < energy[1].size(); ++s) {
    const double rf = energy[1][s - 1] - energy[1][s];
    const double rc_ = energy[2][s - 1] - energy[2][s];
    const double gap = std::abs(rf - rc_);
    const double lim = 0.10 * std::max(rf, rc_) + floor;
    if (gap / lim > worst_gap) {
      worst_gap = gap / lim;
      worst_step = static_cast<int>(s);
    }
  }
  const double secs = timer.seconds();
  detail = strf(
      "E0 %.5g, final semi/fully/cn %.6g/%.6g/%.6g, worst rate gap %.2f of "
      "allowance (step %d), uphill %.2f of roundoff, %.0f s",
      energy[0][0], energy[0].back(), energy[1].back(), energy[2].back(),
      worst_gap, worst_step, worst_uphill, secs);
  return worst_gap <= 1.0 && secs < 600.0;
}

// ------------------------------------------------------------- criterion 9

struct SpinodalResult {
  double contact13 = 0.0;
  double max_drift = 0.0;
  double max_uphill_ratio = 0.0;
  bool monotone = false;
};

SpinodalResult run_spinodal(const RunConfig& cfg) {
  const Mesh mesh = build_uniform_mesh(cfg.n);
  const ScalarOperators ops = assemble_operators(mesh);
  auto st = SurfaceTension::validate(cfg.sigma);
  const CoefficientMatrix coeff = assemble_coefficients_special(st);
  const PotentialSpec spec = PotentialSpec::pairwise(st, cfg.s);

  ChConfig c;
  c.eta = cfg.eta;
  c.m0 = cfg.m0;
  c.k = cfg.k;
  PhaseField f = init_spinodal(mesh, cfg.spinodal_rho,
                               cfg.spinodal_amplitude, cfg.seed);
  const std::vector<double> m0 = phase_masses(f, ops);
  MonotoneTrack mono;
  mono.push(total_energy(f, ops, coeff, spec, c.eta));

  SpinodalResult out;
  ChSemiImplicitStepper stepper(c, coeff, spec, ops, mesh, cfg.n_phases);
  for (int s = 0; s < cfg.steps; ++s) {
    f = stepper.step(f).concentration;
    mono.push(total_energy(f, ops, coeff, spec, c.eta));
    const std::vector<double> m = phase_masses(f, ops);
    for (int i = 0; i < cfg.n_phases; ++i)
      out.max_drift =
          std::max(out.max_drift, std::abs(m[i] - m0[i]) / std::abs(m0[i]));
  }
  out.contact13 = contact_integral(f, ops, 0, 2);
  out.max_uphill_ratio = mono.max_uphill / mono.allowance();
  out.monotone = mono.monotone();
  return out;
}

bool crit9(std::string& detail) {
  const std::string cfg_path =
      std::string(NPHASE_CONFIG_DIR) + "/spinodal_ch.cfg";
  SpinodalResult hom, inhom;
  try {
    hom = run_spinodal(load_config(cfg_path));
    inhom = run_spinodal(load_config(cfg_path, {"sigma.1.3=1.69"}));
  } catch (const Error& e) {
    detail = strf("solver failure: %s", e.what());
    return false;
  }
  detail = strf(
      "contact(1,3) hom %.6e vs inhom %.6e, max drift %.2e, worst uphill "
      "%.2f of roundoff",
      hom.contact13, inhom.contact13, std::max(hom.max_drift, inhom.max_drift),
      std::max(hom.max_uphill_ratio, inhom.max_uphill_ratio));
  return hom.monotone && inhom.monotone && hom.max_drift <= 1e-10 &&
         inhom.max_drift <= 1e-10 && inhom.contact13 < hom.contact13;
}

// ------------------------------------------------------------ criterion 10

double run_tjunction(const RunConfig& cfg) {
  const Mesh mesh = build_uniform_mesh(cfg.n);
  const ScalarOperators ops = assemble_operators(mesh);
  auto st = SurfaceTension::validate(cfg.sigma);
  const CoefficientMatrix coeff = assemble_coefficients_special(st);
  const PotentialSpec spec = PotentialSpec::pairwise(st, cfg.s);

  PhaseField f = init_regions(mesh, cfg.regions, cfg.n_phases);
  if (cfg.smooth_width > 0.0) f = smooth_sharp_field(f, cfg.smooth_width);

  ChConfig c;
  c.eta = cfg.eta;
  c.m0 = cfg.m0;
  c.k = cfg.k;
  auto stepper = std::make_unique<ChSemiImplicitStepper>(c, coeff, spec, ops,
                                                         mesh, cfg.n_phases);
  size_t ramp_pos = 0;
  for (int s = 1; s <= cfg.steps; ++s) {
    if (ramp_pos < cfg.ramp.size() && cfg.ramp[ramp_pos].first == s) {
      c.k = cfg.ramp[ramp_pos].second;
      ++ramp_pos;
      stepper = std::make_unique<ChSemiImplicitStepper>(c, coeff, spec, ops,
                                                        mesh, cfg.n_phases);
    }
    f = stepper->step(f).concentration;
  }
  return contact_integral(f, ops, 0, 1);
}

bool crit10(std::string& detail) {
  const std::string cfg_path =
      std::string(NPHASE_CONFIG_DIR) + "/tjunction_ch.cfg";
  const char* values[3] = {"1", "1.69", "2.56"};
  double contact[3];
  for (int i = 0; i < 3; ++i) {
    try {
      contact[i] = run_tjunction(
          load_config(cfg_path, {std::string("sigma.1.2=") + values[i]}));
    } catch (const Error& e) {
      detail = strf("sigma12=%s failed: %s", values[i], e.what());
      return false;
    }
  }
  detail = strf("contact(1,2) after 1000 steps: %.6e / %.6e / %.6e at "
                "sigma12 = 1 / 1.69 / 2.56",
                contact[0], contact[1], contact[2]);
  return contact[1] < contact[0];
}

// ------------------------------------------------------------ criterion 11

bool crit11(std::string& detail) {
  const Mesh mesh = build_uniform_mesh(32);
  const ScalarOperators ops = assemble_operators(mesh);

  double worst = 0.0;
  std::string note;
  // Two slab layouts: the absent phase is a stored component in the first
  // and the reconstructed one in the second.
  for (int layout = 0; layout < 2; ++layout) {
    const int lower = 1;
    const int upper = layout == 0 ? 3 : 2;
    const int absent = layout == 0 ? 2 : 3;  // 1-based
    std::vector<Region> regions = {{0.0, 0.0, 1.0, 0.5, lower},
                                   {0.0, 0.5, 1.0, 1.0, upper}};
    const PhaseField start =
        smooth_sharp_field(init_regions(mesh, regions, 3), 0.1);

    MatrixXd sig = testutil::uniform_sigma(3);
    sig(lower - 1, upper - 1) = sig(upper - 1, lower - 1) = 1.69;
    auto st = SurfaceTension::validate(sig);
    const CoefficientMatrix coeff = assemble_coefficients_special(st);
    const PotentialSpec spec = PotentialSpec::pairwise(st, 30.0);

    AcConfig acfg;
    acfg.eta = 0.02;
    acfg.gamma = 0.02;
    acfg.newton.rel_tol = 1e-10;
    acfg.newton.abs_tol = 1e-13;
    const AcStableSteps ab = ac_stable_step(acfg, coeff, spec);
    acfg.k = std::min({1e-4, 0.5 * ab.semi, 0.5 * ab.convex});
    ChConfig ccfg;
    ccfg.eta = 0.02;
    ccfg.newton.rel_tol = 1e-10;
    ccfg.newton.abs_tol = 1e-13;
    ccfg.k = std::min(1e-6, 0.5 * ch_stable_step(ccfg, coeff, spec).semi);

    auto absent_max = [&](const PhaseField& f) {
      return full_component(f, absent - 1).cwiseAbs().maxCoeff();
    };
    auto run_ac = [&](Scheme scheme) {
      acfg.scheme = scheme;
      PhaseField f = start;
      for (int s = 0; s < 100; ++s) {
        f = ac_step(f, acfg, coeff, spec, ops);
        worst = std::max(worst, absent_max(f));
      }
    };
    auto run_ch = [&](Scheme scheme) {
      ccfg.scheme = scheme;
      PhaseField f = start;
      for (int s = 0; s < 100; ++s) {
        f = ch_step(f, ccfg, coeff, spec, ops).concentration;
        worst = std::max(worst, absent_max(f));
      }
    };
    try {
      run_ac(Scheme::SemiImplicit);
      run_ac(Scheme::ModifiedCN);
      run_ch(Scheme::SemiImplicit);
      run_ch(Scheme::ModifiedCN);
    } catch (const Error& e) {
      detail = strf("layout %d solver failure: %s", layout, e.what());
      return false;
    }
    note += strf("%sphase %d stays <= %.2e", layout ? "; " : "", absent,
                 worst);
  }
  detail = strf("%s over 100 steps x 4 schemes per layout", note.c_str());
  return worst <= 1e-7;
}

// -------------------------------------------------------------------- main

struct Criterion {
  int id;
  const char* label;
  bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "tension classification equivalence", crit1},
    {2, "coefficient interpolation and invariance", crit2},
    {3, "potential identities", crit3},
    {4, "midpoint dissipation identity", crit4},
    {5, "energy monotonicity at step bounds", crit5},
    {6, "conserved-phase mass drift", crit6},
    {7, "two-phase scalar reduction", crit7},
    {8, "grain growth energy decay", crit8},
    {9, "spinodal tension contrast", crit9},
    {10, "junction interface measure", crit10},
    {11, "absent-phase invariance", crit11},
};

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1< argc) {
      selected = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion <1..11>]\n", argv[0]);
      return 2;
    }
  }
  if (selected < 0 || selected > 11) {
    std::fprintf(stderr, "criterion must be in 1..11\n");
    return 2;
  }

  bool all_ok = true;
  for (const Criterion& c : kCriteria) {
    if (selected != 0 && c.id != selected) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = strf("unexpected exception: %s", e.what());
    }
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", c.id,
                c.label, detail.c_str());
    std::fflush(stdout);
    if (!ok) all_ok = false;
  }
  return all_ok ? 0 : 1;
}
