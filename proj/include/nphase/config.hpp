#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nphase/init.hpp"
#include "nphase/potential.hpp"
#include "nphase/scheme.hpp"

namespace nphase {

enum class Model { AllenCahn, CahnHilliard };
enum class InitKind { Grains, Spinodal, Regions };

// One run, fully specified. Parsed from a flat `key = value` file with `#`
// comments; `--set key=value` strings override file entries. See the README
// for the key list.
struct RunConfig {
  Model model = Model::AllenCahn;
  Scheme scheme = Scheme::SemiImplicit;
  int n = 0;         // grid cells per side
  int n_phases = 0;  // N
  double eta = 0.0;
  double gamma = 0.0;  // defaults to eta when the file omits it
  double m0 = 0.0;
  // homogeneous needs uniform sigma (strength = the common value); s weighs
  // the pairwise cross term only.
  PotentialSpec::Kind potential = PotentialSpec::Kind::pairwise;
  double s = 0.0;
  double k = 0.0;
  std::vector<std::pair<int, double>> ramp;  // (step, new k), ascending
  int steps = 0;
  int snapshot_every = 0;  // 0 disables image output
  std::uint64_t seed = 12345;
  Eigen::MatrixXd sigma;  // full N x N, zero diagonal

  InitKind init = InitKind::Spinodal;
  int grains_count = 0;
  double grains_r_min = 0.0;
  double grains_r_max = 0.0;
  Eigen::VectorXd spinodal_rho;
  double spinodal_amplitude = 0.0;
  std::vector<Region> regions;
  double smooth_width = 0.0;  // 0 keeps sharp initial interfaces

  std::string output_dir = "out";
};

// Parses config text plus overrides into a validated RunConfig. Throws
// ConfigError naming the offending key on any syntax, type, unknown-key or
// constraint problem.
RunConfig parse_config(const std::string& text,
                       const std::vector<std::string>& overrides = {});

// parse_config on the contents of `path`.
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides = {});

}  // namespace nphase
