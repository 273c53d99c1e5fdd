#pragma once

#include "nphase/config.hpp"

namespace nphase {

// Executes one configured run: builds the mesh, operators and initial
// field, steps the selected scheme (honoring the k ramp), and writes
// energy.csv plus periodic snapshots under cfg.output_dir. Returns the
// process exit status: 0 done, 1 physics rejection (non-simplicial
// tensions), 2 configuration or I/O problem, 3 solver failure (the failing
// step is reported on stderr and the log retains all completed steps).
int run(const RunConfig& cfg);

// Prints whether the tension set admits a simplex embedding. Returns 0 when
// it does, 1 otherwise.
int check_tensions(const RunConfig& cfg);

// Prints the guaranteed-energy-stability step bounds for both dynamics at
// the configured parameters. Returns 0, or 1 for non-simplicial tensions.
int print_bounds(const RunConfig& cfg);

}  // namespace nphase
