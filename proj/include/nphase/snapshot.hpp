#pragma once

#include <fstream>
#include <string>

#include "nphase/diagnostics.hpp"
#include "nphase/fem.hpp"

namespace nphase {

// 8-bit binary PGM of one nodal scalar on the structured grid, top row
// first, byte = round(255 * clamp(value, 0, 1)).
void write_pgm(const std::string& path, const Mesh& mesh,
               const Eigen::VectorXd& values);

// Binary PPM mixing a fixed per-phase palette weighted by the nodal
// concentrations, eliminated phase included.
void write_composite_ppm(const std::string& path, const PhaseField& field);

std::string phase_filename(int phase, int step);
std::string composite_filename(int step);

// One PGM per phase plus the composite, under `dir`.
void write_snapshots(const std::string& dir, const PhaseField& field,
                     int step);

// Append-only CSV log of step reports. Floats are printed with 17
// significant digits so rows round-trip exactly; each row is flushed, so a
// later solver failure leaves a complete log behind.
class CsvLog {
 public:
  CsvLog(const std::string& path, int n_phases);

  void write(const StepReport& report);

 private:
  std::ofstream out_;
  int n_phases_;
};

}  // namespace nphase
