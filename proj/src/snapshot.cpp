#include "nphase/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "nphase/errors.hpp"

namespace nphase {

namespace {

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(
      std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Distinct saturated colors; phases beyond the palette wrap around.
constexpr unsigned char kPalette[][3] = {
    {230, 25, 75},   // red
    {60, 180, 75},   // green
    {0, 130, 200},   // blue
    {255, 225, 25},  // yellow
    {145, 30, 180},  // purple
    {70, 240, 240},  // cyan
    {240, 50, 230},  // magenta
    {128, 128, 128}, // gray
};
constexpr int kPaletteSize = static_cast<int>(std::size(kPalette));

std::ofstream open_binary(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  return out;
}

}  // namespace

void write_pgm(const std::string& path, const Mesh& mesh,
               const Eigen::VectorXd& values) {
  if (values.size() != mesh.node_count())
    throw InvalidInput("snapshot values sized for a different mesh");
  const int side = mesh.nodes_per_side();
  std::ofstream out = open_binary(path);
  out << "P5\n" << side << " " << side << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(side));
  for (int j = mesh.n; j >= 0; --j) {
    for (int i = 0; i <= mesh.n; ++i)
      row[static_cast<std::size_t>(i)] = to_byte(values(mesh.node_index(i, j)));
    out.write(reinterpret_cast<const char*>(row.data()), side);
  }
  if (!out) throw Error("write failed: " + path);
}

void write_composite_ppm(const std::string& path, const PhaseField& field) {
  const Mesh& mesh = field.mesh;
  const int side = mesh.nodes_per_side();
  const Eigen::VectorXd last = field.last_component();
  std::ofstream out = open_binary(path);
  out << "P6\n" << side << " " << side << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(3 * side));
  for (int j = mesh.n; j >= 0; --j) {
    for (int i = 0; i <= mesh.n; ++i) {
      int v = mesh.node_index(i, j);
      double rgb[3] = {0.0, 0.0, 0.0};
      for (int p = 0; p < field.n_phases; ++p) {
        double c = p < field.n_phases - 1 ? field.component(p)(v) : last(v);
        const unsigned char* color = kPalette[p % kPaletteSize];
        for (int ch = 0; ch < 3; ++ch) rgb[ch] += c * color[ch];
      }
      for (int ch = 0; ch < 3; ++ch)
        row[static_cast<std::size_t>(3 * i + ch)] = static_cast<unsigned char>(
            std::lround(std::clamp(rgb[ch], 0.0, 255.0)));
    }
    out.write(reinterpret_cast<const char*>(row.data()), 3 * side);
  }
  if (!out) throw Error("write failed: " + path);
}

std::string phase_filename(int phase, int step) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "phase_%02d_step%08d.pgm", phase, step);
  return buf;
}

std::string composite_filename(int step) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "composite_step%08d.ppm", step);
  return buf;
}

void write_snapshots(const std::string& dir, const PhaseField& field,
                     int step) {
  for (int p = 1; p <= field.n_phases; ++p) {
    Eigen::VectorXd values = p < field.n_phases
                                 ? Eigen::VectorXd(field.component(p - 1))
                                 : field.last_component();
    write_pgm(dir + "/" + phase_filename(p, step), field.mesh, values);
  }
  write_composite_ppm(dir + "/" + composite_filename(step), field);
}

CsvLog::CsvLog(const std::string& path, int n_phases)
    : out_(path), n_phases_(n_phases) {
  if (!out_) throw Error("cannot open output file: " + path);
  out_ << "step,time,energy";
  for (int i = 1; i <= n_phases_; ++i) out_ << ",mass_" << i;
  out_ << ",min_c,max_c,dissipation_residual,newton_iters,lin_residual\n";
  out_.flush();
}

void CsvLog::write(const StepReport& report) {
  if (static_cast<int>(report.masses.size()) != n_phases_)
    throw InvalidInput("report phase count differs from the log header");
  out_ << report.step << "," << format_double(report.time) << ","
       << format_double(report.energy);
  for (double m : report.masses) out_ << "," << format_double(m);
  out_ << "," << format_double(report.min_c) << ","
       << format_double(report.max_c) << ","
       << format_double(report.dissipation_residual) << ","
       << report.newton_iterations << ","
       << format_double(report.linear_residual) << "\n";
  out_.flush();
  if (!out_) throw Error("write failed on the step log");
}

}  // namespace nphase
