#include "nphase/fem.hpp"

#include <array>
#include <vector>

namespace nphase {

Mesh build_uniform_mesh(int n) {
  if (n < 1) throw InvalidInput("mesh needs at least one square per side");
  return Mesh{n};
}

ScalarOperators assemble_operators(const Mesh& mesh) {
  const int nn = mesh.node_count();
  std::vector<Eigen::Triplet<double>> mass_t, stiff_t;
  mass_t.reserve(static_cast<size_t>(mesh.triangle_count()) * 9);
  stiff_t.reserve(static_cast<size_t>(mesh.triangle_count()) * 9);

  auto add_triangle = [&](const std::array<int, 3>& v) {
    Eigen::Vector2d p0 = mesh.node_coords(v[0]);
    Eigen::Vector2d p1 = mesh.node_coords(v[1]);
    Eigen::Vector2d p2 = mesh.node_coords(v[2]);
    const double det =
        (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    const double area = 0.5 * det;

    // gradients of the barycentric functions
    std::array<Eigen::Vector2d, 3> grad;
    grad[0] = Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) / det;
    grad[1] = Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) / det;
    grad[2] = Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x()) / det;

    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        stiff_t.emplace_back(v[a], v[b], area * grad[a].dot(grad[b]));
        mass_t.emplace_back(v[a], v[b], area / 12.0 * (a == b ? 2.0 : 1.0));
      }
  };

  for (int j = 0; j < mesh.n; ++j)
    for (int i = 0; i < mesh.n; ++i) {
      const int v00 = mesh.node_index(i, j);
      const int v10 = mesh.node_index(i + 1, j);
      const int v01 = mesh.node_index(i, j + 1);
      const int v11 = mesh.node_index(i + 1, j + 1);
      add_triangle({v00, v10, v11});  // below the diagonal
      add_triangle({v00, v11, v01});  // above the diagonal
    }

  ScalarOperators ops;
  ops.mass.resize(nn, nn);
  ops.stiffness.resize(nn, nn);
  ops.mass.setFromTriplets(mass_t.begin(), mass_t.end());
  ops.stiffness.setFromTriplets(stiff_t.begin(), stiff_t.end());
  ops.mass.makeCompressed();
  ops.stiffness.makeCompressed();
  ops.lumped = ops.mass * Eigen::VectorXd::Ones(nn);
  return ops;
}

double total_energy(const PhaseField& field, const ScalarOperators& ops,
                    const CoefficientMatrix& coeff, const PotentialSpec& spec,
                    double eta) {
  if (!coeff.is_spd)
    throw InvalidInput("energy is defined only for SPD tension sets");
  if (!(eta > 0.0)) throw InvalidInput("interface width must be positive");
  if (spec.n_phases != field.n_phases)
    throw InvalidInput("potential and field phase counts differ");

  const int m = field.stored_components();
  double cap = 0.0;
  std::vector<Eigen::VectorXd> kc(m);
  for (int j = 0; j < m; ++j) kc[j] = ops.stiffness * field.component(j);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      cap += coeff.reduced(i, j) * field.component(i).dot(kc[j]);
  cap *= 9.0 * eta / 4.0;

  double bulk = 0.0;
  for (int node = 0; node < field.mesh.node_count(); ++node)
    bulk += ops.lumped(node) * potential_value(spec, field.full_at(node));
  return cap + bulk / eta;
}

}  // namespace nphase
