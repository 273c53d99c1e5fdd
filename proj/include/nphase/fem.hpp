#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "nphase/potential.hpp"
#include "nphase/tension.hpp"

namespace nphase {

using SpMat = Eigen::SparseMatrix<double>;

// Uniform triangulation of the unit square: n x n squares, each split by the
// diagonal from its lower-left to its upper-right corner. Nodes are numbered
// row by row from (0,0), so node (i,j) sits at (i*h, j*h).
struct Mesh {
  int n = 0;

  int nodes_per_side() const { return n + 1; }
  int node_count() const { return (n + 1) * (n + 1); }
  int triangle_count() const { return 2 * n * n; }
  double h() const { return 1.0 / n; }
  int node_index(int i, int j) const { return j * (n + 1) + i; }
  Eigen::Vector2d node_coords(int idx) const {
    return {(idx % (n + 1)) * h(), (idx / (n + 1)) * h()};
  }
};

Mesh build_uniform_mesh(int n);

// P1 mass and stiffness with natural boundary conditions. `lumped` holds the
// mass row sums, the nodal quadrature weights used for pointwise terms.
struct ScalarOperators {
  SpMat mass;
  SpMat stiffness;
  Eigen::VectorXd lumped;
};

ScalarOperators assemble_operators(const Mesh& mesh);

// Nodal concentrations with the last phase eliminated: components 1..N-1 are
// stored component-major, c_N is reconstructed as 1 - sum on demand.
struct PhaseField {
  Mesh mesh;
  int n_phases = 0;
  Eigen::VectorXd data;

  PhaseField() = default;
  PhaseField(const Mesh& m, int phases)
      : mesh(m),
        n_phases(phases),
        data(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(phases - 1) *
                                   m.node_count())) {
    if (phases < 2) throw InvalidInput("need at least 2 phases");
  }

  int stored_components() const { return n_phases - 1; }

  Eigen::VectorBlock<Eigen::VectorXd> component(int i) {
    return data.segment(static_cast<Eigen::Index>(i) * mesh.node_count(),
                        mesh.node_count());
  }
  Eigen::VectorBlock<const Eigen::VectorXd> component(int i) const {
    return data.segment(static_cast<Eigen::Index>(i) * mesh.node_count(),
                        mesh.node_count());
  }

  // all N concentrations at one node
  Eigen::VectorXd full_at(int node) const {
    Eigen::VectorXd c(n_phases);
    double sum = 0.0;
    for (int i = 0; i < n_phases - 1; ++i) {
      c(i) = data(static_cast<Eigen::Index>(i) * mesh.node_count() + node);
      sum += c(i);
    }
    c(n_phases - 1) = 1.0 - sum;
    return c;
  }

  Eigen::VectorXd last_component() const {
    Eigen::VectorXd cn = Eigen::VectorXd::Ones(mesh.node_count());
    for (int i = 0; i < n_phases - 1; ++i) cn -= component(i);
    return cn;
  }
};

// Total free energy: capillary part 9*eta/4 * sum_ij reduced_ij c_i^T K c_j
// plus the bulk potential under nodal quadrature. Requires an SPD tension set.
double total_energy(const PhaseField& field, const ScalarOperators& ops,
                    const CoefficientMatrix& coeff, const PotentialSpec& spec,
                    double eta);

}  // namespace nphase
