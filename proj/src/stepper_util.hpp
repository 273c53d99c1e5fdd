// Internal helpers shared by the time steppers: Kronecker products applied
// matrix-free, nodal evaluation of the potential terms in reduced (last
// phase eliminated) coordinates, and a bounded nodal parallel loop.
#pragma once

#include <Eigen/Dense>

#include <cstdlib>
#include <thread>
#include <vector>

#include "nphase/fem.hpp"
#include "nphase/potential.hpp"

namespace nphase::detail {

inline int thread_cap() {
  static const int cap = [] {
    if (const char* env = std::getenv("NPHASE_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }();
  return cap;
}

// Runs body(p) for p in [0, count). Parallelizes only when each worker gets
// a substantial chunk; bodies must write disjoint slots so the result is
// independent of the thread count.
template <typename F>
void for_nodes(int count, F&& body) {
  const int threads =
      std::max(1, std::min(thread_cap(), count / 4096));
  if (threads == 1) {
    for (int p = 0; p < count; ++p) body(p);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(count, lo + chunk);
    pool.emplace_back([lo, hi, &body] {
      for (int p = lo; p < hi; ++p) body(p);
    });
  }
  for (auto& th : pool) th.join();
}

// y = (coupling ⊗ op) x over component-major storage.
inline Eigen::VectorXd kron_apply(const Eigen::MatrixXd& coupling,
                                  const SpMat& op, const Eigen::VectorXd& x) {
  const int m = static_cast<int>(coupling.rows());
  const Eigen::Index nodes = op.rows();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m * nodes);
  Eigen::VectorXd tmp(nodes);
  for (int j = 0; j < m; ++j) {
    tmp.noalias() = op * x.segment(j * nodes, nodes);
    for (int i = 0; i < m; ++i) {
      const double w = coupling(i, j);
      if (w != 0.0) y.segment(i * nodes, nodes) += w * tmp;
    }
  }
  return y;
}

// y_i = scale * weights ⊙ x_i for every stored component.
inline Eigen::VectorXd lumped_scale(const Eigen::VectorXd& weights,
                                    const Eigen::VectorXd& x, int components,
                                    double scale) {
  const Eigen::Index nodes = weights.size();
  Eigen::VectorXd y(components * nodes);
  for (int i = 0; i < components; ++i)
    y.segment(i * nodes, nodes) =
        scale * weights.cwiseProduct(x.segment(i * nodes, nodes));
  return y;
}

// All N concentrations at one node of component-major reduced storage.
inline Eigen::VectorXd full_state(const Eigen::VectorXd& data, int n_phases,
                                  int nodes, int node) {
  Eigen::VectorXd c(n_phases);
  double sum = 0.0;
  for (int i = 0; i < n_phases - 1; ++i) {
    c(i) = data(static_cast<Eigen::Index>(i) * nodes + node);
    sum += c(i);
  }
  c(n_phases - 1) = 1.0 - sum;
  return c;
}

// Nodal reduced gradient: component i is dF/dc_i - dF/dc_N.
inline Eigen::VectorXd reduced_gradient(const Eigen::VectorXd& data,
                                        int n_phases, int nodes,
                                        const PotentialSpec& spec) {
  const int m = n_phases - 1;
  Eigen::VectorXd out(static_cast<Eigen::Index>(m) * nodes);
  for_nodes(nodes, [&](int p) {
    const Eigen::VectorXd g =
        potential_gradient(spec, full_state(data, n_phases, nodes, p));
    for (int i = 0; i < m; ++i)
      out(static_cast<Eigen::Index>(i) * nodes + p) = g(i) - g(m);
  });
  return out;
}

// Nodal reduced secant between two states (exact slope of the potential).
inline Eigen::VectorXd reduced_secant(const Eigen::VectorXd& xnew,
                                      const Eigen::VectorXd& xold,
                                      int n_phases, int nodes,
                                      const PotentialSpec& spec) {
  const int m = n_phases - 1;
  Eigen::VectorXd out(static_cast<Eigen::Index>(m) * nodes);
  for_nodes(nodes, [&](int p) {
    const Eigen::VectorXd q =
        potential_secant(spec, full_state(xnew, n_phases, nodes, p),
                         full_state(xold, n_phases, nodes, p));
    for (int i = 0; i < m; ++i)
      out(static_cast<Eigen::Index>(i) * nodes + p) = q(i) - q(m);
  });
  return out;
}

// Per-node reduced Hessian D_ij = H_ij - H_iN - H_Nj + H_NN (the derivative
// of the reduced gradient with respect to the stored components).
inline std::vector<Eigen::MatrixXd> reduced_hessian_blocks(
    const Eigen::VectorXd& data, int n_phases, int nodes,
    const PotentialSpec& spec) {
  const int m = n_phases - 1;
  std::vector<Eigen::MatrixXd> blocks(nodes);
  for_nodes(nodes, [&](int p) {
    const Eigen::MatrixXd h =
        potential_hessian(spec, full_state(data, n_phases, nodes, p));
    Eigen::MatrixXd d(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        d(i, j) = h(i, j) - h(i, m) - h(m, j) + h(m, m);
    blocks[p] = d;
  });
  return blocks;
}

// Per-node derivative of the reduced secant with respect to the new state,
// by central differences along reduced directions (e_j - e_N). Generally
// asymmetric away from the coalescence limit.
inline std::vector<Eigen::MatrixXd> secant_jacobian_blocks(
    const Eigen::VectorXd& xnew, const Eigen::VectorXd& xold, int n_phases,
    int nodes, const PotentialSpec& spec) {
  const int m = n_phases - 1;
  const double delta = 1e-6;
  std::vector<Eigen::MatrixXd> blocks(nodes);
  for_nodes(nodes, [&](int p) {
    const Eigen::VectorXd a = full_state(xnew, n_phases, nodes, p);
    const Eigen::VectorXd b = full_state(xold, n_phases, nodes, p);
    Eigen::MatrixXd d(m, m);
    Eigen::VectorXd ap = a, am = a;
    for (int j = 0; j < m; ++j) {
      ap(j) += delta;
      ap(m) -= delta;
      am(j) -= delta;
      am(m) += delta;
      const Eigen::VectorXd qp = potential_secant(spec, ap, b);
      const Eigen::VectorXd qm = potential_secant(spec, am, b);
      for (int i = 0; i < m; ++i)
        d(i, j) = ((qp(i) - qp(m)) - (qm(i) - qm(m))) / (2.0 * delta);
      ap(j) = a(j);
      ap(m) = a(m);
      am(j) = a(j);
      am(m) = a(m);
    }
    blocks[p] = std::move(d);
  });
  return blocks;
}

}  // namespace nphase::detail
