#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "nphase/fem.hpp"
#include "nphase/sparsesolve.hpp"
#include "nphase/tension.hpp"
#include "test_util.hpp"

using namespace nphase;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SpMat sparse_identity(int n) {
  SpMat id(n, n);
  id.setIdentity();
  return id;
}

VectorXd random_vector(testutil::Rng& rng, Eigen::Index n) {
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("identity system returns rhs") {
  const int nodes = 5;
  SpMat id = sparse_identity(nodes);
  BlockSystem sys(2, nodes);
  sys.add_kron(MatrixXd::Identity(2, 2), id);
  testutil::Rng rng(3);
  sys.rhs = random_vector(rng, sys.size());

  SolveStats st;
  VectorXd x = solve_spd(sys, 1e-9, &st);
  CHECK((x - sys.rhs).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(st.residual <= 1e-9);
}

TEST_CASE("mass system recovers constants") {
  auto ops = assemble_operators(build_uniform_mesh(16));
  const int nodes = static_cast<int>(ops.mass.rows());
  BlockSystem sys(1, nodes);
  sys.add_kron(MatrixXd::Ones(1, 1), ops.mass);
  sys.rhs = ops.mass * VectorXd::Ones(nodes);

  VectorXd x = solve_spd(sys);
  CHECK((x - VectorXd::Ones(nodes)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("multicomponent spd system") {
  auto ops = assemble_operators(build_uniform_mesh(16));
  const int nodes = static_cast<int>(ops.mass.rows());
  auto sigma = SurfaceTension::validate(testutil::uniform_sigma(3));
  MatrixXd reduced = reduced_tensions(sigma, 3);

  const double eta = 0.01, gamma = 0.01, k = 1e-4;
  BlockSystem sys(2, nodes);
  sys.add_kron(4.5 * (gamma / k) * reduced, ops.mass);
  sys.add_kron(4.5 * eta * reduced, ops.stiffness);
  testutil::Rng rng(11);
  sys.rhs = random_vector(rng, sys.size());

  SolveStats st;
  VectorXd x = solve_spd(sys, 1e-9, &st);
  const double true_res = (sys.rhs - sys.apply(x)).norm() / sys.rhs.norm();
  CHECK(true_res <= 1e-9);
  REQUIRE(st.history.size() >= 2);
  for (size_t i = 1; i < st.history.size(); ++i)
    CHECK(st.history[i] <= st.history[i - 1]);
}

TEST_CASE("apply and assemble agree") {
  auto ops = assemble_operators(build_uniform_mesh(4));
  const int nodes = static_cast<int>(ops.mass.rows());
  testutil::Rng rng(5);

  MatrixXd c1(2, 2), c2(2, 2);
  c1 << 2.0, 0.5, 0.5, 1.5;
  c2 << 1.0, -0.3, -0.3, 0.8;
  BlockSystem sys(2, nodes);
  sys.add_kron(c1, ops.mass);
  sys.add_kron(c2, ops.stiffness);

  std::vector<MatrixXd> blocks(nodes);
  VectorXd weights(nodes);
  for (int p = 0; p < nodes; ++p) {
    MatrixXd b(2, 2);
    const double a = rng.uniform(-1.0, 1.0), d = rng.uniform(-1.0, 1.0);
    const double o = rng.uniform(-1.0, 1.0);
    b << a, o, o, d;
    blocks[p] = b;
    weights(p) = rng.uniform(0.1, 2.0);
  }
  sys.add_nodal(weights, blocks);

  MatrixXd dense(sys.assemble());
  VectorXd x = random_vector(rng, sys.size());
  CHECK((sys.apply(x) - dense * x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sys.diagonal() - dense.diagonal()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  // Sandwich terms couple nodes through the scalar operator; cross-check the
  // three code paths against an explicit kron-times-blockdiag product.
  std::vector<MatrixXd> asym(nodes);
  for (int p = 0; p < nodes; ++p) {
    MatrixXd b(2, 2);
    b << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    asym[p] = b;
  }
  sys.add_sandwich(ops.mass, asym, 0.7);
  CHECK_FALSE(sys.symmetric);

  MatrixXd block_diag = MatrixXd::Zero(sys.size(), sys.size());
  for (int p = 0; p < nodes; ++p)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        block_diag(i * nodes + p, j * nodes + p) = asym[p](i, j);
  MatrixXd expect = dense;
  MatrixXd mass_dense(ops.mass);
  for (int i = 0; i < 2; ++i)
    expect.block(i * nodes, 0, nodes, sys.size()) +=
        0.7 * mass_dense * block_diag.middleRows(i * nodes, nodes);

  MatrixXd full(sys.assemble());
  CHECK((full - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sys.apply(x) - expect * x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sys.diagonal() - expect.diagonal()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("solver determinism") {
  auto ops = assemble_operators(build_uniform_mesh(8));
  const int nodes = static_cast<int>(ops.mass.rows());
  BlockSystem sys(1, nodes);
  MatrixXd one = MatrixXd::Ones(1, 1);
  sys.add_kron(one, ops.mass);
  sys.add_kron(0.01 * one, ops.stiffness);
  testutil::Rng rng(17);
  sys.rhs = random_vector(rng, sys.size());

  VectorXd x1 = solve_spd(sys);
  VectorXd x2 = solve_spd(sys);
  CHECK(x1 == x2);
}

TEST_CASE("saddle two by two") {
  SpMat one = sparse_identity(1);
  MatrixXd swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  BlockSystem sys(2, 1);
  sys.add_kron(swap, one);
  sys.rhs = Eigen::Vector2d(1.0, 2.0);

  VectorXd x = solve_saddle(sys);
  CHECK(x(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-12));

  sys.rhs.setZero();
  CHECK(solve_saddle(sys).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("saddle rejects singular systems") {
  SpMat id = sparse_identity(4);
  BlockSystem sys(2, 4);
  sys.add_kron(MatrixXd::Ones(2, 2), id);
  sys.rhs = VectorXd::Ones(sys.size());
  CHECK_THROWS_AS(solve_saddle(sys), SolveError);
}

TEST_CASE("saddle on fem blocks") {
  auto ops = assemble_operators(build_uniform_mesh(8));
  const int nodes = static_cast<int>(ops.mass.rows());
  const double eta = 0.02, k = 1e-5;

  // [[eta*K, -M], [-M, -k*K]] is symmetric indefinite but nonsingular.
  MatrixXd top(2, 2), cross(2, 2), bottom(2, 2);
  top << eta, 0.0, 0.0, 0.0;
  cross << 0.0, -1.0, -1.0, 0.0;
  bottom << 0.0, 0.0, 0.0, -k;
  BlockSystem sys(2, nodes);
  sys.add_kron(top, ops.stiffness);
  sys.add_kron(cross, ops.mass);
  sys.add_kron(bottom, ops.stiffness);
  testutil::Rng rng(23);
  sys.rhs = random_vector(rng, sys.size());

  SolveStats st;
  VectorXd x = solve_saddle(sys, 1e-9, &st);
  CHECK((sys.rhs - sys.apply(x)).norm() / sys.rhs.norm() <= 1e-9);
  CHECK(st.residual <= 1e-9);

  // reusing the factorization for a second right-hand side
  SaddleSolver cached(sys);
  VectorXd b2 = random_vector(rng, sys.size());
  VectorXd y = cached.solve(b2);
  CHECK((b2 - sys.apply(y)).norm() / b2.norm() <= 1e-9);
}

TEST_CASE("newton on a scalar equation") {
  auto residual = [](const VectorXd& x) {
    VectorXd r(1);
    r(0) = x(0) * x(0) - 4.0;
    return r;
  };
  auto jac = [](const VectorXd& x, const VectorXd& r, SolveStats*) {
    VectorXd d(1);
    d(0) = r(0) / (2.0 * x(0));
    return d;
  };

  VectorXd guess(1);
  guess(0) = 3.0;
  NewtonStats st;
  VectorXd x = newton_solve(residual, jac, guess, {}, &st);
  CHECK(x(0) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(st.iterations <= 8);
  CHECK(st.final_residual <= 1e-5 * st.initial_residual);

  NewtonOptions tight;
  tight.rel_tol = 1e-14;
  tight.abs_tol = 1e-13;
  x = newton_solve(residual, jac, guess, tight);
  CHECK(x(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("newton converges in one step on linear problems") {
  testutil::Rng rng(31);
  MatrixXd b0(3, 3);
  for (int i = 0; i < 9; ++i) b0(i / 3, i % 3) = rng.uniform(-1.0, 1.0);
  MatrixXd a = b0.transpose() * b0 + MatrixXd::Identity(3, 3);
  VectorXd b = random_vector(rng, 3);

  auto residual = [&](const VectorXd& x) -> VectorXd { return a * x - b; };
  auto jac = [&](const VectorXd&, const VectorXd& r, SolveStats*) -> VectorXd {
    return a.ldlt().solve(r);
  };
  NewtonStats st;
  VectorXd x = newton_solve(residual, jac, VectorXd::Zero(3), {}, &st);
  CHECK(st.iterations == 1);
  CHECK((a * x - b).norm() <= 1e-10);
}

TEST_CASE("newton failure carries history") {
  auto residual = [](const VectorXd& x) {
    VectorXd r(1);
    r(0) = x(0) * x(0) + 1.0;  // no real root
    return r;
  };
  auto jac = [](const VectorXd& x, const VectorXd& r, SolveStats*) {
    VectorXd d(1);
    d(0) = r(0) / (2.0 * x(0));
    return d;
  };
  VectorXd guess(1);
  guess(0) = 1.0;
  NewtonOptions opts;
  opts.max_iter = 10;
  try {
    newton_solve(residual, jac, guess, opts);
    FAIL("expected NewtonError");
  } catch (const NewtonError& e) {
    CHECK(e.residual_history.size() == 11);
  }
}

TEST_CASE("spd solver error paths") {
  auto ops = assemble_operators(build_uniform_mesh(8));
  const int nodes = static_cast<int>(ops.mass.rows());
  BlockSystem sys(1, nodes);
  MatrixXd one = MatrixXd::Ones(1, 1);
  sys.add_kron(one, ops.mass);
  sys.add_kron(0.01 * one, ops.stiffness);
  testutil::Rng rng(41);
  sys.rhs = random_vector(rng, sys.size());

  // unreachable tolerance exhausts the iteration budget
  try {
    solve_spd(sys, 1e-300);
    FAIL("expected SolveError");
  } catch (const SolveError& e) {
    CHECK(!e.residual_history.empty());
  }

  sys.symmetric = false;
  CHECK_THROWS_AS(solve_spd(sys), InvalidInput);
}
