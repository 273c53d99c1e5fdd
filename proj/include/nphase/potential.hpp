#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nphase/errors.hpp"
#include "nphase/tension.hpp"

namespace nphase {

// Scalar double well f(c) = c^2 (1-c)^2 and derivatives.
double double_well(double c);
double double_well_deriv(double c);
double double_well_second(double c);

// Divided difference (f(a) - f(b)) / (a - b), written in product form
// (1 - a - b) * (a(1-a) + b(1-b)) so it is exact (equal to f') at a == b
// and suffers no cancellation for nearby arguments.
double secant_scalar(double a, double b);

// Bulk potential over N phases. Two families: a single-strength form with a
// quartic cross term for N >= 4, and a pairwise-weighted form with an
// optional sixth-order cross term scaled by s.
struct PotentialSpec {
  enum class Kind { homogeneous, pairwise };
  Kind kind = Kind::homogeneous;
  int n_phases = 0;
  double strength = 1.0;   // homogeneous only
  Eigen::MatrixXd sigma;   // pairwise only, full N x N
  double s = 0.0;          // pairwise cross-term weight

  static PotentialSpec homogeneous(double strength, int n_phases);
  static PotentialSpec pairwise(const SurfaceTension& sigma, double s);
};

// Point evaluations accept arbitrary real vectors; solvers pass off-simplex
// values routinely.
double potential_value(const PotentialSpec& spec, const Eigen::VectorXd& c);
Eigen::VectorXd potential_gradient(const PotentialSpec& spec,
                                   const Eigen::VectorXd& c);
Eigen::MatrixXd potential_hessian(const PotentialSpec& spec,
                                  const Eigen::VectorXd& c);

// One-sided Hessian eigenvalue bounds over a barycentric sample of the
// simplex dilated by `margin`: upper bounds max(lambda_max, 0), lower bounds
// max(-lambda_min, 0). Both are >= 0 by construction.
struct HessianBounds {
  double upper = 0.0;  // L1
  double lower = 0.0;  // L2
};
HessianBounds hessian_bounds(const PotentialSpec& spec, double margin = 0.1,
                             double spacing = 0.05);

// Vector divided difference of the monomial prod_{i in set} c_i for a set of
// distinct 1-based indices (size 1..4). Satisfies
//   q(c) - q(cs) = result . (c - cs)
// exactly, and is symmetric under swapping c and cs.
Eigen::VectorXd monomial_secant(const std::vector<int>& set,
                                const Eigen::VectorXd& c,
                                const Eigen::VectorXd& cs);

// Vector divided difference of the full potential:
//   F(c) - F(cs) = result . (c - cs)
// holds to roundoff; equals the gradient when c == cs.
Eigen::VectorXd potential_secant(const PotentialSpec& spec,
                                 const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& cs);

// Concentration tuple validated to lie on the unit-sum hyperplane. Analytic
// call sites construct one to assert their input; the raw vector interface
// above stays unrestricted.
class ConcentrationVector {
 public:
  static ConcentrationVector from(const Eigen::VectorXd& c);
  const Eigen::VectorXd& values() const { return c_; }

 private:
  explicit ConcentrationVector(Eigen::VectorXd c) : c_(std::move(c)) {}
  Eigen::VectorXd c_;
};

}  // namespace nphase
