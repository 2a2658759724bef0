#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cansys/hamiltonian.hpp"

namespace cansys {

using complex = std::complex<double>;

// Transfer matrix W(t, z) of the canonical system, normalized to W(0, z) = I.
// Piecewise data is propagated by exact segment exponentials; power and
// sampled data by an adaptive embedded Runge-Kutta pair seeded just past the
// origin where the primitive is below 1e-10. Throws domain_error for t
// outside [0, L], numeric_error on step-size underflow.
Eigen::Matrix2cd fundamental_solution(const Hamiltonian& h, double t, complex z,
                                      double tol = 1e-10);

struct WeylDisc {
  complex center{0.0, 0.0};
  double radius = std::numeric_limits<double>::infinity();
  bool finite() const { return std::isfinite(radius); }
};

// Image of the closed upper half-plane (compactified) under the Moebius map
// tau -> (w11 tau + w12)/(w21 tau + w22): the circle through the images of
// tau = 0, 1, infinity. Evaluated from the closed image-of-the-real-line
// formulas on an exactly rescaled matrix; fitting a circle through the three
// image points instead loses the center once the radius nears machine
// precision. Radius is infinite while the image is a half-plane (w21 = 0 or
// collinear images).
WeylDisc weyl_disc(const Eigen::Matrix2cd& w);

enum class WeylStatus {
  converged,      // disc radius fell below disc_tol; value is the limit
  at_infinity,    // half-plane never closed and m2 vanishes: q = infinity
  indeterminate,  // half-plane never closed for another reason
  nonconverged,   // discs are shrinking but did not reach disc_tol by t_max
};

struct WeylResult {
  WeylStatus status = WeylStatus::indeterminate;
  complex value{0.0, 0.0};  // center of the last disc (the limit lies inside it)
  double radius = std::numeric_limits<double>::infinity();
  double t_reached = 0.0;
  std::vector<std::pair<double, double>> radius_trace;  // (t, radius) at checkpoints
  // max |det W - 1| across checkpoints; det W is accumulated as the product
  // of one-step factor determinants, which stays meaningful long after the
  // naive determinant of the grown matrix has cancelled away.
  double max_det_deviation = 0.0;
};

// Weyl coefficient q(z), Im z > 0, as the limit of the nested discs. The
// transfer matrix is integrated incrementally along a geometric checkpoint
// schedule until the disc radius falls below disc_tol or t exceeds t_max.
WeylResult weyl_coefficient(const Hamiltonian& h, complex z, double disc_tol = 1e-8,
                            double t_max = 1e6, double ode_tol = 1e-10);

}  // namespace cansys
