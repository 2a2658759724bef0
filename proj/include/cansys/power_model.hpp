#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "cansys/hamiltonian.hpp"

namespace cansys {

using complex = std::complex<double>;

// Weyl coefficient of homogeneous type: q(z) = i omega (z/i)^alpha on the
// upper half-plane, principal branch. Admissible laws have alpha in [-1, 1]
// and omega in the closed sector |arg omega| <= (pi/2)(1 - |alpha|).
struct PowerLaw {
  double alpha = 0.0;
  complex omega{1.0, 0.0};
};

complex q_power_eval(const PowerLaw& law, complex z);

// Throws domain_error when the law leaves the admissible sector.
void validate_power_law(const PowerLaw& law);

// Closed-form law of a power Hamiltonian with both diagonal channels active:
// gamma-function expression in the general case, the degenerate product form
// when kappa1 kappa2 = kappa3^2, and the algebraic form when rho1 = rho2.
// Single-channel data is rejected (use boundary_case_q).
PowerLaw closed_form_q(const PowerData& d);

enum class BoundaryKind { q_infinite, q_zero, step_law };

struct BoundaryVerdict {
  BoundaryKind kind = BoundaryKind::step_law;
  PowerLaw law{};  // set for step_law only
};

// Degenerate cases: single-channel power data gives the constant verdicts
// q = infinity (upper channel) and q = 0 (lower channel).
BoundaryVerdict boundary_case_q(const PowerData& d);

// Two-segment diagonal step Hamiltonians: an indicator step from the first
// to the second coordinate direction at t = omega realizes q = omega z
// (law alpha = +1), the reversed step at t = 1/omega realizes q = -omega / z
// (law alpha = -1).
BoundaryVerdict boundary_case_q(const Hamiltonian& h);

Hamiltonian up_step(double omega);    // q(z) = omega z
Hamiltonian down_step(double omega);  // q(z) = -omega / z

// arg omega of the closed-form law, without gamma evaluations: an odd,
// strictly decreasing function of kappa3 with range
// [-(pi/2)(1-|alpha|), (pi/2)(1-|alpha|)].
double arg_omega(const PowerData& d);

// Reconstruction of power data realizing a prescribed law: given alpha in
// (-1, 1), scales kappa1, kappa2, an index scale sigma and a target omega in
// the admissible sector, returns data whose closed-form law has the same
// argument, plus the modulus correction gamma; rescaling the data by
// (r, b1, b2) = (1, gamma, 1) matches omega exactly.
struct InverseResult {
  PowerData data;
  double gamma = 1.0;
};

InverseResult inverse_problem(double alpha, complex omega_hat, double kappa1, double kappa2,
                              double sigma);

// First-column transfer matrix entries (w11, w21) of a power Hamiltonian in
// closed form via confluent hypergeometric functions. Requires both
// channels active, rho1 != rho2 and kappa > 0.
std::pair<complex, complex> solution_entries_power(const PowerData& d, double x, complex z);

// The same entries via normalized Bessel functions; requires kappa3 = 0.
std::pair<complex, complex> solution_entries_bessel(const PowerData& d, double x, complex z);

// Basis solutions of the scalar equation
//   u'' + (c x^(gamma-2) - d^2 x^(2 gamma-2)) u = 0,  d != 0, gamma > 0,
// gamma != 1: u_plus vanishes like x at the origin, u_minus tends to 1.
complex scalar_solution_plus(complex c, complex d, double gamma, double x);
complex scalar_solution_minus(complex c, complex d, double gamma, double x);

// Max mixed absolute-relative residual of the two basis solutions in the
// scalar equation over a grid, using five-point finite differences:
// |u'' + V u| / ((1 + |V|)(1 + |u|)).
double kummer_solutions_check(complex c, complex d, double gamma, const std::vector<double>& xs);

// Decides whether two power Hamiltonians are reparametrizations of each
// other (equal Weyl coefficients): witness (beta, c) with
// rho~_i = beta rho_i and kappa~_i = beta c^(rho_i) kappa_i.
struct ReparamWitness {
  double beta = 1.0;
  double c = 1.0;
};

std::optional<ReparamWitness> reparam_equivalent(const PowerData& a, const PowerData& b);

// Push-forward of power data under the two-parameter rescaling with
// time-compression r and row scalings b1, b2; the law transforms as
// alpha -> alpha, omega -> (b1/b2) r^alpha omega.
PowerData rescale_power(const PowerData& d, double r, double b1, double b2);

}  // namespace cansys
