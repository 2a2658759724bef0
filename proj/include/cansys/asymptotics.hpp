#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "cansys/hamiltonian.hpp"
#include "cansys/power_model.hpp"
#include "cansys/weyl.hpp"

namespace cansys {

// Index ratio alpha = (rho2 - rho1)/(rho2 + rho1), with the conventions
// alpha = +1 when rho2 is infinite and alpha = -1 when rho1 is (exactly one
// may be infinite).
double alpha_from_indices(double rho1, double rho2);

// Normalized limit coefficient omega(alpha, delta) for leading coefficients
// scaled to 1: gamma-function closed form in the interior, algebraic values
// on the boundary |delta| = sqrt(1 - alpha^2), at alpha = 0 and at
// alpha = +-1.
complex omega_from_alpha_delta(double alpha, double delta);

// arg omega(alpha, delta) in closed trigonometric form, without gamma
// evaluations. Odd and strictly decreasing in delta with range
// [-(pi/2)(1-|alpha|), (pi/2)(1-|alpha|)].
double arg_omega_from_alpha_delta(double alpha, double delta);

// Inverse of the previous map at fixed alpha.
double delta_from_arg_omega(double alpha, double theta);

// Matching scale: the solution of m1(t) m2(t) = 1/r^2 (closed form for power
// data, log-bisection otherwise).
double breve_t(const Hamiltonian& h, double r);

// Growth function a(r) = sqrt(m1/m2) at the matching scale; the modulus
// scale of the Weyl coefficient along the ray r*i.
double a_H(const Hamiltonian& h, double r);

// Predicted power-law asymptotics q(rz) ~ i omega' (z/i)^alpha a(r) from the
// leading primitive coefficients m_i(t) ~ c_i t^(rho_i):
// omega' = c1^((alpha+1)/2) c2^((alpha-1)/2) omega(alpha, delta),
// delta = c3 / sqrt(c1 c2).
struct PowerPrediction {
  double alpha = 0.0;
  complex omega_prime{1.0, 0.0};  // coefficient-normalized omega
  complex omega{1.0, 0.0};        // shape factor omega(alpha, delta)
  double delta = 0.0;
};

PowerPrediction predict_power_asymptotics(double c1, double c2, double c3, double rho1,
                                          double rho2);

// Log-log least-squares estimate of a regular-variation index from positive
// samples (t, f(t)). Rapid variation (f decaying faster than any power at 0)
// is flagged when the local slopes in the smallest decade all exceed 50 and
// grow toward the origin; the index is then reported as infinity.
struct RegVarReport {
  double index = 0.0;
  bool rapid = false;
  double scale = 1.0;         // fitted multiplier: f(t) ~ scale * t^index
  double fit_residual = 0.0;  // rms residual of the log-log fit
  double decades = 0.0;
};

RegVarReport estimate_regvar_index(const std::vector<std::pair<double, double>>& samples);

// Limit ratio delta = lim m3/sqrt(m1 m2) at the origin, averaged over the
// three smallest grid points (which must lie below 1e-3). Vanishing m3 with
// vanishing m1 m2 counts as ratio zero.
double estimate_delta(const Hamiltonian& h, const std::vector<double>& t_grid);

// Verification of the Karamata ratio F(t) (rho+1) / (t f(t)) -> 1 for a
// regularly varying f of index rho > -1 at 0: the primitive F is accumulated
// by local power-law segments (exact for pure powers), the deviation is the
// worst over the smallest sampled decade.
double karamata_ratio(const std::vector<std::pair<double, double>>& f_samples, double rho);

// Row scalings of the compression by r that normalize the primitive at the
// matching scale: b1 = r sqrt(t m2(t)), b2 = r sqrt(t m1(t)) at t = breve_t.
struct KasaharaScalers {
  double b1 = 1.0;
  double b2 = 1.0;
};

KasaharaScalers kasahara_scalers(const Hamiltonian& h, double r);

// Two-parameter rescaling: time compressed by s = b1 b2 / r, rows scaled by
// diag(b1, b2); Weyl coefficients transform as q -> (b1/b2) q(r z). Exact on
// power and piecewise data, exact primitive push-forward on sampled data.
Hamiltonian rescale(const Hamiltonian& h, double r, double b1, double b2);

// Shape of the Kasahara limit Hamiltonian.
enum class LimitShape { regular, rapid_m2, rapid_m1 };

struct LimitSpec {
  LimitShape shape = LimitShape::regular;
  double rho1 = 1.0;   // regular shape only
  double rho2 = 1.0;   // regular shape only
  double delta = 0.0;  // regular shape only
};

struct RescalingDeviation {
  double r = 0.0;
  double dev1 = 0.0;  // first diagonal primitive vs. its limit
  double dev2 = 0.0;  // second diagonal primitive vs. its limit
  double dev3 = 0.0;  // off-diagonal primitive vs. its limit
  double max_dev() const;
};

// Convergence of the rescaled primitives to the Kasahara limit along
// r_values: regular limits are compared as ratios m_i(t x)/m_i(t) against
// x^(rho_i) on x_grid; rapid limits are compared at matched unit-trace
// points against the indicator-step primitives min(T,1) / max(T-1,0). The
// limit may be prescribed; otherwise it is detected from the data.
std::vector<RescalingDeviation> rescaling_limit_check(const Hamiltonian& h,
                                                      const std::vector<double>& r_values,
                                                      const std::vector<double>& x_grid,
                                                      std::optional<LimitSpec> target = {});

struct VerifyCell {
  double r = 0.0;
  double phi = 0.0;
  double rel_error = 0.0;
  WeylStatus status = WeylStatus::indeterminate;
};

struct AsymptoticsVerdict {
  bool pass = false;
  std::vector<VerifyCell> cells;
  double final_max_error = 0.0;  // worst relative error at the largest r
};

// Compares the numerical Weyl coefficient against the power law
// i omega' (z/i)^alpha along rays z = r e^(i phi): passes when every angle
// converges, errors
// do not grow along r (5% slack above the threshold), and the final error is
// at or below the threshold.
AsymptoticsVerdict verify_asymptotics(const Hamiltonian& h, const PowerLaw& law,
                                      const std::vector<double>& r_grid,
                                      const std::vector<double>& angles, double threshold = 0.05,
                                      double disc_tol = 1e-8, double t_max = 1e6,
                                      double ode_tol = 1e-10);

}  // namespace cansys
