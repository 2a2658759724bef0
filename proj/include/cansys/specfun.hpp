#pragma once

#include <complex>

namespace cansys {

using complex = std::complex<double>;

// Gamma function on the complex plane (Lanczos approximation, reflection for
// Re z < 1/2). Throws domain_error at the poles z = 0, -1, -2, ... and
// numeric_error when the result overflows double range.
complex gamma_complex(complex z);

// Principal-branch log-gamma, stable for large imaginary parts. Branch
// offsets of 2*pi*i may appear relative to the canonical log-gamma; they
// cancel whenever differences of log-gamma values are exponentiated, which is
// the intended use (gamma-ratio evaluation without overflow or underflow).
complex log_gamma(complex z);

// Confluent hypergeometric function M(a, b, x) = 1F1(a; b; x).
// Series in extended precision with the Kummer transform applied for
// Re x < 0. Throws domain_error when b is a non-positive integer (a parameter
// pole) and numeric_error when the series fails to converge, when
// cancellation has destroyed the result, or when |x| exceeds the supported
// range (|x| <= 100).
complex kummer_M(complex a, complex b, complex x);

// Normalized Bessel function: Gamma(nu+1) * (x/2)^(-nu) * J_nu(x).
// Entire and even in x, equal to 1 at x = 0. Requires nu > -1.
// Power series for |x| <= 30, Hankel asymptotics beyond.
complex bessel_frak(double nu, complex x);

}  // namespace cansys
