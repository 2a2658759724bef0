#include "cansys/specfun.hpp"

#include <cmath>
#include <limits>

#include "cansys/errors.hpp"

namespace cansys {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lanczos approximation, g = 607/128 with 15 coefficients. Relative accuracy
// around 1e-15 on the half-plane Re z >= 1/2.
constexpr double kLanczosG = 4.7421875;
constexpr double kLanczosC[15] = {
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
};

bool is_nonpositive_integer(complex z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

complex lanczos_series(complex z) {
  complex acc(kLanczosC[0], 0.0);
  for (int k = 1; k < 15; ++k) acc += kLanczosC[k] / (z - 1.0 + static_cast<double>(k));
  return acc;
}

// log(1 + w) accurate for small |w|.
complex log1p_complex(complex w) {
  if (std::abs(w) > 1e-4) return std::log(1.0 + w);
  return w * (1.0 - w * (0.5 - w * (1.0 / 3.0 - w * 0.25)));
}

// log(sin(pi z)) up to a multiple of 2*pi*i, stable for large |Im z| where
// sin(pi z) itself overflows.
complex log_sin_pi(complex z) {
  const double y = z.imag();
  if (std::abs(y) <= 20.0) return std::log(std::sin(kPi * z));
  const complex iw = complex(0.0, 1.0) * (kPi * z);
  if (y > 0.0) {
    // sin w = (i/2) e^{-iw} (1 - e^{2iw}), with |e^{2iw}| = e^{-2 pi y} tiny.
    return complex(-std::log(2.0), kPi / 2.0) - iw + log1p_complex(-std::exp(2.0 * iw));
  }
  return complex(-std::log(2.0), -kPi / 2.0) + iw + log1p_complex(-std::exp(-2.0 * iw));
}

// ---------------------------------------------------------------------------
// Minimal complex arithmetic over __float128 for the hypergeometric series.
// Only +, -, *, / and a double-precision magnitude estimate are needed.

struct qcplx {
  __float128 re;
  __float128 im;
};

qcplx qc(complex z) { return {static_cast<__float128>(z.real()), static_cast<__float128>(z.imag())}; }
qcplx qc(double x) { return {static_cast<__float128>(x), 0}; }

qcplx operator+(qcplx a, qcplx b) { return {a.re + b.re, a.im + b.im}; }
qcplx operator*(qcplx a, qcplx b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
qcplx operator/(qcplx a, qcplx b) {
  const __float128 d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

double qabs_est(qcplx a) {
  return std::hypot(static_cast<double>(a.re), static_cast<double>(a.im));
}

complex qc_to_complex(qcplx a) {
  return complex(static_cast<double>(a.re), static_cast<double>(a.im));
}

// ---------------------------------------------------------------------------

complex kummer_series(complex a, complex b, complex x) {
  qcplx sum = qc(1.0);
  qcplx term = qc(1.0);
  const qcplx qx = qc(x);
  double max_term = 1.0;
  int small_streak = 0;
  bool converged = false;
  for (int n = 0; n < 10000; ++n) {
    term = term * (qc(a) + qc(static_cast<double>(n))) / (qc(b) + qc(static_cast<double>(n)));
    term = term * qx / qc(static_cast<double>(n + 1));
    sum = sum + term;
    const double at = qabs_est(term);
    max_term = std::max(max_term, at);
    if (at <= 1e-17 * qabs_est(sum)) {
      if (++small_streak >= 3) {
        converged = true;
        break;
      }
    } else {
      small_streak = 0;
    }
  }
  if (!converged) throw numeric_error("kummer_M: series did not converge");
  const double result = qabs_est(sum);
  if (max_term > 1e20 * result) {
    throw numeric_error("kummer_M: catastrophic cancellation in series");
  }
  return qc_to_complex(sum);
}

// Asymptotic (Hankel) evaluation of the normalized Bessel function for
// |x| > 30: J_nu = (H1 + H2) / 2 with the standard inverse-power series,
// truncated at the smallest term.
complex hankel_frak(double nu, complex x) {
  const complex chi = x - (0.5 * nu + 0.25) * kPi;
  const complex inv_x = 1.0 / x;
  const complex rot_p = complex(0.0, 1.0) * inv_x;
  const complex rot_m = complex(0.0, -1.0) * inv_x;
  complex s_plus(1.0, 0.0), s_minus(1.0, 0.0);
  complex t_plus(1.0, 0.0), t_minus(1.0, 0.0);
  double prev_mag = 1.0;
  for (int k = 1; k <= 50; ++k) {
    const double ck = (4.0 * nu * nu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k);
    t_plus *= ck * rot_p;
    t_minus *= ck * rot_m;
    const double mag = std::abs(t_plus);
    if (mag > prev_mag) break;  // past the optimal truncation point
    s_plus += t_plus;
    s_minus += t_minus;
    prev_mag = mag;
    if (mag <= 1e-18) break;
  }
  const complex amp = std::sqrt(2.0 / (kPi * x));
  const complex j = 0.5 * amp * (std::exp(complex(0.0, 1.0) * chi) * s_plus +
                                 std::exp(complex(0.0, -1.0) * chi) * s_minus);
  return std::tgamma(nu + 1.0) * std::pow(0.5 * x, -nu) * j;
}

}  // namespace

complex log_gamma(complex z) {
  if (is_nonpositive_integer(z)) throw domain_error("log_gamma: pole at non-positive integer");
  if (z.real() >= 0.5) {
    const complex t = z + (kLanczosG - 0.5);
    return 0.5 * std::log(2.0 * kPi) + (z - 0.5) * std::log(t) - t + std::log(lanczos_series(z));
  }
  // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z).
  return std::log(kPi) - log_sin_pi(z) - log_gamma(1.0 - z);
}

complex gamma_complex(complex z) {
  if (is_nonpositive_integer(z)) throw domain_error("gamma_complex: pole at non-positive integer");
  const complex lg = log_gamma(z);
  if (lg.real() > 709.0) throw numeric_error("gamma_complex: overflow");
  return std::exp(lg);
}

complex kummer_M(complex a, complex b, complex x) {
  if (is_nonpositive_integer(b)) {
    throw domain_error("kummer_M: b is a non-positive integer (parameter pole)");
  }
  if (std::abs(x) > 100.0 * (1.0 + 1e-12)) {
    throw numeric_error("kummer_M: |x| exceeds the supported range (100)");
  }
  if (x.real() < 0.0) {
    // Kummer transform keeps the series argument in the stable half-plane.
    return std::exp(x) * kummer_series(b - a, b, -x);
  }
  return kummer_series(a, b, x);
}

complex bessel_frak(double nu, complex x) {
  if (!(nu > -1.0)) throw domain_error("bessel_frak: requires nu > -1");
  if (x.real() < 0.0) x = -x;  // even in x
  const double ax = std::abs(x);
  if (ax <= 30.0) {
    // Power series in u = (x/2)^2: sum over n of (-u)^n / (n! (nu+1)_n).
    const qcplx mu = qc(-0.25) * qc(x) * qc(x);
    qcplx sum = qc(1.0);
    qcplx term = qc(1.0);
    int small_streak = 0;
    for (int n = 0; n < 2000; ++n) {
      term = term * mu / (qc(static_cast<double>(n + 1)) * qc(nu + 1.0 + static_cast<double>(n)));
      sum = sum + term;
      if (qabs_est(term) <= 1e-20 * qabs_est(sum)) {
        if (++small_streak >= 3) return qc_to_complex(sum);
      } else {
        small_streak = 0;
      }
    }
    throw numeric_error("bessel_frak: series did not converge");
  }
  return hankel_frak(nu, x);
}

}  // namespace cansys
