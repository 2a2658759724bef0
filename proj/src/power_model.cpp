#include "cansys/power_model.hpp"

#include <cmath>

#include "cansys/errors.hpp"
#include "cansys/specfun.hpp"

namespace cansys {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

bool same_index(double rho1, double rho2) {
  return std::abs(rho1 - rho2) <= 1e-12 * (rho1 + rho2);
}

void require_full_data(const PowerData& d, const char* who) {
  validate_power(d);
  if (!(d.kappa1 > 0.0) || !(d.kappa2 > 0.0)) {
    throw domain_error(std::string(who) + ": single-channel data, use boundary_case_q");
  }
}

bool is_diag_step(const Eigen::Matrix2d& m, bool upper) {
  const double want1 = upper ? 1.0 : 0.0;
  const double want2 = upper ? 0.0 : 1.0;
  return std::abs(m(0, 0) - want1) <= 1e-12 && std::abs(m(1, 1) - want2) <= 1e-12 &&
         std::abs(m(0, 1)) <= 1e-12 && std::abs(m(1, 0)) <= 1e-12;
}

}  // namespace

complex q_power_eval(const PowerLaw& law, complex z) {
  if (!(z.imag() > 0.0)) throw domain_error("q_power_eval: z must be in the upper half-plane");
  const complex z_over_i(z.imag(), -z.real());
  return complex(0.0, 1.0) * law.omega * std::pow(z_over_i, law.alpha);
}

void validate_power_law(const PowerLaw& law) {
  if (!(std::abs(law.alpha) <= 1.0 + 1e-12)) {
    throw domain_error("power law: alpha must lie in [-1, 1]");
  }
  if (law.omega == complex(0.0, 0.0)) return;
  const double cone = 0.5 * kPi * (1.0 - std::min(1.0, std::abs(law.alpha)));
  if (std::abs(std::arg(law.omega)) > cone + 1e-9) {
    throw domain_error("power law: omega leaves the admissible sector");
  }
}

PowerLaw closed_form_q(const PowerData& d) {
  require_full_data(d, "closed_form_q");
  const double alpha = (d.rho2 - d.rho1) / (d.rho2 + d.rho1);
  const double r3 = power_rho3_effective(d);
  const double kap = power_kappa(d);
  complex omega;
  if (same_index(d.rho1, d.rho2)) {
    omega = complex(kap, -d.kappa3) / d.kappa2;
  } else if (power_kappa_degenerate(d)) {
    omega = std::pow(complex(0.0, 1.0) * alpha * d.kappa3, 1.0 + alpha) *
            (std::tgamma(-alpha) / std::tgamma(1.0 + alpha)) /
            (d.kappa2 * std::pow(r3, alpha));
  } else {
    const complex shift(0.0, d.kappa3 / kap);
    const complex a_plus = 1.0 + 0.5 * alpha * (1.0 + shift);
    const complex a_minus = -0.5 * alpha * (1.0 - shift);
    // Gamma ratios through log-gamma: the individual values under- or
    // overflow double range near the degenerate boundary.
    const complex lg = log_gamma(complex(-alpha, 0.0)) - log_gamma(complex(1.0 + alpha, 0.0)) +
                       log_gamma(a_plus) - log_gamma(a_minus);
    omega = std::pow(2.0 * kap, 1.0 + alpha) / (d.kappa2 * std::pow(r3, alpha)) * std::exp(lg);
  }
  PowerLaw law{alpha, omega};
  validate_power_law(law);
  return law;
}

BoundaryVerdict boundary_case_q(const PowerData& d) {
  validate_power(d);
  if (!power_is_boundary(d)) {
    throw domain_error("boundary_case_q: data has both diagonal channels active");
  }
  BoundaryVerdict v;
  v.kind = d.kappa1 > 0.0 ? BoundaryKind::q_infinite : BoundaryKind::q_zero;
  return v;
}

BoundaryVerdict boundary_case_q(const Hamiltonian& h) {
  const auto& segs = h.segments();
  if (segs.size() != 2 || !std::isinf(segs[1].len)) {
    throw domain_error("boundary_case_q: expected a two-segment step Hamiltonian");
  }
  BoundaryVerdict v;
  v.kind = BoundaryKind::step_law;
  if (is_diag_step(segs[0].h, true) && is_diag_step(segs[1].h, false)) {
    v.law = {1.0, complex(segs[0].len, 0.0)};
    return v;
  }
  if (is_diag_step(segs[0].h, false) && is_diag_step(segs[1].h, true)) {
    v.law = {-1.0, complex(1.0 / segs[0].len, 0.0)};
    return v;
  }
  throw domain_error("boundary_case_q: segments are not coordinate indicator steps");
}

Hamiltonian up_step(double omega) {
  if (!(omega > 0.0)) throw domain_error("up_step: omega must be positive");
  Eigen::Matrix2d e1, e2;
  e1 << 1, 0, 0, 0;
  e2 << 0, 0, 0, 1;
  return Hamiltonian::piecewise({{omega, e1}, {kInf, e2}});
}

Hamiltonian down_step(double omega) {
  if (!(omega > 0.0)) throw domain_error("down_step: omega must be positive");
  Eigen::Matrix2d e1, e2;
  e1 << 1, 0, 0, 0;
  e2 << 0, 0, 0, 1;
  return Hamiltonian::piecewise({{1.0 / omega, e2}, {kInf, e1}});
}

double arg_omega(const PowerData& d) {
  require_full_data(d, "arg_omega");
  if (d.kappa3 == 0.0) return 0.0;
  const double alpha = (d.rho2 - d.rho1) / (d.rho2 + d.rho1);
  const double kap = power_kappa(d);
  if (same_index(d.rho1, d.rho2)) return -std::atan2(d.kappa3, kap);
  if (power_kappa_degenerate(d)) return -sgn(d.kappa3) * 0.5 * kPi * (1.0 - std::abs(alpha));
  return -std::atan(std::tan(0.5 * kPi * (1.0 - std::abs(alpha))) *
                    std::tanh(0.5 * kPi * std::abs(alpha) * d.kappa3 / kap));
}

InverseResult inverse_problem(double alpha, complex omega_hat, double kappa1, double kappa2,
                              double sigma) {
  if (!(std::abs(alpha) < 1.0)) throw domain_error("inverse_problem: alpha must be in (-1, 1)");
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0) || !(sigma > 0.0)) {
    throw domain_error("inverse_problem: kappa1, kappa2, sigma must be positive");
  }
  if (omega_hat == complex(0.0, 0.0)) throw domain_error("inverse_problem: omega must be nonzero");
  const double theta = std::arg(omega_hat);
  const double cone = 0.5 * kPi * (1.0 - std::abs(alpha));
  if (std::abs(theta) > cone + 1e-12) {
    throw domain_error("inverse_problem: omega outside the admissible sector");
  }

  PowerData d;
  if (alpha >= 0.0) {
    d.rho1 = sigma;
    d.rho2 = (1.0 + alpha) / (1.0 - alpha) * sigma;
  } else {
    d.rho1 = (1.0 - alpha) / (1.0 + alpha) * sigma;
    d.rho2 = sigma;
  }
  d.rho3 = 0.5 * (d.rho1 + d.rho2);
  d.kappa1 = kappa1;
  d.kappa2 = kappa2;

  const double kmax = std::sqrt(kappa1 * kappa2);
  if (theta == 0.0) {
    d.kappa3 = 0.0;
  } else if (std::abs(theta) >= cone - 1e-13) {
    d.kappa3 = -sgn(theta) * kmax;
  } else {
    // arg omega is strictly decreasing in kappa3; bisect for the match.
    double lo = -kmax, hi = kmax;
    auto angle = [&d](double k3) {
      PowerData probe = d;
      probe.kappa3 = k3;
      return arg_omega(probe);
    };
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double diff = angle(mid) - theta;
      if (std::abs(diff) <= 1e-14 || hi - lo <= 1e-15 * kmax) {
        lo = hi = mid;
        break;
      }
      (diff >= 0.0 ? lo : hi) = mid;
    }
    d.kappa3 = 0.5 * (lo + hi);
  }

  validate_power(d);
  const PowerLaw closed = closed_form_q(d);
  return {d, std::abs(omega_hat) / std::abs(closed.omega)};
}

std::pair<complex, complex> solution_entries_power(const PowerData& d, double x, complex z) {
  require_full_data(d, "solution_entries_power");
  if (same_index(d.rho1, d.rho2)) {
    throw domain_error("solution_entries_power: requires rho1 != rho2");
  }
  if (power_kappa_degenerate(d)) {
    throw domain_error("solution_entries_power: requires kappa1 kappa2 > kappa3^2");
  }
  if (x < 0.0) throw domain_error("solution_entries_power: x must be nonnegative");
  if (x == 0.0) return {complex(1.0, 0.0), complex(0.0, 0.0)};
  const double r3 = power_rho3_effective(d);
  const double kap = power_kappa(d);
  const double big_x = std::pow(x, r3) / r3;
  const complex i(0.0, 1.0);
  const complex envelope = std::exp(i * kap * z * big_x);
  const complex arg = -2.0 * kap * i * z * big_x;
  const double ratio = d.rho2 / r3;
  const complex drift = i * (d.kappa3 / kap) * ((d.rho1 - d.rho2) / (d.rho1 + d.rho2));
  const complex a_minus = 0.5 * (1.0 - ratio) - 0.5 * drift;
  const complex a_plus = 0.5 * (1.0 + ratio) - 0.5 * drift;
  const complex b_minus(1.0 - ratio, 0.0);
  const complex b_plus(1.0 + ratio, 0.0);
  const complex w11 = envelope * kummer_M(a_minus, b_minus, arg);
  const complex w21 =
      -(d.kappa2 / d.rho2) * z * std::pow(x, d.rho2) * envelope * kummer_M(a_plus, b_plus, arg);
  return {w11, w21};
}

std::pair<complex, complex> solution_entries_bessel(const PowerData& d, double x, complex z) {
  require_full_data(d, "solution_entries_bessel");
  if (d.kappa3 != 0.0) throw domain_error("solution_entries_bessel: requires kappa3 = 0");
  if (x < 0.0) throw domain_error("solution_entries_bessel: x must be nonnegative");
  if (x == 0.0) return {complex(1.0, 0.0), complex(0.0, 0.0)};
  const double r3 = power_rho3_effective(d);
  const double kap = std::sqrt(d.kappa1 * d.kappa2);
  const double nu = d.rho2 / (d.rho1 + d.rho2);
  const complex arg = kap * z * std::pow(x, r3) / r3;
  const complex w11 = bessel_frak(-nu, arg);
  const complex w21 = -(d.kappa2 / d.rho2) * z * std::pow(x, d.rho2) * bessel_frak(nu, arg);
  return {w11, w21};
}

namespace {

void check_scalar_params(complex dcoef, double gamma) {
  if (dcoef == complex(0.0, 0.0)) throw domain_error("scalar solution: d must be nonzero");
  if (!(gamma > 0.0) || gamma == 1.0) {
    throw domain_error("scalar solution: gamma must be positive and different from 1");
  }
}

}  // namespace

complex scalar_solution_plus(complex c, complex d, double gamma, double x) {
  check_scalar_params(d, gamma);
  if (!(x > 0.0)) throw domain_error("scalar solution: x must be positive");
  const double xg = std::pow(x, gamma);
  const complex a = (gamma + 1.0 - c / d) / (2.0 * gamma);
  const complex b((gamma + 1.0) / gamma, 0.0);
  return x * std::exp(-(d / gamma) * xg) * kummer_M(a, b, (2.0 * d / gamma) * xg);
}

complex scalar_solution_minus(complex c, complex d, double gamma, double x) {
  check_scalar_params(d, gamma);
  if (!(x > 0.0)) throw domain_error("scalar solution: x must be positive");
  const double xg = std::pow(x, gamma);
  const complex a = (gamma - 1.0 - c / d) / (2.0 * gamma);
  const complex b((gamma - 1.0) / gamma, 0.0);
  return std::exp(-(d / gamma) * xg) * kummer_M(a, b, (2.0 * d / gamma) * xg);
}

double kummer_solutions_check(complex c, complex d, double gamma, const std::vector<double>& xs) {
  check_scalar_params(d, gamma);
  if (xs.empty()) throw domain_error("kummer_solutions_check: empty grid");
  double worst = 0.0;
  for (double x : xs) {
    if (!(x > 0.0)) throw domain_error("kummer_solutions_check: grid must be positive");
    const double vmag = std::abs(c) * std::pow(x, gamma - 2.0) +
                        std::norm(d) * std::pow(x, 2.0 * gamma - 2.0);
    // Step size balancing truncation against roundoff: small enough for the
    // local oscillation and the potential's own variation, large enough to
    // keep cancellation noise below the target.
    const double h = std::min(0.018 * x, 0.05 / std::sqrt(vmag + 1e-30));
    const complex v = c * std::pow(x, gamma - 2.0) - d * d * std::pow(x, 2.0 * gamma - 2.0);
    for (int which = 0; which < 2; ++which) {
      const auto u = [&](double s) {
        return which == 0 ? scalar_solution_plus(c, d, gamma, s)
                          : scalar_solution_minus(c, d, gamma, s);
      };
      const complex u0 = u(x);
      const complex upp = (-u(x - 2 * h) + 16.0 * u(x - h) - 30.0 * u0 + 16.0 * u(x + h) -
                           u(x + 2 * h)) /
                          (12.0 * h * h);
      const double res = std::abs(upp + v * u0) / ((1.0 + vmag) * (1.0 + std::abs(u0)));
      worst = std::max(worst, res);
    }
  }
  return worst;
}

std::optional<ReparamWitness> reparam_equivalent(const PowerData& a, const PowerData& b) {
  require_full_data(a, "reparam_equivalent");
  require_full_data(b, "reparam_equivalent");
  const double beta = b.rho1 / a.rho1;
  if (std::abs(b.rho2 - beta * a.rho2) > 1e-12 * b.rho2) return std::nullopt;
  const double c = std::pow(b.kappa1 / (beta * a.kappa1), 1.0 / a.rho1);
  const double want2 = beta * std::pow(c, a.rho2) * a.kappa2;
  if (std::abs(b.kappa2 - want2) > 1e-10 * want2) return std::nullopt;
  if ((a.kappa3 == 0.0) != (b.kappa3 == 0.0)) return std::nullopt;
  if (a.kappa3 != 0.0) {
    const double want3 = beta * std::pow(c, power_rho3_effective(a)) * a.kappa3;
    if (std::abs(b.kappa3 - want3) > 1e-10 * std::abs(want3)) return std::nullopt;
  }
  return ReparamWitness{beta, c};
}

PowerData rescale_power(const PowerData& d, double r, double b1, double b2) {
  validate_power(d);
  if (!(r > 0.0) || !(b1 > 0.0) || !(b2 > 0.0)) {
    throw domain_error("rescale_power: r, b1, b2 must be positive");
  }
  const double s = b1 * b2 / r;
  PowerData out = d;
  out.kappa1 = d.kappa1 == 0.0 ? 0.0 : b1 * b1 * std::pow(s, d.rho1 - 1.0) * d.kappa1;
  out.kappa2 = d.kappa2 == 0.0 ? 0.0 : b2 * b2 * std::pow(s, d.rho2 - 1.0) * d.kappa2;
  out.kappa3 =
      d.kappa3 == 0.0 ? 0.0 : b1 * b2 * std::pow(s, power_rho3_effective(d) - 1.0) * d.kappa3;
  return out;
}

}  // namespace cansys
