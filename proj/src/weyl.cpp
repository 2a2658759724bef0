#include "cansys/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cansys/errors.hpp"

namespace cansys {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double maxabs(const Eigen::Matrix2cd& m) {
  return std::max({std::abs(m(0, 0)), std::abs(m(0, 1)), std::abs(m(1, 0)), std::abs(m(1, 1))});
}

// a*b - c*d with the product roundings compensated (Kahan).
double prod_diff(double a, double b, double c, double d) {
  const double w = c * d;
  const double e = std::fma(c, d, -w);
  const double f = std::fma(a, b, -w);
  return f - e;
}

// Compensated sum of four products a_i * b_i. fma recovers each product's
// rounding error exactly, so near-total cancellation between the products
// still leaves an accurate result.
double dot4(const double (&a)[4], const double (&b)[4]) {
  double terms[8];
  for (int i = 0; i < 4; ++i) {
    terms[i] = a[i] * b[i];
    terms[4 + i] = std::fma(a[i], b[i], -terms[i]);
  }
  double s = 0.0;
  double comp = 0.0;
  for (double x : terms) {
    const double t = s + x;
    comp += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + comp;
}

// det = w11 w22 - w12 w21, accurate relative to the true determinant of the
// stored entries even when the two products cancel almost completely. The
// naive evaluation loses the determinant entirely once the entries exceed
// 1e8 or so, which a transfer matrix near disc convergence always does.
complex det2(const Eigen::Matrix2cd& m) {
  const complex a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const double re = dot4({a.real(), -a.imag(), -b.real(), b.imag()},
                         {d.real(), d.imag(), c.real(), c.imag()});
  const double im = dot4({a.real(), a.imag(), -b.real(), -b.imag()},
                         {d.imag(), d.real(), c.imag(), c.real()});
  return {re, im};
}

// Rescale a one-step factor to unit determinant. The exact one-step transfer
// of a trace-free system has determinant exactly 1; the numerical factor's
// deviation is pure truncation, so dividing it out costs no accuracy and
// keeps the running determinant product at machine precision. A factor whose
// determinant is far from 1 is left alone so the deviation gets reported
// instead of amplified.
Eigen::Matrix2cd unit_det(const Eigen::Matrix2cd& f) {
  const complex df = det2(f);
  if (std::abs(df - complex(1.0, 0.0)) > 0.5) return f;
  return f / std::sqrt(df);
}

// System matrix A = H J^{-1} = [[-h3, h1], [-h2, h3]].
Eigen::Matrix2cd system_matrix(const Eigen::Matrix2d& h) {
  Eigen::Matrix2cd a;
  a << -h(0, 1), h(0, 0), -h(1, 1), h(0, 1);
  return a;
}

// exp(B) for a trace-free 2x2 matrix: cosh(mu) I + sinhc(mu) B with
// mu^2 = -det B.
Eigen::Matrix2cd expm_tracefree(const Eigen::Matrix2cd& b) {
  const complex mu = std::sqrt(-(b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0)));
  complex ch, shc;
  if (std::abs(mu) < 1e-4) {
    const complex m2 = mu * mu;
    ch = 1.0 + m2 * (0.5 + m2 / 24.0);
    shc = 1.0 + m2 * (1.0 / 6.0 + m2 / 120.0);
  } else {
    ch = std::cosh(mu);
    shc = std::sinh(mu) / mu;
  }
  return ch * Eigen::Matrix2cd::Identity() + shc * b;
}

// Smallest power of two at or above x (x > 0, finite). Dividing a matrix by
// it rescales the entries exactly.
double pow2_at_least(double x) {
  int e = 0;
  std::frexp(x, &e);
  return std::ldexp(1.0, e);
}

// Disc parameters of the Moebius image of the real line under
// tau -> (v11 tau + v12)/(v21 tau + v22), for a matrix scaled to maxabs ~ 1.
// The boundary circle satisfies
//   center = (v11 conj v22 - v12 conj v21) / d,  radius = |det V| / |d|,
//   d = v21 conj v22 - v22 conj v21 = 2i Im(v21 conj v22),
// and passes through the images of every real tau (0, 1 and infinity
// included). detmag is |det V| supplied by the caller: a tracked value keeps
// full relative accuracy where the naive determinant has none.
WeylDisc image_disc(const Eigen::Matrix2cd& v, double detmag) {
  WeylDisc disc;
  const complex v21 = v(1, 0), v22 = v(1, 1);
  const double improd = prod_diff(v21.imag(), v22.real(), v21.real(), v22.imag());
  const double dmag = 2.0 * std::abs(improd);
  if (dmag <= 2e-14 * std::abs(v21) * std::abs(v22) || dmag == 0.0) {
    // The image of the real line is again a line: a half-plane, not yet a
    // disc. Report a finite image point as a diagnostic center.
    if (std::abs(v22) >= std::abs(v21) && v22 != complex(0.0, 0.0)) {
      disc.center = v(0, 1) / v22;
    } else if (v21 != complex(0.0, 0.0)) {
      disc.center = v(0, 0) / v21;
    }
    return disc;
  }
  const complex num = v(0, 0) * std::conj(v22) - v(0, 1) * std::conj(v21);
  disc.center = num / complex(0.0, 2.0 * improd);
  disc.radius = detmag / dmag;
  return disc;
}

// Incremental propagation of W(t, z) along increasing t. The determinant of
// W is tracked as the running product of one-step factor determinants: the
// factors stay well conditioned, so the product keeps relative accuracy the
// accumulated matrix cannot offer.
class Propagator {
 public:
  Propagator(const Hamiltonian& h, complex z, double tol) : h_(&h), z_(z), tol_(tol) {
    w_.setIdentity();
    if (h.kind() == Hamiltonian::Kind::piecewise) {
      t_ = 0.0;
      return;
    }
    t_ = seed_point();
    const PrimitiveValue m = primitive(h, t_);
    // W(t0) = I - z M(t0) J, accurate to O((z |M|)^2) near the origin.
    w_(0, 0) = 1.0 - z * m.m3;
    w_(0, 1) = z * m.m1;
    w_(1, 0) = -z * m.m2;
    w_(1, 1) = 1.0 + z * m.m3;
    det_ = det2(w_);
  }

  double t() const { return t_; }
  const Eigen::Matrix2cd& matrix() const { return w_; }
  complex tracked_det() const { return det_; }

  void advance_to(double tt) {
    if (tt <= t_) return;
    if (h_->kind() == Hamiltonian::Kind::piecewise) {
      advance_piecewise(tt);
    } else {
      advance_rk(tt);
    }
  }

 private:
  double seed_point() const {
    if (h_->kind() == Hamiltonian::Kind::power) {
      const PowerData& d = h_->power_data();
      double t0 = kInf;
      const auto channel = [&t0](double kappa, double rho) {
        if (kappa != 0.0) t0 = std::min(t0, std::pow(1e-10 * rho / std::abs(kappa), 1.0 / rho));
      };
      channel(d.kappa1, d.rho1);
      channel(d.kappa2, d.rho2);
      channel(d.kappa3, power_rho3_effective(d));
      return std::min(t0, 1e-3);
    }
    double s = std::isfinite(h_->length()) ? h_->length() * 1e-3 : 1e-3;
    for (int i = 0; i < 2000; ++i) {
      const PrimitiveValue m = primitive(*h_, s);
      if (std::max({std::abs(m.m1), std::abs(m.m2), std::abs(m.m3)}) <= 1e-10) return s;
      s *= 0.5;
      if (s < 1e-280) throw numeric_error("fundamental_solution: cannot seed near the origin");
    }
    return s;
  }

  void advance_piecewise(double tt) {
    const auto& segs = h_->segments();
    double cum = 0.0;
    for (const Hamiltonian::Segment& s : segs) {
      const double seg_end = cum + s.len;
      if (seg_end > t_) {
        const double upto = std::min(seg_end, tt);
        const double dt = upto - t_;
        if (dt > 0.0) {
          // Cap the exponent per factor: one factor with cosh(mu) >> 1 would
          // smear its determinant by eps cosh^2(mu), while many factors with
          // |mu| <= 1 keep the tracked product at machine accuracy. det H = 0
          // (a nilpotent direction) needs no splitting at all.
          const double mu_rate = std::abs(z_) * std::sqrt(std::max(s.h.determinant(), 0.0));
          double parts = 1.0;
          if (mu_rate * dt > 1.0) parts = std::ceil(mu_rate * dt);
          if (parts > 5e7) {
            throw numeric_error("fundamental_solution: advance interval too long to subdivide");
          }
          const int n = static_cast<int>(parts);
          const Eigen::Matrix2cd f =
              unit_det(expm_tracefree(z_ * (dt / n) * system_matrix(s.h)));
          const complex df = det2(f);
          for (int i = 0; i < n; ++i) {
            w_ = w_ * f;
            det_ *= df;
          }
          t_ = upto;
          if (!std::isfinite(maxabs(w_))) {
            throw numeric_error("fundamental_solution: transfer matrix overflow");
          }
        }
        if (t_ >= tt) return;
      }
      cum = seg_end;
    }
    t_ = tt;
  }

  Eigen::Matrix2cd sysmat_at(double t) const { return system_matrix((*h_)(t)); }

  void advance_rk(double tt) {
    // Dormand-Prince 5(4) with FSAL, formulated on the one-step transfer
    // factor F (F = I at the start of each step, W <- W F on acceptance) so
    // the factor determinant is available for the running product.
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    if (!have_amat_) {
      amat_ = sysmat_at(t_);
      have_amat_ = true;
    }
    if (hstep_ <= 0.0) {
      const double anorm = std::abs(z_) * maxabs(amat_);
      hstep_ = std::min(tt - t_, 0.01 / (anorm + 1e-30));
    }
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    while (t_ < tt) {
      const double rem = tt - t_;
      if (rem <= tt * 1e-15) {
        // Sub-resolution sliver left by step-size rounding.
        t_ = tt;
        return;
      }
      const double hs = std::min(hstep_, rem);
      if (hs < t_ * 1e-14) {
        throw numeric_error("fundamental_solution: step size underflow (non-integrable input?)");
      }
      const Eigen::Matrix2cd k1 = z_ * amat_;
      const Eigen::Matrix2cd k2 = z_ * ((id + hs * (a21 * k1)) * sysmat_at(t_ + c2 * hs));
      const Eigen::Matrix2cd k3 =
          z_ * ((id + hs * (a31 * k1 + a32 * k2)) * sysmat_at(t_ + c3 * hs));
      const Eigen::Matrix2cd k4 =
          z_ * ((id + hs * (a41 * k1 + a42 * k2 + a43 * k3)) * sysmat_at(t_ + c4 * hs));
      const Eigen::Matrix2cd k5 =
          z_ * ((id + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)) * sysmat_at(t_ + c5 * hs));
      const Eigen::Matrix2cd a_end = sysmat_at(t_ + hs);
      const Eigen::Matrix2cd k6 =
          z_ * ((id + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)) * a_end);
      const Eigen::Matrix2cd f5 = id + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Eigen::Matrix2cd k7 = z_ * (f5 * a_end);
      const Eigen::Matrix2cd errf =
          hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const Eigen::Matrix2cd w5 = w_ * f5;
      const double wmax = maxabs(w5);
      if (!std::isfinite(wmax)) {
        throw numeric_error("fundamental_solution: transfer matrix overflow");
      }
      const double scale = std::max({maxabs(w_), wmax, 1e-30});
      const double ratio = maxabs(w_ * errf) / (tol_ * scale);
      if (ratio <= 1.0) {
        const Eigen::Matrix2cd fn = unit_det(f5);
        t_ += hs;
        w_ = w_ * fn;
        det_ *= det2(fn);
        amat_ = a_end;
      }
      const double grow = 0.9 * std::pow(std::max(ratio, 1e-10), -0.2);
      hstep_ = hs * std::clamp(grow, 0.2, 5.0);
    }
  }

  const Hamiltonian* h_;
  complex z_;
  double tol_;
  double t_ = 0.0;
  Eigen::Matrix2cd w_;
  Eigen::Matrix2cd amat_;
  complex det_{1.0, 0.0};
  bool have_amat_ = false;
  double hstep_ = 0.0;
};

std::vector<double> checkpoint_schedule(const Hamiltonian& h, double t_max) {
  std::vector<double> ts;
  const double length = h.length();
  if (std::isfinite(length)) {
    for (int k = 1; k <= 52; ++k) {
      const double t = length * (1.0 - std::pow(2.0, -k));
      if (t > t_max) break;
      ts.push_back(t);
    }
  } else {
    for (double t = 1e-3; t < t_max; t *= 2.0) ts.push_back(t);
    ts.push_back(t_max);
  }
  return ts;
}

}  // namespace

Eigen::Matrix2cd fundamental_solution(const Hamiltonian& h, double t, complex z, double tol) {
  if (t < 0.0) throw domain_error("fundamental_solution: t must be nonnegative");
  if (t > h.length()) throw domain_error("fundamental_solution: t beyond domain");
  if (!(tol > 0.0)) throw domain_error("fundamental_solution: tolerance must be positive");
  if (t == 0.0) return Eigen::Matrix2cd::Identity();
  Propagator prop(h, z, tol);
  prop.advance_to(t);
  return prop.matrix();
}

WeylDisc weyl_disc(const Eigen::Matrix2cd& w) {
  const double scale = maxabs(w);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw domain_error("weyl_disc: entries must be finite and not all zero");
  }
  const double s = pow2_at_least(scale);
  const Eigen::Matrix2cd v = w / s;  // exact: s is a power of two
  return image_disc(v, std::abs(det2(v)));
}

WeylResult weyl_coefficient(const Hamiltonian& h, complex z, double disc_tol, double t_max,
                            double ode_tol) {
  if (!(z.imag() > 0.0)) throw domain_error("weyl_coefficient: z must be in the upper half-plane");
  if (!(disc_tol > 0.0)) throw domain_error("weyl_coefficient: disc_tol must be positive");
  if (!(t_max > 0.0)) throw domain_error("weyl_coefficient: t_max must be positive");
  if (!(ode_tol > 0.0)) throw domain_error("weyl_coefficient: ode_tol must be positive");

  const std::vector<double> ts = checkpoint_schedule(h, t_max);
  Propagator prop(h, z, ode_tol);
  WeylResult res;
  for (double tk : ts) {
    if (tk <= prop.t()) continue;
    prop.advance_to(tk);
    const Eigen::Matrix2cd& w = prop.matrix();
    const double s = pow2_at_least(maxabs(w));
    const complex dw = prop.tracked_det();
    const WeylDisc disc = image_disc(w / s, (std::abs(dw) / s) / s);
    res.radius_trace.emplace_back(tk, disc.radius);
    res.max_det_deviation = std::max(res.max_det_deviation, std::abs(dw - complex(1.0, 0.0)));
    res.t_reached = tk;
    res.value = disc.center;
    res.radius = disc.radius;
    if (disc.radius <= disc_tol) {
      res.status = WeylStatus::converged;
      return res;
    }
  }
  if (!std::isfinite(res.radius)) {
    const PrimitiveValue m = primitive(h, res.t_reached);
    res.status = m.m2 <= 1e-12 * m.trace() ? WeylStatus::at_infinity : WeylStatus::indeterminate;
  } else {
    res.status = WeylStatus::nonconverged;
  }
  return res;
}

}  // namespace cansys
