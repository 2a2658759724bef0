#include "cansys/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cansys/errors.hpp"
#include "cansys/specfun.hpp"

namespace cansys {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_alpha_delta(double alpha, double delta) {
  if (!(std::abs(alpha) <= 1.0 + 1e-12)) {
    throw domain_error("alpha must lie in [-1, 1]");
  }
  const double bound = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
  if (!(std::abs(delta) <= bound + 1e-12)) {
    throw domain_error("delta must lie in [-sqrt(1-alpha^2), sqrt(1-alpha^2)]");
  }
}

// Product of the two diagonal primitive entries, kept multiplication-free of
// logs so that underflowed factors simply count as "below target".
double diag_primitive_product(const Hamiltonian& h, double t) {
  const PrimitiveValue m = primitive(h, t);
  return m.m1 * m.m2;
}

}  // namespace

double RescalingDeviation::max_dev() const { return std::max({dev1, dev2, dev3}); }

double alpha_from_indices(double rho1, double rho2) {
  const bool inf1 = std::isinf(rho1);
  const bool inf2 = std::isinf(rho2);
  if (inf1 && inf2) throw domain_error("alpha_from_indices: at most one index may be infinite");
  if (inf2) return 1.0;
  if (inf1) return -1.0;
  if (!(rho1 > 0.0) || !(rho2 > 0.0)) {
    throw domain_error("alpha_from_indices: indices must be positive");
  }
  return (rho2 - rho1) / (rho2 + rho1);
}

complex omega_from_alpha_delta(double alpha, double delta) {
  check_alpha_delta(alpha, delta);
  if (std::abs(alpha) >= 1.0 - 1e-12) return complex(1.0, 0.0);
  if (std::abs(alpha) <= 1e-12) {
    return complex(std::sqrt(std::max(0.0, 1.0 - delta * delta)), -delta);
  }
  const double one_minus_a2 = 1.0 - alpha * alpha;
  const double s2 = one_minus_a2 - delta * delta;
  if (s2 <= 1e-14 * one_minus_a2) {
    // Degenerate boundary |delta| = sqrt(1 - alpha^2).
    return std::pow(complex(0.0, 1.0) * alpha * delta, 1.0 + alpha) *
           (std::tgamma(-alpha) / std::tgamma(2.0 + alpha));
  }
  const double s = std::sqrt(s2);
  const complex ratio(0.0, delta / s);
  const complex lg = log_gamma(complex(-alpha, 0.0)) - log_gamma(complex(2.0 + alpha, 0.0)) +
                     log_gamma(1.0 + 0.5 * alpha * (1.0 + ratio)) -
                     log_gamma(-0.5 * alpha * (1.0 - ratio));
  return std::pow(2.0 * s, 1.0 + alpha) * std::exp(lg);
}

double arg_omega_from_alpha_delta(double alpha, double delta) {
  check_alpha_delta(alpha, delta);
  if (std::abs(alpha) >= 1.0 - 1e-12) return 0.0;
  if (std::abs(alpha) <= 1e-12) return -std::asin(std::clamp(delta, -1.0, 1.0));
  const double one_minus_a2 = 1.0 - alpha * alpha;
  const double s2 = one_minus_a2 - delta * delta;
  const double cone = 0.5 * kPi * (1.0 - std::abs(alpha));
  if (s2 <= 1e-14 * one_minus_a2) return -sgn(delta) * cone;
  return -std::atan(std::tan(cone) *
                    std::tanh(0.5 * kPi * std::abs(alpha) * delta / std::sqrt(s2)));
}

double delta_from_arg_omega(double alpha, double theta) {
  if (!(std::abs(alpha) <= 1.0 + 1e-12)) throw domain_error("alpha must lie in [-1, 1]");
  const double cone = 0.5 * kPi * (1.0 - std::min(1.0, std::abs(alpha)));
  if (std::abs(theta) > cone + 1e-12) {
    throw domain_error("delta_from_arg_omega: theta outside the admissible sector");
  }
  if (std::abs(alpha) >= 1.0 - 1e-12) return 0.0;
  if (std::abs(alpha) <= 1e-12) return -std::sin(theta);
  const double bound = std::sqrt(1.0 - alpha * alpha);
  const double ratio = std::tan(theta) / std::tan(cone);
  if (std::abs(ratio) >= 1.0 - 1e-15) return -sgn(theta) * bound;
  const double c = 2.0 / (kPi * std::abs(alpha)) * std::atanh(ratio);
  return -c * bound / std::sqrt(1.0 + c * c);
}

double breve_t(const Hamiltonian& h, double r) {
  if (!(r > 0.0)) throw domain_error("breve_t: r must be positive");
  const double target = 1.0 / (r * r);
  if (h.kind() == Hamiltonian::Kind::power && !h.has_primitive_override()) {
    const PowerData& d = h.power_data();
    if (!(d.kappa1 > 0.0) || !(d.kappa2 > 0.0)) {
      throw domain_error("breve_t: diagonal primitive product vanishes identically");
    }
    const double c1 = d.kappa1 / d.rho1;
    const double c2 = d.kappa2 / d.rho2;
    return std::pow(c1 * c2 * r * r, -1.0 / (d.rho1 + d.rho2));
  }
  const double length = h.length();
  const bool finite = std::isfinite(length);
  double lo = finite ? 0.5 * length : 1.0;
  int guard = 0;
  while (diag_primitive_product(h, lo) >= target) {
    lo *= 0.25;
    if (++guard > 600 || lo < 1e-300) {
      throw domain_error("breve_t: no crossing above underflow scale");
    }
  }
  double hi = lo;
  guard = 0;
  if (finite) {
    double gap = length - lo;
    while (diag_primitive_product(h, hi) < target) {
      gap *= 0.5;
      hi = length - gap;
      if (++guard > 200) throw numeric_error("breve_t: product fails to reach the target");
    }
  } else {
    while (diag_primitive_product(h, hi) < target) {
      hi *= 2.0;
      if (++guard > 2000 || hi > 1e300) {
        throw numeric_error("breve_t: product fails to reach the target");
      }
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    (diag_primitive_product(h, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double a_H(const Hamiltonian& h, double r) {
  const PrimitiveValue m = primitive(h, breve_t(h, r));
  return std::sqrt(m.m1 / m.m2);
}

PowerPrediction predict_power_asymptotics(double c1, double c2, double c3, double rho1,
                                          double rho2) {
  if (!(c1 > 0.0) || !(c2 > 0.0)) {
    throw domain_error("predict_power_asymptotics: c1, c2 must be positive");
  }
  if (!(rho1 > 0.0) || !(rho2 > 0.0) || std::isinf(rho1) || std::isinf(rho2)) {
    throw domain_error("predict_power_asymptotics: indices must be positive and finite");
  }
  PowerPrediction p;
  p.alpha = alpha_from_indices(rho1, rho2);
  p.delta = c3 / std::sqrt(c1 * c2);
  check_alpha_delta(p.alpha, p.delta);  // rejects inadmissible off-diagonal mass
  p.omega = omega_from_alpha_delta(p.alpha, p.delta);
  p.omega_prime =
      std::pow(c1, 0.5 * (p.alpha + 1.0)) * std::pow(c2, 0.5 * (p.alpha - 1.0)) * p.omega;
  return p;
}

RegVarReport estimate_regvar_index(const std::vector<std::pair<double, double>>& samples) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(samples.size());
  for (const auto& [t, v] : samples) {
    if (!(t > 0.0)) throw domain_error("estimate_regvar_index: sample points must be positive");
    if (v > 0.0) pts.emplace_back(t, v);
  }
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 20) {
    throw insufficient_data("estimate_regvar_index: need at least 20 positive samples");
  }
  const double decades = std::log10(pts.back().first / pts.front().first);
  if (decades < 3.0 - 1e-9) {
    throw insufficient_data("estimate_regvar_index: need at least three decades of scale");
  }

  const std::size_t n = pts.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = std::log(pts[i].first);
    ys[i] = std::log(pts[i].second);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  RegVarReport rep;
  rep.decades = decades;
  rep.index = sxy / sxx;
  rep.scale = std::exp(my - rep.index * mx);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = ys[i] - (my + rep.index * (xs[i] - mx));
    ss += resid * resid;
  }
  rep.fit_residual = std::sqrt(ss / n);

  // Rapid variation: local slopes in the smallest decade all above 50 and
  // growing toward the origin.
  std::vector<double> slopes;
  const double small_edge = pts.front().first * 10.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (pts[i + 1].first > small_edge && slopes.size() >= 4) break;
    if (xs[i + 1] - xs[i] <= 0.0) continue;
    slopes.push_back((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
  }
  bool rapid = slopes.size() >= 3;
  for (std::size_t i = 0; rapid && i < slopes.size(); ++i) {
    if (!(slopes[i] > 50.0)) rapid = false;
    if (i + 1 < slopes.size() && slopes[i] < slopes[i + 1] * (1.0 - 0.01)) rapid = false;
  }
  if (rapid) {
    rep.rapid = true;
    rep.index = kInf;
  }
  return rep;
}

double estimate_delta(const Hamiltonian& h, const std::vector<double>& t_grid) {
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());
  if (ts.empty() || !(ts.front() > 0.0)) {
    throw domain_error("estimate_delta: grid must be positive");
  }
  std::vector<double> small;
  for (double t : ts) {
    if (t < 1e-3) small.push_back(t);
  }
  if (small.size() < 3) {
    throw insufficient_data("estimate_delta: grid too coarse (need three points below 1e-3)");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const PrimitiveValue m = primitive(h, small[i]);
    const double denom = std::sqrt(m.m1 * m.m2);
    double ratio = 0.0;
    if (m.m3 != 0.0 && denom > 0.0) ratio = std::clamp(m.m3 / denom, -1.0, 1.0);
    acc += ratio;
  }
  return acc / 3.0;
}

double karamata_ratio(const std::vector<std::pair<double, double>>& f_samples, double rho) {
  if (!std::isfinite(rho) || !(rho > -1.0)) {
    throw domain_error("karamata_ratio: rho must be finite and greater than -1");
  }
  std::vector<std::pair<double, double>> pts = f_samples;
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 5) throw insufficient_data("karamata_ratio: need at least five samples");
  for (const auto& [t, v] : pts) {
    if (!(t > 0.0) || !(v > 0.0)) {
      throw domain_error("karamata_ratio: samples must be positive");
    }
  }
  const auto segment_exponent = [](const std::pair<double, double>& a,
                                   const std::pair<double, double>& b) {
    const double p = std::log(b.second / a.second) / std::log(b.first / a.first);
    if (p <= -1.0 + 1e-6) {
      throw numeric_error("karamata_ratio: local exponent at or below -1 (not integrable)");
    }
    return p;
  };
  // Accumulate F(t) by exact integration of the local power fit per segment.
  std::vector<double> big_f(pts.size());
  const double p0 = segment_exponent(pts[0], pts[1]);
  big_f[0] = pts[0].second * pts[0].first / (p0 + 1.0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double p = segment_exponent(pts[i], pts[i + 1]);
    const double step = pts[i].second * pts[i].first / (p + 1.0) *
                        (std::pow(pts[i + 1].first / pts[i].first, p + 1.0) - 1.0);
    big_f[i + 1] = big_f[i] + step;
  }
  double dev = 0.0;
  const double small_edge = pts.front().first * 10.0;
  for (std::size_t i = 0; i < pts.size() && pts[i].first <= small_edge; ++i) {
    dev = std::max(dev,
                   std::abs(big_f[i] * (rho + 1.0) / (pts[i].first * pts[i].second) - 1.0));
  }
  return dev;
}

KasaharaScalers kasahara_scalers(const Hamiltonian& h, double r) {
  const double u = breve_t(h, r);
  const PrimitiveValue m = primitive(h, u);
  return {r * std::sqrt(u * m.m2), r * std::sqrt(u * m.m1)};
}

Hamiltonian rescale(const Hamiltonian& h, double r, double b1, double b2) {
  if (!(r > 0.0) || !(b1 > 0.0) || !(b2 > 0.0)) {
    throw domain_error("rescale: r, b1, b2 must be positive");
  }
  const double s = b1 * b2 / r;
  if (h.kind() == Hamiltonian::Kind::power && !h.has_primitive_override()) {
    return Hamiltonian::power(rescale_power(h.power_data(), r, b1, b2));
  }
  if (h.kind() == Hamiltonian::Kind::piecewise) {
    std::vector<Hamiltonian::Segment> segs = h.segments();
    for (Hamiltonian::Segment& seg : segs) {
      seg.len /= s;
      Eigen::Matrix2d m = seg.h;
      m(0, 0) *= b1 * b1;
      m(1, 1) *= b2 * b2;
      m(0, 1) *= b1 * b2;
      m(1, 0) *= b1 * b2;
      seg.h = m;
    }
    return Hamiltonian::piecewise(std::move(segs));
  }
  const Hamiltonian base = h;
  auto eval = [base, s, b1, b2](double t) {
    Eigen::Matrix2d m = base(s * t);
    m(0, 0) *= b1 * b1;
    m(1, 1) *= b2 * b2;
    m(0, 1) *= b1 * b2;
    m(1, 0) *= b1 * b2;
    return m;
  };
  auto prim = [base, s, r, b1, b2](double t) {
    const PrimitiveValue m = primitive(base, s * t);
    return PrimitiveValue{r * (b1 / b2) * m.m1, r * (b2 / b1) * m.m2, r * m.m3};
  };
  const double length = std::isfinite(base.length()) ? base.length() / s : kInf;
  return Hamiltonian::sampled(eval, length, true, prim);
}

namespace {

LimitSpec detect_limit_shape(const Hamiltonian& h) {
  const double top = std::isfinite(h.length()) ? 0.9 * h.length() : 1.5;
  const double bottom = top * 1e-3;
  std::vector<std::pair<double, double>> s1, s2;
  for (int i = 0; i < 25; ++i) {
    const double t = bottom * std::pow(top / bottom, i / 24.0);
    const PrimitiveValue m = primitive(h, t);
    s1.emplace_back(t, m.m1);
    s2.emplace_back(t, m.m2);
  }
  const RegVarReport r1 = estimate_regvar_index(s1);
  const RegVarReport r2 = estimate_regvar_index(s2);
  if (r1.rapid && r2.rapid) {
    throw domain_error("rescaling_limit_check: both diagonal primitives are rapidly varying");
  }
  LimitSpec spec;
  if (r2.rapid) {
    spec.shape = LimitShape::rapid_m2;
    spec.rho1 = r1.index;
    return spec;
  }
  if (r1.rapid) {
    spec.shape = LimitShape::rapid_m1;
    spec.rho2 = r2.index;
    return spec;
  }
  spec.shape = LimitShape::regular;
  spec.rho1 = r1.index;
  spec.rho2 = r2.index;
  std::vector<double> dgrid;
  const double dtop = std::min(1e-3, top * 1e-3) * 0.999;
  for (int i = 0; i < 8; ++i) dgrid.push_back(dtop * std::pow(1e-3, 1.0 - i / 7.0));
  spec.delta = estimate_delta(h, dgrid);
  return spec;
}

// Solves ratio1(x) + ratio2(x) = T for the matched unit-trace point of the
// rescaled Hamiltonian (used for the indicator-shaped rapid limits).
double matched_point(const Hamiltonian& h, double u, const PrimitiveValue& mu, double big_t) {
  const auto val = [&](double x) {
    const PrimitiveValue m = primitive(h, u * x);
    return m.m1 / mu.m1 + m.m2 / mu.m2;
  };
  double lo = 1e-8, hi = 1.0;
  int guard = 0;
  while (val(hi) < big_t) {
    hi *= 2.0;
    if (++guard > 200) throw numeric_error("rescaling_limit_check: matched point out of reach");
  }
  guard = 0;
  while (val(lo) > big_t) {
    lo *= 0.5;
    if (++guard > 200) throw numeric_error("rescaling_limit_check: matched point out of reach");
  }
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    (val(mid) < big_t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<RescalingDeviation> rescaling_limit_check(const Hamiltonian& h,
                                                      const std::vector<double>& r_values,
                                                      const std::vector<double>& x_grid,
                                                      std::optional<LimitSpec> target) {
  if (r_values.empty()) throw domain_error("rescaling_limit_check: empty r grid");
  if (x_grid.empty()) throw domain_error("rescaling_limit_check: empty x grid");
  for (double x : x_grid) {
    if (!(x > 0.0)) throw domain_error("rescaling_limit_check: x grid must be positive");
  }
  const LimitSpec spec = target ? *target : detect_limit_shape(h);
  std::vector<RescalingDeviation> out;
  out.reserve(r_values.size());
  for (double r : r_values) {
    if (!(r > 0.0)) throw domain_error("rescaling_limit_check: r values must be positive");
    const double u = breve_t(h, r);
    const PrimitiveValue mu = primitive(h, u);
    const double cross = std::sqrt(mu.m1 * mu.m2);
    RescalingDeviation dev;
    dev.r = r;
    for (double x : x_grid) {
      if (spec.shape == LimitShape::regular) {
        const PrimitiveValue mx = primitive(h, u * x);
        dev.dev1 = std::max(dev.dev1, std::abs(mx.m1 / mu.m1 - std::pow(x, spec.rho1)));
        dev.dev2 = std::max(dev.dev2, std::abs(mx.m2 / mu.m2 - std::pow(x, spec.rho2)));
        dev.dev3 = std::max(dev.dev3, std::abs(mx.m3 / cross -
                                               spec.delta * std::pow(x, 0.5 * (spec.rho1 +
                                                                               spec.rho2))));
      } else {
        // x plays the role of the unit-trace time T of the limit step.
        const double xt = matched_point(h, u, mu, x);
        const PrimitiveValue m = primitive(h, u * xt);
        const double ratio1 = m.m1 / mu.m1;
        const double ratio2 = m.m2 / mu.m2;
        const double lim_low = std::min(x, 1.0);
        const double lim_high = std::max(x - 1.0, 0.0);
        if (spec.shape == LimitShape::rapid_m2) {
          dev.dev1 = std::max(dev.dev1, std::abs(ratio1 - lim_low));
          dev.dev2 = std::max(dev.dev2, std::abs(ratio2 - lim_high));
        } else {
          dev.dev1 = std::max(dev.dev1, std::abs(ratio1 - lim_high));
          dev.dev2 = std::max(dev.dev2, std::abs(ratio2 - lim_low));
        }
        dev.dev3 = std::max(dev.dev3, std::abs(m.m3 / cross));
      }
    }
    out.push_back(dev);
  }
  return out;
}

AsymptoticsVerdict verify_asymptotics(const Hamiltonian& h, const PowerLaw& law,
                                      const std::vector<double>& r_grid,
                                      const std::vector<double>& angles, double threshold,
                                      double disc_tol, double t_max, double ode_tol) {
  if (r_grid.empty()) throw domain_error("verify_asymptotics: empty r grid");
  for (std::size_t i = 1; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > r_grid[i - 1])) {
      throw domain_error("verify_asymptotics: r grid must be strictly increasing");
    }
  }
  if (angles.empty()) throw domain_error("verify_asymptotics: empty angle list");
  if (!(threshold > 0.0)) throw domain_error("verify_asymptotics: threshold must be positive");

  AsymptoticsVerdict verdict;
  verdict.pass = true;
  for (double phi : angles) {
    if (!(std::sin(phi) > 1e-12)) {
      throw domain_error("verify_asymptotics: angles must lie strictly inside (0, pi)");
    }
    double prev_err = kInf;
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
      const double r = r_grid[k];
      const complex z(r * std::cos(phi), r * std::sin(phi));
      const WeylResult wr = weyl_coefficient(h, z, disc_tol, t_max, ode_tol);
      VerifyCell cell;
      cell.r = r;
      cell.phi = phi;
      cell.status = wr.status;
      if (wr.status != WeylStatus::converged) {
        cell.rel_error = kInf;
        verdict.pass = false;
      } else {
        const complex q_law = q_power_eval(law, z);
        cell.rel_error = std::abs(wr.value - q_law) / std::abs(q_law);
        if (cell.rel_error > std::max(1.05 * prev_err, threshold)) verdict.pass = false;
        prev_err = cell.rel_error;
      }
      if (k + 1 == r_grid.size()) {
        verdict.final_max_error = std::max(verdict.final_max_error, cell.rel_error);
        if (!(cell.rel_error <= threshold)) verdict.pass = false;
      }
      verdict.cells.push_back(cell);
    }
  }
  return verdict;
}

}  // namespace cansys
