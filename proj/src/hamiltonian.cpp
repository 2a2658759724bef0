#include "cansys/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cansys/errors.hpp"

namespace cansys {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void power_fail(const std::string& msg) {
  throw domain_error("power data: " + msg);
}

// Adaptive Simpson refinement with the usual Richardson correction.
double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double fa,
                        double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = g(lm);
  const double frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

// Integral of a scalar entry over (0, t). The slice below t0 = t * 1e-8 is
// handled by a local power-law fit (exact for power data), the rest by
// adaptive Simpson in log coordinates so that decades near the origin get
// equal resolution.
double integrate_entry(const std::function<double(double)>& f, double t) {
  const double t0 = t * 1e-8;
  double head = 0.0;
  const double f0 = f(t0);
  const double fh = f(0.5 * t0);
  if (f0 != 0.0 && fh != 0.0 && f0 / fh > 0.0) {
    const double p = std::log(f0 / fh) / std::log(2.0);
    if (p <= -1.0 + 1e-6) {
      throw numeric_error("primitive: entry is not integrable at the origin");
    }
    head = f0 * t0 / (p + 1.0);
  }
  const auto g = [&f](double u) {
    const double s = std::exp(u);
    return f(s) * s;
  };
  const double a = std::log(t0);
  const double b = std::log(t);
  // Coarse composite pass to calibrate the absolute tolerance.
  const int n_coarse = 64;
  const double hstep = (b - a) / n_coarse;
  double acc = g(a) + g(b);
  for (int i = 1; i < n_coarse; ++i) acc += g(a + i * hstep) * (i % 2 ? 4.0 : 2.0);
  const double coarse = acc * hstep / 3.0;
  const double eps = std::max({std::abs(coarse), std::abs(head), 1e-280}) * 1e-11;
  const double fa = g(a);
  const double fb = g(b);
  const double fm = g(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return head + adaptive_simpson(g, a, b, fa, fm, fb, whole, eps, 45);
}

double d_entry(double t, double kappa, double rho) {
  return kappa == 0.0 ? 0.0 : kappa * std::pow(t, rho - 1.0);
}

void check_sampled_point(const Eigen::Matrix2d& m, double t) {
  const std::string at = " at t = " + std::to_string(t);
  if (!m.allFinite()) throw domain_error("sampled Hamiltonian: non-finite entries" + at);
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-9 * scale) {
    throw domain_error("sampled Hamiltonian: matrix is not symmetric" + at);
  }
  if (m(0, 0) < -1e-12 || m(1, 1) < -1e-12) {
    throw domain_error("sampled Hamiltonian: negative diagonal entry" + at);
  }
  if (m.determinant() < -1e-9 * scale * scale) {
    throw domain_error("sampled Hamiltonian: matrix is not positive semidefinite" + at);
  }
  if (m.trace() <= 0.0) throw domain_error("sampled Hamiltonian: trace must be positive" + at);
}

}  // namespace

double power_kappa(const PowerData& d) {
  return std::sqrt(std::max(0.0, d.kappa1 * d.kappa2 - d.kappa3 * d.kappa3));
}

bool power_kappa_degenerate(const PowerData& d) {
  return d.kappa1 * d.kappa2 - d.kappa3 * d.kappa3 <= 1e-14 * d.kappa1 * d.kappa2;
}

double power_rho3_effective(const PowerData& d) { return 0.5 * (d.rho1 + d.rho2); }

void validate_power(const PowerData& d) {
  const double vals[6] = {d.rho1, d.rho2, d.rho3, d.kappa1, d.kappa2, d.kappa3};
  for (double v : vals) {
    if (!std::isfinite(v)) power_fail("all entries must be finite");
  }
  if (d.kappa1 < 0.0 || d.kappa2 < 0.0) power_fail("kappa1 and kappa2 must be nonnegative");
  const bool has1 = d.kappa1 > 0.0;
  const bool has2 = d.kappa2 > 0.0;
  if (!has1 && !has2) power_fail("at least one diagonal channel must be active");
  if (has1 && !(d.rho1 > 0.0)) power_fail("rho1 must be positive");
  if (has2 && !(d.rho2 > 0.0)) power_fail("rho2 must be positive");
  if (!has1 || !has2) {
    if (d.kappa3 != 0.0) power_fail("off-diagonal channel requires both diagonal channels");
    return;  // single-channel boundary class
  }
  if (d.kappa3 * d.kappa3 > d.kappa1 * d.kappa2 * (1.0 + 1e-12)) {
    power_fail("kappa3^2 must not exceed kappa1 kappa2");
  }
  if (d.kappa3 != 0.0) {
    const double mid = power_rho3_effective(d);
    if (std::abs(d.rho3 - mid) > 1e-12 * mid) {
      power_fail("rho3 must equal (rho1 + rho2)/2 when kappa3 != 0");
    }
  }
}

bool power_is_boundary(const PowerData& d) {
  return d.kappa3 == 0.0 && ((d.kappa1 > 0.0) != (d.kappa2 > 0.0));
}

Hamiltonian Hamiltonian::power(const PowerData& data) {
  validate_power(data);
  Hamiltonian h;
  h.kind_ = Kind::power;
  h.length_ = kInf;
  h.power_ = data;
  return h;
}

Hamiltonian Hamiltonian::piecewise(std::vector<Segment> segments) {
  if (segments.empty()) throw domain_error("piecewise Hamiltonian: needs at least one segment");
  for (std::size_t j = 0; j < segments.size(); ++j) {
    const Segment& s = segments[j];
    if (!(s.len > 0.0)) throw domain_error("piecewise Hamiltonian: segment lengths must be positive");
    if (std::isinf(s.len) && j + 1 < segments.size()) {
      throw domain_error("piecewise Hamiltonian: only the final segment may be infinite");
    }
    if (!s.h.allFinite()) throw domain_error("piecewise Hamiltonian: non-finite entries");
    const double scale = 1.0 + s.h.cwiseAbs().maxCoeff();
    if (std::abs(s.h(0, 1) - s.h(1, 0)) > 1e-12 * scale) {
      throw domain_error("piecewise Hamiltonian: segment matrix is not symmetric");
    }
    if (s.h(0, 0) < 0.0 || s.h(1, 1) < 0.0 || s.h.determinant() < -1e-12 * scale * scale) {
      throw domain_error("piecewise Hamiltonian: segment matrix is not positive semidefinite");
    }
    if (!(s.h.trace() > 0.0)) {
      throw domain_error("piecewise Hamiltonian: segment trace must be positive");
    }
  }
  if (!std::isinf(segments.back().len)) {
    throw domain_error(
        "piecewise Hamiltonian: final segment must be infinite (trace integral has to diverge)");
  }
  Hamiltonian h;
  h.kind_ = Kind::piecewise;
  h.segments_ = std::move(segments);
  h.cum_len_.reserve(h.segments_.size());
  double cum = 0.0;
  for (const Segment& s : h.segments_) {
    cum += s.len;
    h.cum_len_.push_back(cum);
  }
  h.length_ = h.cum_len_.back();
  return h;
}

Hamiltonian Hamiltonian::sampled(std::function<Eigen::Matrix2d(double)> eval, double length,
                                 bool trace_integral_diverges,
                                 std::optional<std::function<PrimitiveValue(double)>> primitive) {
  if (!eval) throw domain_error("sampled Hamiltonian: evaluator must be callable");
  if (!(length > 0.0)) throw domain_error("sampled Hamiltonian: length must be positive");
  if (!trace_integral_diverges) {
    throw domain_error("sampled Hamiltonian: trace integral must be declared divergent");
  }
  const bool finite = std::isfinite(length);
  const double probes[4] = {finite ? length * 1e-6 : 1e-6, finite ? length * 1e-3 : 1e-3,
                            finite ? length * 0.1 : 0.1, finite ? length * 0.9 : 1.0};
  for (double t : probes) check_sampled_point(eval(t), t);
  Hamiltonian h;
  h.kind_ = Kind::sampled;
  h.length_ = length;
  h.eval_ = std::move(eval);
  if (primitive) h.prim_override_ = std::move(*primitive);
  return h;
}

const PowerData& Hamiltonian::power_data() const {
  if (kind_ != Kind::power) throw domain_error("power_data: not a power Hamiltonian");
  return power_;
}

const std::vector<Hamiltonian::Segment>& Hamiltonian::segments() const {
  if (kind_ != Kind::piecewise) throw domain_error("segments: not a piecewise Hamiltonian");
  return segments_;
}

Eigen::Matrix2d Hamiltonian::operator()(double t) const {
  if (!(t > 0.0)) throw domain_error("Hamiltonian: evaluation point must be positive");
  switch (kind_) {
    case Kind::power: {
      Eigen::Matrix2d m;
      const double h1 = d_entry(t, power_.kappa1, power_.rho1);
      const double h2 = d_entry(t, power_.kappa2, power_.rho2);
      const double h3 =
          power_.kappa3 == 0.0 ? 0.0 : d_entry(t, power_.kappa3, power_rho3_effective(power_));
      m << h1, h3, h3, h2;
      return m;
    }
    case Kind::piecewise: {
      if (t > length_) throw domain_error("Hamiltonian: evaluation point beyond domain");
      const auto it = std::upper_bound(cum_len_.begin(), cum_len_.end(), t);
      const std::size_t j = std::min<std::size_t>(it - cum_len_.begin(), segments_.size() - 1);
      return segments_[j].h;
    }
    case Kind::sampled:
      if (t > length_) throw domain_error("Hamiltonian: evaluation point beyond domain");
      return eval_(t);
  }
  throw domain_error("Hamiltonian: invalid kind");
}

PrimitiveValue primitive(const Hamiltonian& h, double t) {
  if (t < 0.0) throw domain_error("primitive: t must be nonnegative");
  if (t == 0.0) return {};
  if (t > h.length_) throw domain_error("primitive: t beyond domain");
  if (h.prim_override_) return h.prim_override_(t);
  switch (h.kind_) {
    case Hamiltonian::Kind::power: {
      const PowerData& d = h.power_;
      PrimitiveValue m;
      m.m1 = d.kappa1 == 0.0 ? 0.0 : d.kappa1 / d.rho1 * std::pow(t, d.rho1);
      m.m2 = d.kappa2 == 0.0 ? 0.0 : d.kappa2 / d.rho2 * std::pow(t, d.rho2);
      const double r3 = power_rho3_effective(d);
      m.m3 = d.kappa3 == 0.0 ? 0.0 : d.kappa3 / r3 * std::pow(t, r3);
      return m;
    }
    case Hamiltonian::Kind::piecewise: {
      PrimitiveValue m;
      double done = 0.0;
      for (const Hamiltonian::Segment& s : h.segments_) {
        const double take = std::min(s.len, t - done);
        if (take <= 0.0) break;
        m.m1 += s.h(0, 0) * take;
        m.m2 += s.h(1, 1) * take;
        m.m3 += s.h(0, 1) * take;
        done += take;
      }
      return m;
    }
    case Hamiltonian::Kind::sampled: {
      PrimitiveValue m;
      m.m1 = integrate_entry([&h](double s) { return h.eval_(s)(0, 0); }, t);
      m.m2 = integrate_entry([&h](double s) { return h.eval_(s)(1, 1); }, t);
      m.m3 = integrate_entry([&h](double s) { return h.eval_(s)(0, 1); }, t);
      return m;
    }
  }
  throw domain_error("primitive: invalid kind");
}

double primitive_trace(const Hamiltonian& h, double t) {
  if (t < 0.0) throw domain_error("primitive_trace: t must be nonnegative");
  if (t == 0.0) return 0.0;
  if (t > h.length_) throw domain_error("primitive_trace: t beyond domain");
  if (h.prim_override_) return h.prim_override_(t).trace();
  if (h.kind_ == Hamiltonian::Kind::sampled) {
    return integrate_entry([&h](double s) { return h.eval_(s).trace(); }, t);
  }
  return primitive(h, t).trace();
}

double trace_primitive_inverse(const Hamiltonian& h, double x) {
  if (x < 0.0) throw domain_error("trace_primitive_inverse: x must be nonnegative");
  if (x == 0.0) return 0.0;
  const double length = h.length();
  const bool finite = std::isfinite(length);
  // Left bracket: shrink until the trace primitive falls below x.
  double lo = finite ? 0.5 * length : 1.0;
  int guard = 0;
  while (primitive_trace(h, lo) >= x) {
    lo *= 0.25;
    if (++guard > 600 || lo < 1e-300) return lo;
  }
  // Right bracket: grow toward the right endpoint (or infinity).
  double hi = lo;
  guard = 0;
  if (finite) {
    double gap = length - lo;
    while (primitive_trace(h, hi) < x) {
      gap *= 0.5;
      hi = length - gap;
      if (++guard > 200) {
        throw numeric_error("trace_primitive_inverse: trace integral fails to diverge");
      }
    }
  } else {
    while (primitive_trace(h, hi) < x) {
      hi *= 2.0;
      if (++guard > 2000 || hi > 1e300) {
        throw numeric_error("trace_primitive_inverse: trace integral fails to diverge");
      }
    }
  }
  // Bisection in log t.
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    (primitive_trace(h, mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Hamiltonian trace_normalize(const Hamiltonian& h) {
  if (h.kind() == Hamiltonian::Kind::piecewise) {
    std::vector<Hamiltonian::Segment> segs = h.segments();
    for (Hamiltonian::Segment& s : segs) {
      const double tr = s.h.trace();
      s.len *= tr;
      s.h /= tr;
    }
    return Hamiltonian::piecewise(std::move(segs));
  }
  if (h.kind() == Hamiltonian::Kind::power && !h.has_primitive_override()) {
    const PowerData& d = h.power_data();
    const bool constant_direction =
        power_is_boundary(d) ||
        std::abs(d.rho1 - d.rho2) <= 1e-12 * (d.rho1 + d.rho2);
    if (constant_direction) {
      Eigen::Matrix2d k;
      k << d.kappa1, d.kappa3, d.kappa3, d.kappa2;
      // Boundary classes may mix different rho's, but the inactive channel is
      // identically zero, so the direction is constant either way.
      Hamiltonian::Segment s;
      s.len = kInf;
      s.h = k / k.trace();
      return Hamiltonian::piecewise({s});
    }
  }
  const Hamiltonian base = h;
  auto eval = [base](double t) {
    const double x = trace_primitive_inverse(base, t);
    const Eigen::Matrix2d m = base(x);
    return Eigen::Matrix2d(m / m.trace());
  };
  auto prim = [base](double t) { return primitive(base, trace_primitive_inverse(base, t)); };
  return Hamiltonian::sampled(eval, kInf, true, prim);
}

IndivisibleReport detect_indivisible_start(const Hamiltonian& h,
                                           const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw domain_error("detect_indivisible_start: empty grid");
  double prev = 0.0;
  for (double e : eps_grid) {
    if (!(e > prev)) throw domain_error("detect_indivisible_start: grid must be positive ascending");
    prev = e;
  }
  const double tol = 1e-12;
  IndivisibleReport best;
  for (double e : eps_grid) {
    const PrimitiveValue m = primitive(h, e);
    if (m.m2 <= tol * m.trace()) best = {IndivisibleStart::type0, e};
    if (m.m1 <= tol * m.trace()) best = {IndivisibleStart::typeHalfPi, e};
  }
  return best;
}

double convergence_distance(const Hamiltonian& a, const Hamiltonian& b, double T, int grid_size) {
  if (!(T > 0.0)) throw domain_error("convergence_distance: T must be positive");
  if (grid_size < 1) throw domain_error("convergence_distance: grid_size must be at least 1");
  double dist = 0.0;
  for (int k = 1; k <= grid_size; ++k) {
    const double x = T * k / grid_size;
    const PrimitiveValue ma = primitive(a, trace_primitive_inverse(a, x));
    const PrimitiveValue mb = primitive(b, trace_primitive_inverse(b, x));
    dist = std::max({dist, std::abs(ma.m1 - mb.m1), std::abs(ma.m2 - mb.m2),
                     std::abs(ma.m3 - mb.m3)});
  }
  return dist;
}

}  // namespace cansys
