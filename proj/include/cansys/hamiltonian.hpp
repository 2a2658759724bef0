#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace cansys {

// Coefficients of a power Hamiltonian with entries
//   h1(t) = kappa1 t^(rho1-1),  h2(t) = kappa2 t^(rho2-1),
//   h3(t) = kappa3 t^(rho3-1)
// on (0, infinity), arranged as H = [[h1, h3], [h3, h2]].
struct PowerData {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double rho3 = 1.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
};

// sqrt(kappa1 kappa2 - kappa3^2), clamped below at zero.
double power_kappa(const PowerData& d);

// True when kappa1 kappa2 - kappa3^2 <= 1e-14 kappa1 kappa2, i.e. the
// determinant vanishes to working precision and the degenerate closed-form
// branch applies.
bool power_kappa_degenerate(const PowerData& d);

// Off-diagonal index used by the closed forms. Whenever kappa3 != 0 the data
// must satisfy rho3 = (rho1 + rho2)/2; when kappa3 = 0 the stored rho3 is
// immaterial and the midpoint is used.
double power_rho3_effective(const PowerData& d);

// Throws domain_error unless the data defines an admissible Hamiltonian:
// either a single active diagonal channel (kappa1, rho1 > 0 with
// kappa2 = kappa3 = 0, or symmetrically), or both diagonal channels active
// with kappa3^2 <= kappa1 kappa2 and, if kappa3 != 0, rho3 = (rho1 + rho2)/2.
void validate_power(const PowerData& d);

// True when exactly one diagonal channel is active (the cases with
// identically infinite or identically zero Weyl coefficient).
bool power_is_boundary(const PowerData& d);

// Entrywise primitive M(t) = integral of H over (0, t), stored as the three
// independent entries of the symmetric matrix [[m1, m3], [m3, m2]].
struct PrimitiveValue {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double trace() const { return m1 + m2; }
  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << m1, m3, m3, m2;
    return m;
  }
};

// A 2x2 positive semidefinite matrix function H on (0, L) with locally
// integrable entries, positive trace and divergent trace integral. Three
// representations share one interface: closed-form power data, piecewise
// constant segments, and a sampled evaluator backed by quadrature.
class Hamiltonian {
 public:
  enum class Kind { power, piecewise, sampled };

  struct Segment {
    double len = 0.0;  // may be +infinity for the final segment
    Eigen::Matrix2d h;
  };

  static Hamiltonian power(const PowerData& data);

  // Piecewise constant. Every segment needs a symmetric PSD matrix with
  // positive trace; the final segment must have infinite length so the trace
  // integral diverges.
  static Hamiltonian piecewise(std::vector<Segment> segments);

  // Arbitrary evaluator on (0, length). The caller asserts divergence of the
  // trace integral; entries are spot-checked for symmetry and positivity at
  // construction. An optional closed-form primitive bypasses quadrature.
  static Hamiltonian sampled(std::function<Eigen::Matrix2d(double)> eval, double length,
                             bool trace_integral_diverges,
                             std::optional<std::function<PrimitiveValue(double)>> primitive = {});

  Kind kind() const { return kind_; }
  double length() const { return length_; }
  const PowerData& power_data() const;
  const std::vector<Segment>& segments() const;
  bool has_primitive_override() const { return static_cast<bool>(prim_override_); }

  // Pointwise value H(t) for t in (0, L] (piecewise: [0, L]).
  Eigen::Matrix2d operator()(double t) const;

  friend PrimitiveValue primitive(const Hamiltonian& h, double t);
  friend double primitive_trace(const Hamiltonian& h, double t);

 private:
  Hamiltonian() = default;

  Kind kind_ = Kind::power;
  double length_ = 0.0;
  PowerData power_{};
  std::vector<Segment> segments_{};
  std::vector<double> cum_len_{};  // cumulative segment ends
  std::function<Eigen::Matrix2d(double)> eval_{};
  std::function<PrimitiveValue(double)> prim_override_{};
};

// M(t), exact for power and piecewise data, adaptive quadrature (relative
// tolerance 1e-10) for sampled data. Throws domain_error for t outside
// [0, L] and numeric_error when an entry is not integrable at the origin.
PrimitiveValue primitive(const Hamiltonian& h, double t);

// trace M(t) = m1(t) + m2(t), cheaper than primitive() for sampled data.
double primitive_trace(const Hamiltonian& h, double t);

// Inverse of the strictly increasing map t -> trace M(t); relative
// tolerance 1e-12.
double trace_primitive_inverse(const Hamiltonian& h, double x);

// Reparametrized Hamiltonian with identically unit trace: the image of h
// under the change of scale s = trace M(t). Piecewise data stays piecewise,
// constant-direction power data collapses to a constant matrix, everything
// else becomes a sampled Hamiltonian with an exact primitive override.
Hamiltonian trace_normalize(const Hamiltonian& h);

enum class IndivisibleStart { none, type0, typeHalfPi };

struct IndivisibleReport {
  IndivisibleStart kind = IndivisibleStart::none;
  double epsilon = 0.0;  // largest grid point witnessing the degenerate start
};

// Detects a leading interval on which H has rank one in a coordinate
// direction: m2(eps) <= tol * trace M(eps) flags type0 (h2 vanishes near 0),
// the mirror test flags typeHalfPi. Grid must be positive and ascending.
IndivisibleReport detect_indivisible_start(const Hamiltonian& h,
                                           const std::vector<double>& eps_grid);

// Discrepancy between two Hamiltonians in the scale-invariant sense: the
// maximum over a grid of x in (0, T] of the max-abs difference of primitives
// evaluated at matched trace-scale points t_i = trace_primitive_inverse(x).
double convergence_distance(const Hamiltonian& a, const Hamiltonian& b, double T,
                            int grid_size);

}  // namespace cansys
