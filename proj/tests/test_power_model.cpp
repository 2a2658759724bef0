#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "cansys/errors.hpp"
#include "cansys/hamiltonian.hpp"
#include "cansys/power_model.hpp"

using cansys::complex;
using cansys::PowerData;

namespace {

double rel_err(complex got, complex want) {
  return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("closed-form coefficient matches high-precision references") {
  // kappa3 = 0 reduces to a ratio of real Gamma values.
  CHECK(rel_err(cansys::closed_form_q({1, 3, 2, 1, 1, 0}).omega,
                {1.4793375595943194462, 0.0}) < 1e-13);
  CHECK(rel_err(cansys::closed_form_q({1, 2, 1.5, 1, 1, 0.5}).omega,
                {1.1701227202085966884, -0.59466956191605853954}) < 1e-13);
  CHECK(rel_err(cansys::closed_form_q({2, 1, 1.5, 1, 2, -0.7}).omega,
                {0.42853325874098476019, 0.21504792935532960023}) < 1e-13);
  // Degenerate determinant branch.
  CHECK(rel_err(cansys::closed_form_q({1, 2, 1.5, 1, 1, 1}).omega,
                {0.45924823600396058988, -0.79544127804524228845}) < 1e-13);
  CHECK(rel_err(cansys::closed_form_q({3, 1, 2, 2, 1, -std::sqrt(2.0)}).omega,
                {0.84089641525371454303, 0.84089641525371454303}) < 1e-13);
  // Exponents propagate into alpha.
  CHECK(cansys::closed_form_q({1, 3, 2, 1, 1, 0}).alpha == doctest::Approx(0.5));
  CHECK(cansys::closed_form_q({2, 1, 1.5, 1, 2, -0.7}).alpha == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("power law evaluation uses the principal branch") {
  const cansys::PowerLaw up{1.0, complex(0.5, 0.0)};
  const complex z(0.7, 1.3);
  CHECK(rel_err(cansys::q_power_eval(up, z), 0.5 * z) < 1e-15);
  const cansys::PowerLaw down{-1.0, complex(3.0, 0.0)};
  CHECK(rel_err(cansys::q_power_eval(down, z), -3.0 / z) < 1e-15);
  const cansys::PowerLaw half{0.5, complex(1.0, 0.0)};
  CHECK(rel_err(cansys::q_power_eval(half, complex(0, 2)), complex(0, std::sqrt(2.0))) < 1e-15);
  CHECK_THROWS_AS(cansys::validate_power_law({1.5, complex(1, 0)}), cansys::domain_error);
  // omega outside the admissible sector for alpha = 0.5.
  CHECK_THROWS_AS(cansys::validate_power_law({0.5, complex(0, 1)}), cansys::domain_error);
}

TEST_CASE("boundary verdicts for single-channel data") {
  const cansys::BoundaryVerdict up = cansys::boundary_case_q({1, 1, 1, 2, 0, 0});
  CHECK(up.kind == cansys::BoundaryKind::q_infinite);
  const cansys::BoundaryVerdict down = cansys::boundary_case_q({1, 0.5, 1, 0, 1, 0});
  CHECK(down.kind == cansys::BoundaryKind::q_zero);
  CHECK_THROWS_AS(cansys::boundary_case_q(PowerData{1, 2, 1.5, 1, 1, 0}), cansys::domain_error);
}

TEST_CASE("step Hamiltonians carry exact laws") {
  const cansys::Hamiltonian up = cansys::up_step(0.5);
  const auto& segs = up.segments();
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].len == doctest::Approx(0.5));
  CHECK(segs[0].h(0, 0) == 1.0);
  CHECK(segs[0].h(1, 1) == 0.0);
  CHECK(std::isinf(segs[1].len));
  CHECK(segs[1].h(1, 1) == 1.0);

  const cansys::BoundaryVerdict vu = cansys::boundary_case_q(up);
  CHECK(vu.kind == cansys::BoundaryKind::step_law);
  CHECK(vu.law.alpha == doctest::Approx(1.0));
  CHECK(vu.law.omega.real() == doctest::Approx(0.5));

  const cansys::BoundaryVerdict vd = cansys::boundary_case_q(cansys::down_step(3.0));
  CHECK(vd.law.alpha == doctest::Approx(-1.0));
  CHECK(vd.law.omega.real() == doctest::Approx(3.0));
  // q = -omega/z at z = i is omega i; q = omega z at z = i is 0.5 i.
  CHECK(rel_err(cansys::q_power_eval(vd.law, complex(0, 1)), complex(0, 3)) < 1e-15);
  CHECK(rel_err(cansys::q_power_eval(vu.law, complex(0, 1)), complex(0, 0.5)) < 1e-15);
}

TEST_CASE("argument shortcut agrees with the closed form") {
  for (double r1 : {1.0, 1.5, 2.0}) {
    for (double r2 : {1.0, 2.0, 3.0}) {
      for (double k3 : {-1.0, -0.9, -0.3, 0.0, 0.4, 0.95, 1.0}) {
        PowerData d;
        d.rho1 = r1;
        d.rho2 = r2;
        d.rho3 = 0.5 * (r1 + r2);
        d.kappa1 = 1.0;
        d.kappa2 = 1.0;
        d.kappa3 = k3;
        const double direct = cansys::arg_omega(d);
        const double via_omega = std::arg(cansys::closed_form_q(d).omega);
        CHECK(std::abs(direct - via_omega) < 1e-12);
      }
    }
  }
}

TEST_CASE("coefficient is conjugated under kappa3 sign flip") {
  PowerData d{1.0, 2.5, 1.75, 1.3, 0.8, 0.6};
  PowerData m = d;
  m.kappa3 = -d.kappa3;
  const complex w = cansys::closed_form_q(d).omega;
  const complex wm = cansys::closed_form_q(m).omega;
  CHECK(rel_err(wm, std::conj(w)) < 1e-13);
}

TEST_CASE("argument decreases strictly in kappa3") {
  PowerData d{1.0, 2.0, 1.5, 1.0, 1.0, 0.0};
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 20; ++i) {
    d.kappa3 = -0.99 + 1.98 * i / 20.0;
    const double th = cansys::arg_omega(d);
    CHECK(th < prev);
    prev = th;
  }
  // Endpoint values are attained exactly at the degenerate boundary.
  d.kappa3 = 1.0;
  const double alpha = 1.0 / 3.0;
  CHECK(cansys::arg_omega(d) == doctest::Approx(-M_PI_2 * (1.0 - alpha)).epsilon(1e-12));
  d.kappa3 = -1.0;
  CHECK(cansys::arg_omega(d) == doctest::Approx(M_PI_2 * (1.0 - alpha)).epsilon(1e-12));
}

TEST_CASE("inverse problem recovers data from a target coefficient") {
  // Equal exponents, real target: no off-diagonal channel.
  const cansys::InverseResult flat = cansys::inverse_problem(0.0, complex(1, 0), 1, 1, 1);
  CHECK(flat.data.kappa3 == 0.0);
  CHECK(flat.gamma == doctest::Approx(1.0).epsilon(1e-12));

  // Equal exponents, argument -pi/4: kappa3 = 1/sqrt(2).
  const complex target = std::polar(1.0, -M_PI_4);
  const cansys::InverseResult tilt = cansys::inverse_problem(0.0, target, 1, 1, 1);
  CHECK(tilt.data.kappa3 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));

  // Roundtrip through the closed form, including the modulus factor.
  const PowerData d{1, 2, 1.5, 2.0, 1.5, 0.8};
  const cansys::PowerLaw law = cansys::closed_form_q(d);
  const complex target2 = 2.5 * law.omega;
  const cansys::InverseResult res =
      cansys::inverse_problem(law.alpha, target2, d.kappa1, d.kappa2, d.rho1);
  CHECK(res.data.rho2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(res.data.kappa3 == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(res.gamma == doctest::Approx(2.5).epsilon(1e-9));
  const PowerData scaled = cansys::rescale_power(res.data, 1.0, res.gamma, 1.0);
  CHECK(rel_err(cansys::closed_form_q(scaled).omega, target2) < 1e-9);

  // Targets outside the admissible cone are rejected.
  CHECK_THROWS_AS(cansys::inverse_problem(0.5, complex(0, -1), 1, 1, 1), cansys::domain_error);
}

TEST_CASE("transfer matrix entries match the reference values") {
  const auto [w11, w21] =
      cansys::solution_entries_power({1, 2, 1.5, 1, 1, 0.5}, 1.0, complex(0, 1));
  CHECK(rel_err(w11, {1.2867324601321145035, -0.34962261139602469588}) < 1e-12);
  CHECK(rel_err(w21, {0.024640344325002541368, -0.52498619171315782585}) < 1e-12);

  const auto [b11, b21] = cansys::solution_entries_bessel({1, 3, 2, 1, 1, 0}, 1.5, complex(1, 1));
  CHECK(rel_err(b11, {0.36219956572493088524, -2.4712692998122483631}) < 1e-12);
  CHECK(rel_err(b21, {-1.4824587466227463934, -0.67410449496634674083}) < 1e-12);
}

TEST_CASE("hypergeometric and Bessel entry formulas agree on diagonal data") {
  const PowerData d{1, 2, 1.5, 1, 1, 0};
  for (double x : {0.3, 1.0, 1.8}) {
    for (const complex z : {complex(0, 1), complex(1, 1)}) {
      const auto [k11, k21] = cansys::solution_entries_power(d, x, z);
      const auto [j11, j21] = cansys::solution_entries_bessel(d, x, z);
      CHECK(std::abs(k11 - j11) < 1e-10 * std::abs(j11));
      CHECK(std::abs(k21 - j21) < 1e-10 * std::abs(j21));
    }
  }
  CHECK_THROWS_AS(cansys::solution_entries_bessel({1, 2, 1.5, 1, 1, 0.5}, 1.0, complex(0, 1)),
                  cansys::domain_error);
  // Equal exponents are outside the hypergeometric parametrization.
  CHECK_THROWS_AS(cansys::solution_entries_power({1, 1, 1, 1, 1, 0}, 1.0, complex(0, 1)),
                  cansys::domain_error);
}

TEST_CASE("scalar solutions follow their leading expansions") {
  const complex c(0.6, 0.2), d(0.9, -0.4);
  const double gamma = 1.7;
  const double x = 1e-3;
  const complex up = cansys::scalar_solution_plus(c, d, gamma, x);
  const complex up_lead = x - c / (gamma * (gamma + 1.0)) * std::pow(x, gamma + 1.0);
  CHECK(std::abs(up - up_lead) / x < 1e-9);
  const complex down = cansys::scalar_solution_minus(c, d, gamma, x);
  const complex down_lead = 1.0 - c / ((gamma - 1.0) * gamma) * std::pow(x, gamma);
  CHECK(std::abs(down - down_lead) < 1e-9);
  // gamma = 1 makes the second parameter of the minus solution degenerate.
  CHECK_THROWS_AS(cansys::scalar_solution_minus(c, d, 1.0, 0.5), cansys::domain_error);
  CHECK_THROWS_AS(cansys::scalar_solution_minus(c, d, 0.5, 0.5), cansys::domain_error);
}

TEST_CASE("scalar solutions satisfy the differential equation") {
  std::vector<double> grid;
  for (int i = 0; i < 25; ++i) grid.push_back(0.01 * std::pow(200.0, i / 24.0));
  const double r1 = cansys::kummer_solutions_check({0.6, 0.2}, {0.9, -0.4}, 1.7, grid);
  CHECK(r1 < 1e-6);
  const double r2 = cansys::kummer_solutions_check({-0.5, 0.8}, {0.4, 0.7}, 2.6, grid);
  CHECK(r2 < 1e-6);
}

TEST_CASE("reparametrization witness") {
  const PowerData a{1, 2, 1.5, 1, 1, 0.5};
  const double beta = 2.0, c = 1.5;
  PowerData b;
  b.rho1 = beta * a.rho1;
  b.rho2 = beta * a.rho2;
  b.rho3 = 0.5 * (b.rho1 + b.rho2);
  b.kappa1 = beta * std::pow(c, a.rho1) * a.kappa1;
  b.kappa2 = beta * std::pow(c, a.rho2) * a.kappa2;
  b.kappa3 = beta * std::pow(c, 1.5) * a.kappa3;
  const auto w = cansys::reparam_equivalent(a, b);
  REQUIRE(w.has_value());
  CHECK(w->beta == doctest::Approx(beta).epsilon(1e-12));
  CHECK(w->c == doctest::Approx(c).epsilon(1e-12));
  // The Weyl coefficient is invariant under reparametrization.
  CHECK(rel_err(cansys::closed_form_q(b).omega, cansys::closed_form_q(a).omega) < 1e-12);
  CHECK(cansys::closed_form_q(b).alpha == doctest::Approx(cansys::closed_form_q(a).alpha));

  PowerData broken = b;
  broken.kappa2 *= 1.01;
  CHECK_FALSE(cansys::reparam_equivalent(a, broken).has_value());
}

TEST_CASE("rescaling transforms the power law covariantly") {
  const PowerData d{1, 2, 1.5, 1.2, 0.9, -0.4};
  const cansys::PowerLaw law = cansys::closed_form_q(d);
  const double r = 2.5, b1 = 1.3, b2 = 0.7;
  const PowerData scaled = cansys::rescale_power(d, r, b1, b2);
  const cansys::PowerLaw law2 = cansys::closed_form_q(scaled);
  CHECK(law2.alpha == doctest::Approx(law.alpha).epsilon(1e-14));
  CHECK(rel_err(law2.omega, (b1 / b2) * std::pow(r, law.alpha) * law.omega) < 1e-12);
  // Zero channels stay zero.
  const PowerData diag = cansys::rescale_power({1, 2, 1.5, 1, 1, 0}, 2, 3, 4);
  CHECK(diag.kappa3 == 0.0);
}
