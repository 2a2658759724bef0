#include <doctest.h>

#include <cmath>
#include <complex>

#include "cansys/errors.hpp"
#include "cansys/specfun.hpp"

using cansys::complex;

namespace {

double rel_err(complex got, complex want) {
  return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("gamma matches high-precision references") {
  // Reference values computed with 50-digit arithmetic.
  CHECK(rel_err(cansys::gamma_complex({0.5, 3.0}),
                {0.02144567055243064606, 0.0068653648372616779142}) < 1e-13);
  CHECK(rel_err(cansys::gamma_complex({-2.5, 1.5}),
                {0.0034121395642391490286, -0.024053490434664735984}) < 1e-13);
  CHECK(rel_err(cansys::gamma_complex({0.25, 0.0}), {3.6256099082219083119, 0.0}) < 1e-14);
  CHECK(rel_err(cansys::gamma_complex({0.75, 0.0}), {1.2254167024651776451, 0.0}) < 1e-14);
  // Large imaginary part exercises the scaled reflection path.
  CHECK(rel_err(cansys::gamma_complex({1.5, -20.0}),
                {-9.2572999228839608147e-13, 6.6344243004177963382e-13}) < 1e-12);
}

TEST_CASE("gamma functional identities") {
  const complex zs[] = {{0.3, 0.7}, {2.5, -1.0}, {-1.3, 0.4}, {4.0, 3.0}};
  for (const complex& z : zs) {
    // Recurrence Gamma(z+1) = z Gamma(z).
    CHECK(rel_err(cansys::gamma_complex(z + 1.0), z * cansys::gamma_complex(z)) < 1e-13);
    // Conjugate symmetry.
    CHECK(rel_err(cansys::gamma_complex(std::conj(z)), std::conj(cansys::gamma_complex(z))) <
          1e-14);
  }
  // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
  const complex z(0.3, 0.9);
  const complex lhs = cansys::gamma_complex(z) * cansys::gamma_complex(1.0 - z);
  const complex rhs = M_PI / std::sin(M_PI * z);
  CHECK(rel_err(lhs, rhs) < 1e-13);
}

TEST_CASE("gamma rejects poles") {
  CHECK_THROWS_AS(cansys::gamma_complex({0.0, 0.0}), cansys::domain_error);
  CHECK_THROWS_AS(cansys::gamma_complex({-3.0, 0.0}), cansys::domain_error);
  CHECK_NOTHROW(cansys::gamma_complex({-3.0, 1e-8}));
}

TEST_CASE("log_gamma is consistent with gamma under exp") {
  const complex zs[] = {{0.5, 3.0}, {-2.5, 1.5}, {1.5, -20.0}, {10.0, 40.0}};
  for (const complex& z : zs) {
    CHECK(rel_err(std::exp(cansys::log_gamma(z)), cansys::gamma_complex(z)) < 1e-12);
  }
}

TEST_CASE("confluent hypergeometric matches references") {
  CHECK(rel_err(cansys::kummer_M({1, 0}, {2, 0}, {1, 0}), {1.7182818284590452354, 0.0}) < 1e-14);
  CHECK(rel_err(cansys::kummer_M({0.5, 0.5}, {1.5, -0.5}, {2, 3}),
                {-0.03171735669375907435, -0.32433766068406898201}) < 1e-13);
  // Negative real axis goes through the reflection transform.
  CHECK(rel_err(cansys::kummer_M({2, 0}, {3, 0}, {-10, 0}), {0.019990012015452253333, 0.0}) <
        1e-13);
  CHECK(rel_err(cansys::kummer_M({0.3, 0}, {1.7, 0}, {40, 0}), {419250926946409.73795, 0.0}) <
        1e-13);
  CHECK(rel_err(cansys::kummer_M({1, -2}, {3, 1}, {-20, 5}),
                {0.10333906047679812909, -0.74339129576699193529}) < 1e-12);
}

TEST_CASE("confluent hypergeometric transform consistency") {
  // M(a,b,x) = e^x M(b-a, b, -x) evaluated from both sides of the split.
  const complex a(0.4, 0.3), b(1.9, -0.2), x(7.0, 2.0);
  const complex lhs = cansys::kummer_M(a, b, x);
  const complex rhs = std::exp(x) * cansys::kummer_M(b - a, b, -x);
  CHECK(rel_err(lhs, rhs) < 1e-12);
}

TEST_CASE("confluent hypergeometric rejects bad parameters") {
  CHECK_THROWS_AS(cansys::kummer_M({1, 0}, {0, 0}, {1, 0}), cansys::domain_error);
  CHECK_THROWS_AS(cansys::kummer_M({1, 0}, {-2, 0}, {1, 0}), cansys::domain_error);
  CHECK_THROWS_AS(cansys::kummer_M({1, 0}, {2, 0}, {150, 0}), cansys::numeric_error);
}

TEST_CASE("normalized Bessel function matches references") {
  CHECK(rel_err(cansys::bessel_frak(0.3, {2, 1}),
                {0.37878548665467533246, -0.53118609095525924429}) < 1e-13);
  // Beyond the series radius: asymptotic branch.
  CHECK(rel_err(cansys::bessel_frak(-0.4, {40, 0}), {-0.33700841328298675301, 0.0}) < 1e-12);
  CHECK(rel_err(cansys::bessel_frak(0.7, {45, 0}), {0.0079327628731968733875, 0.0}) < 1e-10);
  CHECK(rel_err(cansys::bessel_frak(1.2, {33, 7}),
                {2.1068760729486066644, 1.8240968605458570776}) < 1e-12);
  CHECK(rel_err(cansys::bessel_frak(2.5, {60, 10}),
                {0.54910811414393525025, 0.47853441424721176307}) < 1e-12);
}

TEST_CASE("normalized Bessel half-integer closed forms") {
  // nu = 1/2 gives sin(x)/x, nu = -1/2 gives cos(x); 29 and 31 land on the two
  // evaluation branches (series vs asymptotic).
  CHECK(rel_err(cansys::bessel_frak(0.5, {29, 0}), {std::sin(29.0) / 29.0, 0.0}) < 1e-12);
  CHECK(rel_err(cansys::bessel_frak(0.5, {31, 0}), {std::sin(31.0) / 31.0, 0.0}) < 1e-12);
  CHECK(rel_err(cansys::bessel_frak(-0.5, {29, 0}), {std::cos(29.0), 0.0}) < 1e-12);
  CHECK(rel_err(cansys::bessel_frak(-0.5, {31, 0}), {std::cos(31.0), 0.0}) < 1e-12);
}

TEST_CASE("normalized Bessel basics") {
  // Value 1 at the origin for every order, evenness in x.
  CHECK(std::abs(cansys::bessel_frak(0.8, {0, 0}) - complex(1, 0)) < 1e-15);
  const complex x(3.0, 1.0);
  CHECK(rel_err(cansys::bessel_frak(0.3, -x), cansys::bessel_frak(0.3, x)) < 1e-13);
  CHECK_THROWS_AS(cansys::bessel_frak(-1.5, {1, 0}), cansys::domain_error);
}
