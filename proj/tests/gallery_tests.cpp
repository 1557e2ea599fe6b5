#include "doctest.h"

#include "skewfatou/gallery.hpp"
#include "skewfatou/orbit.hpp"

#include <cmath>
#include <limits>

using namespace skewfatou;

TEST_SUITE("gallery") {

TEST_CASE("the quadratic family landmarks sit where computed by hand") {
  poly_example ex = make_poly_example(0.5, 5.0, 0.01);
  CHECK(ex.N == 3);
  CHECK(ex.n0 == 3);
  // y0 = delta * lambda^(-n0) scaled through the escape window; the value is dyadic-free
  CHECK(std::abs(ex.y0 - 0.00262144) <= 1e-15 * 0.00262144);

  // F(z,w) = (z^2 - w z^3, lambda w)
  auto [z1, w1] = ex.map.step(cplx(2.0, 0.0), cplx(0.1, 0.0));
  CHECK(z1 == cplx(4.0 - 0.1 * 8.0, 0.0));
  CHECK(w1 == cplx(0.05, 0.0));
}

TEST_CASE("the critical vertical line flips sign exactly once") {
  poly_example ex = make_poly_example(0.5, 5.0, 0.01);
  sign_flip_report rep = example_sign_flip(ex);
  CHECK(rep.positives_ok);
  CHECK(rep.flip_ok);
  CHECK(rep.products_ok);
  CHECK(rep.all_real);
  REQUIRE(rep.xs.size() >= 5);
  for (int j = 1; j <= 3; ++j) CHECK(rep.xs[static_cast<std::size_t>(j)] > 0.0);
  CHECK(rep.xs[4] <= 0.0);
}

TEST_CASE("bisection pins the boundary fiber value") {
  poly_example ex = make_poly_example(0.5, 5.0, 0.01);
  bisect_result b = example_bisect_bounded(ex, 1e-15);
  CHECK(b.bracket_width <= 1e-15);
  CHECK(b.y_tilde > 0.0);
  CHECK(b.y_tilde < ex.y0);
  REQUIRE(!b.widths.empty());
  // the midpoint rounds to a double, so each half can overshoot by an ulp of
  // the endpoint magnitude; the loop runs into that regime on purpose
  double ulp_slack = 2.0 * std::numeric_limits<double>::epsilon() * ex.y0;
  for (std::size_t i = 1; i < b.widths.size(); ++i)
    CHECK(b.widths[i] <= 0.5 * b.widths[i - 1] + ulp_slack);
  CHECK(b.bound_cap == 390625.0); // 5^(2^3)
  CHECK(b.orbit_max <= b.bound_cap);
  CHECK(b.bounded);
  CHECK(b.x_after > 0.0); // the kept side still lands on the positive half-line

  // a nudge across the bracket tips the landing point over the sign flip
  orbit_record rec = iterate(ex.map, cplx(ex.x0, 0.0), cplx(b.y_tilde + 1e-14, 0.0), 4);
  REQUIRE(rec.points.size() == 5);
  CHECK(rec.points[4].z.imag() == 0.0);
  CHECK(rec.points[4].z.real() <= 0.0);
}

TEST_CASE("family parameter validation") {
  CHECK_THROWS_AS(make_poly_example(1.5, 5.0, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(make_poly_example(0.5, -1.0, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(make_poly_example(0.5, 1.5, 0.01), std::invalid_argument);  // lambda*x0 < 1
  CHECK_THROWS_AS(make_poly_example(0.9, 1.2, 0.01), std::invalid_argument);  // lambda^2*x0 < 1
  CHECK_THROWS_AS(make_poly_example(0.5, 5.0, 0.0), std::invalid_argument);
}

TEST_CASE("the default translation family fixes the origin superattractingly") {
  baker_family fam = default_baker();
  double two_pi = 2.0 * std::acos(-1.0);
  CHECK(std::abs(fam.T - cplx(0.0, two_pi)) <= 1e-15);
  CHECK(fam.fixed_point == cplx(0.0, 0.0));
  CHECK(fam.fixed_point_defect <= 1e-10);
  CHECK(fam.derivative_abs <= 1e-12); // b'(0) = 1 - e^0 = 0
  CHECK(fam.periodicity_defect <= 1e-9);
  // f(z) = z + T + e^(-z) - 1 evaluated at 1
  cplx got = eval_z(fam.f, cplx(1.0, 0.0));
  CHECK(std::abs(got - (cplx(1.0, 0.0) + fam.T + std::exp(cplx(-1.0, 0.0)) - cplx(1.0, 0.0))) <=
        1e-14);
}

TEST_CASE("family construction rejects broken data") {
  double two_pi = 2.0 * std::acos(-1.0);
  cplx T(0.0, two_pi);
  // p = -0.5*z keeps 0 attracting but is nowhere near T-periodic
  CHECK_THROWS_AS(make_baker_family(T, parse_expr("-0.5*z", var_kind::z), cplx(0.0, 0.0)),
                  std::runtime_error);
  // p = 1 - exp(-z) is T-periodic with fixed point 0 but b'(0) = 2
  CHECK_THROWS_AS(make_baker_family(T, parse_expr("1 - exp(-z)", var_kind::z), cplx(0.0, 0.0)),
                  std::runtime_error);
  CHECK_THROWS_AS(make_baker_family(cplx(0.0, 0.0), parse_expr("exp(-z) - 1", var_kind::z),
                                    cplx(0.0, 0.0)),
                  std::invalid_argument);
}

} // TEST_SUITE
