#include "doctest.h"

#include "skewfatou/expr.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace skewfatou;

namespace {

bool close(cplx a, cplx b, double tol = 1e-14) { return std::abs(a - b) <= tol; }

} // namespace

TEST_SUITE("expr") {

TEST_CASE("parsing evaluates like hand-built complex arithmetic") {
  cplx z(0.5, -1.0), w(1.0, 1.0);

  fn e1 = parse_expr("z^2", var_kind::z);
  CHECK(close(eval(e1, cplx(2.0, 0.0), w), cplx(4.0, 0.0)));

  fn e2 = parse_expr("0.5*w", var_kind::z);
  CHECK(close(eval(e2, z, cplx(0.25, 0.0)), cplx(0.125, 0.0)));

  fn e3 = parse_expr("(1+2i)*z + w^3 - 4", var_kind::z);
  cplx want = cplx(1.0, 2.0) * z + w * w * w - cplx(4.0, 0.0);
  CHECK(close(eval(e3, z, w), want));

  // the minus sign is part of the atom, so the power applies to (-z)
  fn e4 = parse_expr("-z^2", var_kind::z);
  CHECK(close(eval(e4, cplx(3.0, 0.0), w), cplx(9.0, 0.0)));
  fn e4b = parse_expr("0 - z^2", var_kind::z);
  CHECK(close(eval(e4b, cplx(3.0, 0.0), w), cplx(-9.0, 0.0)));

  fn e5 = parse_expr("exp(z)*exp(w)", var_kind::z);
  CHECK(close(eval(e5, z, w), std::exp(z + w), 1e-13));
}

TEST_CASE("numbers accept exponents and the imaginary suffix") {
  CHECK(close(eval(parse_expr("1e-3", var_kind::z), 0.0, 0.0), cplx(1e-3, 0.0)));
  CHECK(close(eval(parse_expr("2.5i", var_kind::z), 0.0, 0.0), cplx(0.0, 2.5)));
  CHECK(close(eval(parse_expr("-3i", var_kind::z), 0.0, 0.0), cplx(0.0, -3.0)));
  CHECK(close(eval(parse_expr("1.5e2", var_kind::z), 0.0, 0.0), cplx(150.0, 0.0)));
  CHECK(close(eval(parse_expr("i", var_kind::z), 0.0, 0.0), cplx(0.0, 1.0)));
}

TEST_CASE("poly atoms bind to the slot variable") {
  fn in_z = parse_expr("poly(1,0,2)", var_kind::z); // 1 + 2 z^2
  CHECK(close(eval(in_z, cplx(3.0, 0.0), cplx(99.0, 0.0)), cplx(19.0, 0.0)));

  fn in_w = parse_expr("poly(0,0.5)", var_kind::w); // w/2
  CHECK(close(eval(in_w, cplx(99.0, 0.0), cplx(0.25, 0.0)), cplx(0.125, 0.0)));
  CHECK(in_w->uses_w);
  CHECK_FALSE(in_w->uses_z);
}

TEST_CASE("polynomial nodes honor the affine pre-map") {
  // c0 + c1*u with u = (z - 2)/3
  fn p = polynomial({cplx(1.0, 0.0), cplx(2.0, 0.0)}, var_kind::z, cplx(2.0, 0.0), cplx(3.0, 0.0));
  CHECK(close(eval(p, cplx(2.0, 0.0), 0.0), cplx(1.0, 0.0)));
  CHECK(close(eval(p, cplx(5.0, 0.0), 0.0), cplx(3.0, 0.0)));
  CHECK(close(eval(p, cplx(0.5, -1.5), 0.0),
              cplx(1.0, 0.0) + cplx(2.0, 0.0) * (cplx(0.5, -1.5) - cplx(2.0, 0.0)) / cplx(3.0, 0.0)));
}

TEST_CASE("malformed input is rejected with a column position") {
  CHECK_THROWS_AS(parse_expr("z/2", var_kind::z), parse_error);
  try {
    parse_expr("z/2", var_kind::z);
  } catch (const parse_error& e) {
    CHECK(e.position == 1); // the '/'
    CHECK(std::string(e.what()).find("column 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expr("", var_kind::z), parse_error);
  CHECK_THROWS_AS(parse_expr("z^-1", var_kind::z), parse_error);
  CHECK_THROWS_AS(parse_expr("poly()", var_kind::z), parse_error);
  CHECK_THROWS_AS(parse_expr("exp(z", var_kind::z), parse_error);
  CHECK_THROWS_AS(parse_expr("2**3", var_kind::z), parse_error);
  CHECK_THROWS_AS(parse_expr("q", var_kind::z), parse_error);
  CHECK_THROWS_AS(parse_expr("z 2", var_kind::z), parse_error);
}

TEST_CASE("printing round-trips through the parser") {
  std::vector<std::string> texts = {"z^2", "(1+2i)*z + w^3 - 4", "exp(z^2)*z - 0.25",
                                    "poly(1,0,2) + w", "-(z + i)^3"};
  cplx z(0.7, 0.3), w(-0.2, 0.4);
  for (const auto& t : texts) {
    CAPTURE(t);
    fn a = parse_expr(t, var_kind::z);
    fn b = parse_expr(to_string(a), var_kind::z);
    CHECK(close(eval(a, z, w), eval(b, z, w), 1e-13));
  }
}

TEST_CASE("fiber-restricted evaluation refuses w-dependent expressions") {
  CHECK(close(eval_z(parse_expr("z^2 + 1", var_kind::z), cplx(3.0, 0.0)), cplx(10.0, 0.0)));
  CHECK_THROWS_AS(eval_z(parse_expr("z + w", var_kind::z), cplx(1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("variable usage flags track the tree") {
  CHECK(parse_expr("z + w", var_kind::z)->uses_z);
  CHECK(parse_expr("z + w", var_kind::z)->uses_w);
  CHECK_FALSE(parse_expr("3 + 2i", var_kind::z)->uses_z);
  CHECK_FALSE(parse_expr("3 + 2i", var_kind::z)->uses_w);
  CHECK_FALSE(parse_expr("exp(z)", var_kind::z)->uses_w);
}

TEST_CASE("derivatives follow the calculus rules") {
  cplx z(1.3, -0.4);
  fn cube = parse_expr("z^3", var_kind::z);
  CHECK(close(eval(derivative(cube, var_kind::z), z, 0.0), 3.0 * z * z, 1e-13));

  fn e2z = parse_expr("exp(2*z)", var_kind::z);
  CHECK(close(eval(derivative(e2z, var_kind::z), z, 0.0), 2.0 * std::exp(2.0 * z), 1e-12));

  fn prod = parse_expr("z*exp(z)", var_kind::z);
  CHECK(close(eval(derivative(prod, var_kind::z), z, 0.0), (z + 1.0) * std::exp(z), 1e-12));

  fn wexpr = parse_expr("w^2", var_kind::z);
  CHECK(close(eval(derivative(wexpr, var_kind::z), z, cplx(2.0, 1.0)), cplx(0.0, 0.0)));
  CHECK(close(eval(derivative(wexpr, var_kind::w), z, cplx(2.0, 1.0)), cplx(4.0, 2.0)));
}

TEST_CASE("log-modulus evaluation survives astronomically large values") {
  // exp(1000) overflows a double; the structured path must never form it
  // and still report log|z^3 * exp(z)| = 3*log(1000) + 1000.
  fn e = parse_expr("z^3*exp(z)", var_kind::z);
  double got = log_modulus_eval(e, cplx(1000.0, 0.0), 0.0);
  CHECK(got == doctest::Approx(3.0 * std::log(1000.0) + 1000.0).epsilon(1e-12));

  // nested exponentials: log|exp(exp(z))| = Re(exp(z))
  fn nest = parse_expr("exp(exp(z))", var_kind::z);
  double got2 = log_modulus_eval(nest, cplx(10.0, 0.0), 0.0);
  CHECK(got2 == doctest::Approx(std::exp(10.0)).epsilon(1e-12));

  log_modulus full = log_modulus_eval_full(e, cplx(1000.0, 0.0), 0.0);
  CHECK(full.log_abs == doctest::Approx(got).epsilon(1e-15));
  REQUIRE(full.argument.has_value());
  // argument of z^3 exp(z) on the positive real axis is 0 mod 2pi
  CHECK(std::abs(std::remainder(*full.argument, 2.0 * 3.14159265358979323846)) < 1e-9);
}

TEST_CASE("log-modulus fallback reports unrepresentable sums") {
  fn s = parse_expr("exp(z) + 1", var_kind::z);
  CHECK_THROWS_AS(log_modulus_eval(s, cplx(1e6, 0.0), 0.0), std::range_error);
  // small arguments still go through the fallback fine
  CHECK(log_modulus_eval(s, cplx(1.0, 0.0), 0.0) ==
        doctest::Approx(std::log(std::exp(1.0) + 1.0)).epsilon(1e-12));
}

} // TEST_SUITE
