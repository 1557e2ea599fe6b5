#include "doctest.h"

#include "skewfatou/probe.hpp"

#include <cmath>
#include <string>

using namespace skewfatou;

namespace {

skew_product quad_half(const char* h = "1") {
  return skew_product(parse_expr("z^2", var_kind::z), parse_expr("0.5*w", var_kind::w),
                      parse_expr(h, var_kind::z));
}

} // namespace

TEST_SUITE("probe") {

TEST_CASE("both behaviors are witnessed on the unit circle") {
  // z0 = 1 sits on the boundary between escape and capture for the squaring map
  non_normality_certificate cert =
      certify_non_normality(quad_half(), cplx(1.0, 0.0), {0.1, 0.05}, 64);
  CHECK(cert.complete);
  REQUIRE(cert.scales.size() == 2);
  for (std::size_t j = 0; j < cert.scales.size(); ++j) {
    const scale_witnesses& s = cert.scales[j];
    CAPTURE(j);
    CHECK(s.complete);
    REQUIRE(s.escape_w.has_value());
    REQUIRE(s.bounded_w.has_value());
    CHECK(std::abs(*s.escape_w) <= s.scale);
    CHECK(std::abs(*s.bounded_w) <= s.scale);
    CHECK(s.escape_target == 10.0 * static_cast<double>(j + 1));
    CHECK(s.escape_attained >= s.escape_target);
    CHECK(s.bounded_max <= 1e3);
  }
  CHECK_FALSE(cert.verdict.empty());
}

TEST_CASE("no bounded witness exists deep in the escaping basin") {
  non_normality_certificate cert =
      certify_non_normality(quad_half(), cplx(2.0, 0.0), {0.1}, 64);
  CHECK_FALSE(cert.complete);
  REQUIRE(cert.scales.size() == 1);
  CHECK(cert.scales[0].escape_w.has_value());
  CHECK_FALSE(cert.scales[0].bounded_w.has_value());
}

TEST_CASE("no escape witness exists well inside the basin of attraction") {
  non_normality_certificate cert =
      certify_non_normality(quad_half(), cplx(0.25, 0.0), {0.1}, 64);
  CHECK_FALSE(cert.complete);
  REQUIRE(cert.scales.size() == 1);
  CHECK_FALSE(cert.scales[0].escape_w.has_value());
}

TEST_CASE("certificate validation") {
  skew_product F = quad_half();
  CHECK_THROWS_AS(certify_non_normality(F, cplx(1.0, 0.0), {}, 64), std::invalid_argument);
  CHECK_THROWS_AS(certify_non_normality(F, cplx(1.0, 0.0), {0.1, 0.2}, 64),
                  std::invalid_argument); // must shrink
  CHECK_THROWS_AS(certify_non_normality(F, cplx(1.0, 0.0), {0.1, -0.05}, 64),
                  std::invalid_argument);
  CHECK_THROWS_AS(certify_non_normality(F, cplx(1.0, 0.0), {0.1}, 0), std::invalid_argument);
}

TEST_CASE("the translate patch shadows uniformly for a tame perturbation") {
  baker_family fam = default_baker();
  bulging_report rep = bulging_probe(fam, parse_expr("0.5*w", var_kind::w),
                                     parse_expr("1", var_kind::z), cplx(0.1, 0.0), 0.2, 0.01,
                                     0.5, 50);
  CHECK(rep.verdict == "uniform-shadowing");
  REQUIRE(rep.samples.size() == 25);
  bool saw_zero_w = false;
  for (const bulge_sample& s : rep.samples) {
    CHECK(s.shadows);
    CHECK_FALSE(s.escaped_tube);
    CHECK(s.max_err < 0.5);
    saw_zero_w = saw_zero_w || s.w_start == cplx(0.0, 0.0);
  }
  CHECK(saw_zero_w); // the w spiral must include the invariant fiber itself
}

TEST_CASE("a violent perturbation splits the patch into mixed behavior") {
  baker_family fam = default_baker();
  // |w*h| ~ 1 on the first step blows most starts out of the half-unit tube,
  // while the w = 0 sample still shadows the unperturbed ladder
  bulging_report rep = bulging_probe(fam, parse_expr("0.5*w", var_kind::w),
                                     parse_expr("100", var_kind::z), cplx(0.1, 0.0), 0.2, 0.01,
                                     0.5, 50);
  CHECK(rep.verdict == "mixed-behavior");
  std::size_t shadowed = 0, escaped = 0;
  for (const bulge_sample& s : rep.samples) {
    if (s.shadows) ++shadowed;
    if (s.escaped_tube) ++escaped;
  }
  CHECK(shadowed > 0);
  CHECK(escaped > 0);
}

TEST_CASE("starts outside the induction patch still get a direct tube check") {
  baker_family fam = default_baker();
  // center sample at 0.3 is farther than delta/2 from the nearest translate
  bulging_report rep = bulging_probe(fam, parse_expr("0.5*w", var_kind::w),
                                     parse_expr("1", var_kind::z), cplx(0.3, 0.0), 0.05, 0.001,
                                     0.5, 40);
  bool saw_direct = false;
  for (const bulge_sample& s : rep.samples)
    if (s.note.find("outside the induction patch") != std::string::npos) {
      saw_direct = true;
      CHECK(s.shadows); // contraction still pulls the orbit onto the ladder
    }
  CHECK(saw_direct);
  CHECK(rep.verdict == "uniform-shadowing");
}

TEST_CASE("probe validation") {
  baker_family fam = default_baker();
  fn g = parse_expr("0.5*w", var_kind::w);
  fn h = parse_expr("1", var_kind::z);
  CHECK_THROWS_AS(bulging_probe(fam, g, h, cplx(0.1, 0.0), 0.2, 0.01, -0.5, 50),
                  std::invalid_argument);
  CHECK_THROWS_AS(bulging_probe(fam, g, h, cplx(0.1, 0.0), -0.2, 0.01, 0.5, 50),
                  std::invalid_argument);
  CHECK_THROWS_AS(bulging_probe(fam, g, h, cplx(0.1, 0.0), 0.2, 0.01, 0.5, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(bulging_probe(fam, fn(), h, cplx(0.1, 0.0), 0.2, 0.01, 0.5, 50),
                  std::invalid_argument);
}

} // TEST_SUITE
