#include "doctest.h"

#include "skewfatou/criteria.hpp"
#include "skewfatou/gallery.hpp"

#include <cmath>
#include <vector>

using namespace skewfatou;

namespace {

fn half_w() { return parse_expr("0.5*w", var_kind::w); }
fn square_w() { return parse_expr("w^2", var_kind::w); }

} // namespace

TEST_SUITE("criteria") {

TEST_CASE("geometric envelopes contract at the sampled rate") {
  rho_sequence rho = derive_rho_geometric(half_w(), 0.25, 20);
  CHECK(rho.tag == rho_tag::geometric);
  CHECK(rho.containment_verified);
  CHECK(rho.alpha == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rho.delta_g <= 0.25);
  CHECK(rho.delta_g > 0.0);
  REQUIRE(rho.values.size() == 21);
  for (int k = 0; k <= 20; ++k)
    CHECK(rho_at(rho, k) == doctest::Approx(std::pow(rho.alpha, k) * rho.delta_g).epsilon(1e-12));
  for (int k = 1; k <= 20; ++k) CHECK(rho.values[static_cast<std::size_t>(k)] < rho.values[static_cast<std::size_t>(k) - 1]);
  CHECK(check_rho_containment(rho, half_w()));
}

TEST_CASE("superattracting envelopes follow the closed form") {
  rho_sequence rho = derive_rho_superattracting(square_w(), 0.5, 0.25, 8);
  CHECK(rho.tag == rho_tag::superattracting);
  CHECK(rho.d == 2);
  CHECK(rho.containment_verified);
  CHECK(rho.t == 0.25);
  // C_g = 1 for g = w^2, so rho_k = t^(2^k)
  for (int k = 0; k <= rho.K; ++k)
    CHECK(rho_at(rho, k) == doctest::Approx(std::pow(0.25, std::pow(2.0, k))).epsilon(1e-10));
  CHECK(check_rho_containment(rho, square_w()));
}

TEST_CASE("envelope derivation rejects the wrong attraction type") {
  // a superattracting map still admits a (coarse) geometric envelope:
  // for g = w^2 the ratio sup |g(w)/w| on |w| = 0.25 is exactly 0.25
  rho_sequence coarse = derive_rho_geometric(square_w(), 0.25, 8);
  CHECK(coarse.tag == rho_tag::geometric);
  CHECK(coarse.alpha == doctest::Approx(0.25).epsilon(1e-12));
  // the reverse direction is a hard error: half_w has g'(0) != 0
  CHECK_THROWS_AS(derive_rho_superattracting(half_w(), 0.25, 0.1, 8), std::invalid_argument);
  CHECK_THROWS_AS(derive_rho_geometric(parse_expr("2*w", var_kind::w), 0.25, 8),
                  std::invalid_argument); // expanding, not attracting
  CHECK_THROWS_AS(derive_rho_geometric(half_w(), -1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(user_rho({}), std::invalid_argument);
  CHECK_THROWS_AS(user_rho({0.1, -0.2}), std::invalid_argument);
}

TEST_CASE("rho_at refuses to extrapolate a user sequence") {
  rho_sequence rho = user_rho({0.4, 0.2, 0.1});
  CHECK(rho_at(rho, 2) == 0.1);
  CHECK_THROWS_AS(rho_at(rho, 3), std::invalid_argument);
  CHECK_THROWS_AS(rho_at(rho, -1), std::invalid_argument);
}

TEST_CASE("sampled sup on the bidisk sees the boundary maximum") {
  // |z^2| on |z - 1| <= 1 peaks at z = 2
  double s = sampled_sup_abs(parse_expr("z^2", var_kind::z), cplx(1.0, 0.0), 1.0, 0.5);
  CHECK(s == doctest::Approx(4.0).epsilon(1e-3));
  // w direction participates when h uses w
  double sw = sampled_sup_abs(parse_expr("z*w", var_kind::z), cplx(1.0, 0.0), 1.0, 0.5);
  CHECK(sw == doctest::Approx(1.0).epsilon(1e-3));
  // constant in both variables
  CHECK(sampled_sup_abs(parse_expr("3", var_kind::z), cplx(0.0, 0.0), 2.0, 2.0) ==
        doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("the tube series converges to the geometric sum") {
  std::vector<double> vals;
  for (int k = 0; k <= 60; ++k) vals.push_back(0.1 * std::pow(2.0, -k));
  rho_sequence rho = user_rho(vals);
  series_report rep = series_test(parse_expr("1", var_kind::z), rho, cplx(0.0, 0.0),
                                  cplx(1.0, 0.0), 0.5, 60);
  CHECK(rep.verdict == series_verdict::converged);
  REQUIRE(rep.sum_estimate.has_value());
  CHECK(std::abs(*rep.sum_estimate - 0.2) <= 1e-9);
  REQUIRE(!rep.partial_sums.empty());
  for (std::size_t i = 1; i < rep.partial_sums.size(); ++i)
    CHECK(rep.partial_sums[i] >= rep.partial_sums[i - 1]);
}

TEST_CASE("the tube series diverges for exponential growth along the tubes") {
  std::vector<double> vals;
  for (int k = 0; k <= 60; ++k) vals.push_back(0.1 * std::pow(2.0, -k));
  rho_sequence rho = user_rho(vals);
  // term ratio approaches e/2 > 1 as the tube centers march right
  series_report rep = series_test(parse_expr("exp(z)", var_kind::z), rho, cplx(0.0, 0.0),
                                  cplx(1.0, 0.0), 0.5, 60);
  CHECK(rep.verdict == series_verdict::diverging);
  CHECK_FALSE(rep.sum_estimate.has_value());
}

TEST_CASE("series validation") {
  rho_sequence rho = user_rho({0.1, 0.05});
  CHECK_THROWS_AS(series_test(parse_expr("1", var_kind::z), rho, cplx(0.0, 0.0), cplx(1.0, 0.0),
                              -0.5, 1),
                  std::invalid_argument);
}

TEST_CASE("growth order estimates match known functions") {
  std::vector<cplx> cs(11, cplx(1.0, 0.0));
  order_estimate poly10 = estimate_order(polynomial(cs, var_kind::z));
  CHECK(poly10.rho1 <= 0.15); // polynomials have order zero

  order_estimate e1 = estimate_order(parse_expr("exp(z)", var_kind::z));
  CHECK(e1.rho1 >= 0.9);
  CHECK(e1.rho1 <= 1.1);

  order_estimate e2 = estimate_order(parse_expr("exp(z^2)", var_kind::z));
  CHECK(e2.rho1 >= 1.85);
  CHECK(e2.rho1 <= 2.15);

  REQUIRE(e1.radii.size() == 9); // default ladder 2^6 .. 2^14
  CHECK(e1.radii.front() == 64.0);
  CHECK(e1.radii.back() == 16384.0);
  for (double lm : e1.log_max) CHECK(std::isfinite(lm));

  order_estimate zero = estimate_order(parse_expr("0", var_kind::z));
  CHECK(zero.degenerate);
}

TEST_CASE("order estimation validates its ladder") {
  fn h = parse_expr("exp(z)", var_kind::z);
  CHECK_THROWS_AS(estimate_order(h, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_order(h, 1.0, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(estimate_order(h, 1.0, {4.0, 2.0}), std::invalid_argument);
}

TEST_CASE("the growth criterion needs order below one for geometric attraction") {
  growth_report ok = growth_criterion_check(parse_expr("poly(1,1)", var_kind::z), half_w(), 0.25);
  CHECK(ok.verdict == growth_verdict::satisfied);
  CHECK(ok.g_kind == attraction_kind::geometric);

  // order exactly 1 sits inside the estimator band: refuse to call it
  growth_report edge = growth_criterion_check(parse_expr("exp(z)", var_kind::z), half_w(), 0.25);
  CHECK(edge.verdict == growth_verdict::inconclusive);

  growth_report bad = growth_criterion_check(parse_expr("exp(z^2)", var_kind::z), half_w(), 0.25);
  CHECK(bad.verdict == growth_verdict::not_satisfied);

  // superattracting g accepts any finite order
  growth_report super = growth_criterion_check(parse_expr("exp(z^2)", var_kind::z), square_w(), 0.25);
  CHECK(super.verdict == growth_verdict::satisfied);
  CHECK(super.g_kind == attraction_kind::superattracting);
}

TEST_CASE("shadowing holds along the translate ladder of the default family") {
  baker_family fam = default_baker();
  skew_product F(fam.f, half_w(), parse_expr("1", var_kind::z));
  shadowing_report rep = shadowing_check(F, cplx(0.1, 0.0), cplx(0.01, 0.0), 0.5, fam.T, 50);
  CHECK(rep.l == 0);
  REQUIRE(rep.e.size() == 51);
  CHECK(rep.within_delta);
  CHECK(rep.induction_ok);
  CHECK(rep.chain_ok);
  CHECK(rep.sum_bound_ok);
  CHECK(rep.w_enveloped);
  for (double ek : rep.e) CHECK(ek < 0.5);
  // w halves each step from 0.01, so fifty steps land under 1e-16
  CHECK(rep.w_final_abs == doctest::Approx(0.01 * std::pow(0.5, 50)).epsilon(1e-12));
  CHECK(rep.w_final_abs < 1e-16);
}

TEST_CASE("shadowing with w = 0 reports the unperturbed orbit") {
  baker_family fam = default_baker();
  skew_product F(fam.f, half_w(), parse_expr("1", var_kind::z));
  shadowing_report rep = shadowing_check(F, cplx(0.1, 0.0), cplx(0.0, 0.0), 0.5, fam.T, 30);
  CHECK(rep.note.find("unperturbed") != std::string::npos);
  CHECK(rep.within_delta);
  CHECK(rep.w_enveloped);
  CHECK(rep.w_final_abs == 0.0);
  for (double inc : rep.increments) CHECK(inc == 0.0);
}

TEST_CASE("shadowing rejects starts outside its tube patch") {
  baker_family fam = default_baker();
  skew_product F(fam.f, half_w(), parse_expr("1", var_kind::z));
  CHECK_THROWS_WITH_AS(shadowing_check(F, cplx(0.3, 0.0), cplx(0.01, 0.0), 0.5, fam.T, 10),
                       doctest::Contains("delta/2"), std::invalid_argument);
  CHECK_THROWS_AS(shadowing_check(F, cplx(0.1, 0.0), cplx(0.01, 0.0), -0.5, fam.T, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(shadowing_check(F, cplx(0.1, 0.0), cplx(0.01, 0.0), 0.5, cplx(0.0, 0.0), 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(shadowing_check(F, cplx(0.1, 0.0), cplx(0.01, 0.0), 0.5, fam.T, 0),
                  std::invalid_argument);
}

} // TEST_SUITE
