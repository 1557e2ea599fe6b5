#include "doctest.h"

#include "skewfatou/construction.hpp"

#include <cmath>
#include <string>

using namespace skewfatou;

namespace {

fn quad() { return parse_expr("z^2", var_kind::z); }
fn half_w() { return parse_expr("0.5*w", var_kind::w); }

const property_check* find_property(const stage_state& st, const std::string& needle) {
  for (const property_check& p : st.properties)
    if (p.what.find(needle) != std::string::npos) return &p;
  return nullptr;
}

} // namespace

TEST_SUITE("construction") {

TEST_CASE("the frozen geometry matches the hand ladder for the squaring map") {
  construction_geometry geo = build_geometry(quad(), cplx(2.0, 0.0), 64, 2);
  CHECK(geo.K == 2);
  REQUIRE(geo.n.size() >= 4);
  for (std::size_t j = 0; j < 4; ++j) CHECK(geo.n[j] == j); // |z| strictly climbs from the start
  CHECK(geo.z_at(0) == cplx(2.0, 0.0));
  CHECK(geo.z_at(1) == cplx(4.0, 0.0));
  CHECK(geo.z_at(2) == cplx(16.0, 0.0));

  REQUIRE(geo.delta_tilde.size() == 3);
  CHECK(geo.delta_tilde[0] == 0.25);
  CHECK(geo.delta_tilde[1] == 0.0625);
  CHECK(geo.delta_tilde[2] == 0.015625);
  REQUIRE(geo.delta_geom.size() == 3);
  CHECK(geo.delta_geom[0] == 0.125);
  CHECK(geo.delta_geom[1] == 0.03125);
  CHECK(geo.delta_geom[2] == 0.0078125);

  CHECK(geo.target_disk(1).center == cplx(4.0, 0.0));
  CHECK(geo.target_disk(1).radius == 0.03125);
  CHECK(geo.big_radius(1) == 4.0 - 2.0 * 0.03125);
  CHECK(geo.big_radius(2) == 16.0 - 2.0 * 0.0078125);

  CHECK(geo.margin_disjoint_targets > 0.0);
  CHECK(geo.margin_nesting > 0.0);
  CHECK(geo.margin_contains > 0.0);
  CHECK(geo.margin_separation > 0.0);
  CHECK(geo.margin_orbit_interior > 0.0);
}

TEST_CASE("geometry construction rejects hopeless starts") {
  // bounded orbit: no escaping subsequence of the needed length
  CHECK_THROWS_AS(build_geometry(quad(), cplx(0.5, 0.0), 64, 2), std::invalid_argument);
  // window too short for K + 2 record maxima
  CHECK_THROWS_AS(build_geometry(quad(), cplx(2.0, 0.0), 2, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_geometry(quad(), cplx(2.0, 0.0), 64, -1), std::invalid_argument);
}

TEST_CASE("stage zero seeds the identity") {
  construction_geometry geo = build_geometry(quad(), cplx(2.0, 0.0), 64, 2);
  stage_state st = build_stage(nullptr, geo, half_w(), 0, 8, 8, 1, 0);
  CHECK(st.k == 0);
  CHECK(st.all_ok);
  CHECK_FALSE(st.fit.has_value());
  CHECK(st.R == geo.delta_geom[0]);
  CHECK(st.delta_stab == geo.delta_geom[0]);
  CHECK(st.min_delta_stab == geo.delta_geom[0]);
  // h_0 is the identity in z
  CHECK(eval(st.h, cplx(1.25, -0.5), cplx(0.3, 0.0)) == cplx(1.25, -0.5));
  const property_check* funnel = find_property(st, "funnel");
  REQUIRE(funnel != nullptr);
  CHECK(funnel->ok);
}

TEST_CASE("stage one derives the pinned witnesses and funnel data") {
  construction_geometry geo = build_geometry(quad(), cplx(2.0, 0.0), 64, 2);
  stage_state s0 = build_stage(nullptr, geo, half_w(), 0, 8, 8, 1, 0);

  auto [w, wt] = find_fiber_witnesses(geo, s0.h, half_w(), 1);
  CHECK(w == cplx(0.0078125, 0.0));
  CHECK(wt == cplx(-0.0078125, 0.0));

  // low degree cap: the fit falls short but the stage is still measured
  stage_state s1 = build_stage(&s0, geo, half_w(), 1, 48, 24, 1, 0);
  CHECK(s1.k == 1);
  CHECK(s1.w == cplx(0.0078125, 0.0));
  CHECK(s1.w_tilde == cplx(-0.0078125, 0.0));
  CHECK(s1.center == cplx(4.015625, 0.0));
  CHECK(s1.center_tilde == cplx(3.984375, 0.0));
  CHECK(s1.A == cplx(-3616.0625, 0.0));
  CHECK(s1.A_tilde == cplx(4064.0625, 0.0));
  CHECK(s1.R == 0.012656250000000001);
  CHECK(s1.delta_stab == 0.03125);
  CHECK(s1.tolerance == 0.0078125); // 2^-2 * min(delta_stab ladder)

  REQUIRE(s1.fit.has_value());
  CHECK_FALSE(s1.fit->success);
  CHECK_FALSE(s1.fit->coeffs.empty());
  CHECK_FALSE(s1.all_ok);
  CHECK_FALSE(s1.note.empty());

  // pre-fit geometry properties hold; fit-dependent ones are flagged honestly
  const property_check* moduli = find_property(s1, "witness moduli");
  REQUIRE(moduli != nullptr);
  CHECK(moduli->ok);
  const property_check* disks = find_property(s1, "target disks inside");
  REQUIRE(disks != nullptr);
  CHECK(disks->ok);
  const property_check* osc = find_property(s1, "oscillation");
  REQUIRE(osc != nullptr);
  CHECK(osc->ok);
  const property_check* increment = find_property(s1, "increment");
  REQUIRE(increment != nullptr);
  CHECK_FALSE(increment->ok);
  CHECK(increment->measured > increment->bound);
  const property_check* escape_const = find_property(s1, "escape constant");
  REQUIRE(escape_const != nullptr);
  CHECK_FALSE(escape_const->ok);
  const property_check* capture = find_property(s1, "capture constant");
  REQUIRE(capture != nullptr);
  CHECK_FALSE(capture->ok);
}

TEST_CASE("the staged run reports honest completion and a measured dichotomy") {
  construction_result res =
      run_construction(quad(), half_w(), cplx(2.0, 0.0), 64, 2, 48, 0.5, 6, 1, 0);
  CHECK(res.completed == 1); // stage 0 only; stage 1 cannot meet tolerance at degree 48
  CHECK_FALSE(res.fully_ok);
  CHECK(res.summary.find("completed 1 of 3") != std::string::npos);
  REQUIRE(res.stages.size() == 2);
  CHECK(res.stages[0].all_ok);
  CHECK_FALSE(res.stages[1].all_ok);

  // the best-effort stage is still assembled and its dichotomy measured
  REQUIRE(res.assembled.has_value());
  REQUIRE(res.dichotomy.has_value());
  REQUIRE(res.dichotomy->rows.size() >= 2);
  const dichotomy_row& r0 = res.dichotomy->rows[0];
  CHECK_FALSE(r0.asserted); // the k = 0 row carries no bound claim
  CHECK(r0.fiber_exact);
  const dichotomy_row& r1 = res.dichotomy->rows[1];
  CHECK(r1.asserted);
  CHECK(r1.fiber_exact);
  CHECK(is_finite(r1.v));
  CHECK(is_finite(r1.v_tilde));
  CHECK(r1.g_small); // the g-orbit bound never depends on the fit
  // the unreachable tolerance shows up as a missed funnel target, reported as-is
  CHECK_FALSE(r1.in_target);

  REQUIRE(!res.assembled->telescope.empty());
  const telescope_row& t0 = res.assembled->telescope[0];
  CHECK(t0.sup > t0.bound); // honest: the stage-1 increment exceeds its budget
  CHECK_FALSE(t0.ok);
}

} // TEST_SUITE
