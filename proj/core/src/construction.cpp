#include "skewfatou/construction.hpp"

#include "skewfatou/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace skewfatou {

namespace {

cplx unit_angle(std::size_t t, std::size_t n) {
  double a = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
  return cplx(std::cos(a), std::sin(a));
}

cplx project_after(const skew_product& F, cplx z0, cplx w0, std::size_t steps) {
  cplx z = z0, w = w0;
  for (std::size_t j = 0; j < steps; ++j) {
    auto [zn, wn] = F.step(z, w);
    z = zn;
    w = wn;
  }
  return z;
}

// max |a - b| over 2048 boundary and 512 interior samples of the disk
double sampled_sup_diff(const fn& a, const fn& b, const disk& d, std::uint64_t seed,
                        std::uint64_t stream) {
  double m = 0.0;
  for (std::size_t t = 0; t < 2048; ++t) {
    cplx x = d.center + d.radius * unit_angle(t, 2048);
    m = std::max(m, std::abs(eval_z(a, x) - eval_z(b, x)));
  }
  std::mt19937_64 rng = seeded_engine(seed, stream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t t = 0; t < 512; ++t) {
    double r = d.radius * std::sqrt(unit(rng));
    double ang = 2.0 * std::numbers::pi * unit(rng);
    cplx x = d.center + r * cplx(std::cos(ang), std::sin(ang));
    m = std::max(m, std::abs(eval_z(a, x) - eval_z(b, x)));
  }
  return m;
}

// diameter of f over 48 boundary points and the center
double sampled_oscillation(const fn& f, const disk& d) {
  std::vector<cplx> vals;
  vals.reserve(49);
  for (std::size_t t = 0; t < 48; ++t)
    vals.push_back(eval_z(f, d.center + d.radius * unit_angle(t, 48)));
  vals.push_back(eval_z(f, d.center));
  double m = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = i + 1; j < vals.size(); ++j)
      m = std::max(m, std::abs(vals[i] - vals[j]));
  return m;
}

} // namespace

cplx construction_geometry::z_at(int k) const {
  return orbit[n[static_cast<std::size_t>(k)]];
}

disk construction_geometry::target_disk(int k) const {
  return {z_at(k), delta_geom[static_cast<std::size_t>(k)]};
}

double construction_geometry::big_radius(int k) const {
  if (k < 1 || k > K) throw std::logic_error("big_radius: defined for 1 <= k <= K");
  return std::abs(z_at(k)) - 2.0 * delta_geom[static_cast<std::size_t>(k)];
}

construction_geometry build_geometry(const fn& f, cplx z0, std::int64_t window, int K,
                                     double theta) {
  if (!f) throw std::invalid_argument("geometry: f is required");
  if (f->uses_w) throw std::invalid_argument("geometry: f must depend on z only");
  if (K < 0) throw std::invalid_argument("geometry: K must be >= 0");
  if (window < K + 1) throw std::invalid_argument("geometry: window shorter than K+1");
  if (!(theta > 0.0) || !(theta < 1.0))
    throw std::invalid_argument("geometry: theta must lie in (0,1)");

  construction_geometry geo;
  geo.f = f;
  geo.z0 = z0;
  geo.theta = theta;
  geo.K = K;
  geo.orbit = fiber_orbit(f, z0, window);
  geo.n = select_escaping_subsequence(geo.orbit);
  std::size_t need = static_cast<std::size_t>(K) + 2;
  if (geo.n.size() < need)
    throw std::invalid_argument("geometry: escaping subsequence has length " +
                                std::to_string(geo.n.size()) + ", need " + std::to_string(need) +
                                "; enlarge the window or pick another start");

  for (int k = 0; k <= K; ++k) {
    double znk = std::abs(geo.z_at(k));
    double znext = std::abs(geo.orbit[geo.n[static_cast<std::size_t>(k) + 1]]);
    double bound;
    if (k == 0) {
      bound = std::min((znext - znk) / 4.0, 1.0);
    } else {
      double closest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < geo.n[static_cast<std::size_t>(k)]; ++j)
        closest = std::min(closest, (znk - std::abs(geo.orbit[j])) / 4.0);
      bound = std::min({closest, (znext - znk) / 4.0,
                        geo.delta_tilde[static_cast<std::size_t>(k) - 1] / 2.0});
    }
    if (!(bound > 0.0))
      throw std::runtime_error("geometry: radius ladder bound is not positive at stage " +
                               std::to_string(k));
    geo.delta_tilde.push_back(theta * bound);
    geo.delta_geom.push_back(theta * std::min(geo.delta_tilde.back(), 0.25));
  }

  double inf = std::numeric_limits<double>::infinity();
  geo.margin_disjoint_targets = inf;
  geo.margin_nesting = inf;
  geo.margin_contains = inf;
  geo.margin_separation = inf;
  geo.margin_orbit_interior = inf;

  for (int i = 0; i <= K; ++i)
    for (int j = i + 1; j <= K; ++j) {
      double gap = std::abs(geo.z_at(i) - geo.z_at(j)) -
                   geo.delta_geom[static_cast<std::size_t>(i)] -
                   geo.delta_geom[static_cast<std::size_t>(j)];
      geo.margin_disjoint_targets = std::min(geo.margin_disjoint_targets, gap);
    }
  for (int k = 1; k < K; ++k)
    geo.margin_nesting = std::min(geo.margin_nesting, geo.big_radius(k + 1) - geo.big_radius(k));
  for (int k = 1; k <= K; ++k) {
    double rH = geo.big_radius(k);
    for (int j = 0; j < k; ++j)
      geo.margin_contains = std::min(
          geo.margin_contains,
          rH - (std::abs(geo.z_at(j)) + geo.delta_geom[static_cast<std::size_t>(j)]));
    for (int j = k; j <= K; ++j)
      geo.margin_separation = std::min(
          geo.margin_separation,
          (std::abs(geo.z_at(j)) - geo.delta_geom[static_cast<std::size_t>(j)]) - rH);
    for (std::size_t j = 0; j < geo.n[static_cast<std::size_t>(k)]; ++j)
      geo.margin_orbit_interior =
          std::min(geo.margin_orbit_interior, rH - std::abs(geo.orbit[j]));
  }

  auto bad = [](double m) { return !(m > 0.0); };
  if (bad(geo.margin_disjoint_targets) || (K >= 2 && bad(geo.margin_nesting)) ||
      (K >= 1 && (bad(geo.margin_contains) || bad(geo.margin_separation) ||
                  bad(geo.margin_orbit_interior)))) {
    std::ostringstream os;
    os << "geometry: disk arrangement failed (margins: disjoint "
       << fmt_double(geo.margin_disjoint_targets) << ", nesting " << fmt_double(geo.margin_nesting)
       << ", contains " << fmt_double(geo.margin_contains) << ", separation "
       << fmt_double(geo.margin_separation) << ", orbit interior "
       << fmt_double(geo.margin_orbit_interior) << ")";
    throw std::runtime_error(os.str());
  }
  return geo;
}

std::pair<cplx, cplx> find_fiber_witnesses(const construction_geometry& geo, const fn& h_prev,
                                           const fn& g, int k) {
  if (k < 1 || k > geo.K) throw std::invalid_argument("witnesses: stage must satisfy 1 <= k <= K");
  if (!h_prev) throw std::invalid_argument("witnesses: h_prev is required");
  if (!g || g->node == function_expr::kind::constant)
    throw std::invalid_argument("witnesses: g must be nonconstant");

  skew_product F(geo.f, g, h_prev);
  std::size_t nk = geo.n[static_cast<std::size_t>(k)];
  double rH = geo.big_radius(k);
  double rD = geo.delta_geom[static_cast<std::size_t>(k)];
  cplx znk = geo.z_at(k);

  auto admissible = [&](cplx wc) -> std::optional<cplx> {
    if (!(std::abs(wc) < 1.0 / static_cast<double>(k))) return std::nullopt;
    cplx u = wc;
    for (std::size_t j = 0; j <= nk + 1; ++j) {
      if (!is_finite(u) || !(std::abs(u) < 1.0)) return std::nullopt;
      u = eval(g, cplx(0.0, 0.0), u);
    }
    cplx z = geo.z0, w = wc;
    for (std::size_t j = 0; j < nk; ++j) {
      if (!is_finite(z) || !(std::abs(z) < rH)) return std::nullopt;
      auto [zn, wn] = F.step(z, w);
      z = zn;
      w = wn;
    }
    if (!is_finite(z) || !(std::abs(z - znk) < rD)) return std::nullopt;
    return z;
  };

  double m = 0.25;
  while (m > 1e-300) {
    std::optional<cplx> c = admissible(cplx(m, 0.0));
    std::optional<cplx> ct = admissible(cplx(-m, 0.0));
    if (c && ct && std::abs(*c - *ct) > 1e-12 * std::max(1.0, std::abs(znk)))
      return {cplx(m, 0.0), cplx(-m, 0.0)};
    m *= 0.5;
  }
  throw std::runtime_error("witnesses: modulus underflowed before the stage-" + std::to_string(k) +
                           " conditions held; the projection no longer separates the two arguments");
}

double choose_radius(const construction_geometry& geo, cplx center, cplx center_tilde, int k) {
  double rD = geo.delta_geom[static_cast<std::size_t>(k)];
  cplx znk = geo.z_at(k);
  double off = std::abs(center - znk), off_t = std::abs(center_tilde - znk);
  if (!(off < rD) || !(off_t < rD))
    throw std::invalid_argument("radius: centers must lie inside the stage target disk");
  double sep = std::abs(center - center_tilde);
  if (!(sep > 0.0)) throw std::invalid_argument("radius: centers must be distinct");

  double hi = std::min({1.0 / 3.0 * 0.995, rD - off, rD - off_t, 0.45 * sep});
  if (!(hi > 0.0)) throw std::runtime_error("radius: no positive radius fits the target disk");

  auto passes = [&](double R) {
    return sampled_oscillation(geo.f, {center, R}) < 1.0 / 3.0 &&
           sampled_oscillation(geo.f, {center_tilde, R}) < 1.0 / 3.0;
  };
  double R;
  if (passes(hi)) {
    R = hi;
  } else {
    double lo = 0.0, cur = hi;
    for (int it = 0; it < 48; ++it) {
      cur = 0.5 * (lo + hi);
      if (passes(cur))
        lo = cur;
      else
        hi = cur;
    }
    R = lo;
  }
  R *= 0.9;
  if (!(R > 0.0)) throw std::runtime_error("radius: oscillation stayed above 1/3 at every radius");
  return R;
}

double estimate_stability_radius(const construction_geometry& geo, const fn& h_prev,
                                 const fn& g, int k, double Rk, cplx w, cplx w_tilde,
                                 int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("stability: trials must be >= 1");
  std::size_t nk = geo.n[static_cast<std::size_t>(k)];
  double rH = geo.big_radius(k);
  skew_product F(geo.f, g, h_prev);
  cplx c = project_after(F, geo.z0, w, nk);
  cplx ct = project_after(F, geo.z0, w_tilde, nk);

  double delta = geo.delta_geom[static_cast<std::size_t>(k)];
  while (delta > 1e-300) {
    bool all_ok = true;
    for (int t = 0; t < trials && all_ok; ++t) {
      std::mt19937_64 rng = seeded_engine(seed, static_cast<std::uint64_t>(k) * 1009 +
                                                    static_cast<std::uint64_t>(t));
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::vector<cplx> coeffs(11);
      for (cplx& a : coeffs) a = cplx(gauss(rng), gauss(rng));
      double sup = 0.0;
      for (std::size_t s = 0; s < 256; ++s) {
        cplx u = unit_angle(s, 256); // boundary of H_k in the scaled variable
        cplx acc(0.0, 0.0);
        for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * u + coeffs[j];
        sup = std::max(sup, std::abs(acc));
      }
      if (!(sup > 0.0)) continue;
      for (cplx& a : coeffs) a *= delta / sup;
      fn q = polynomial(coeffs, var_kind::z, cplx(0.0, 0.0), cplx(rH, 0.0));
      skew_product Fp(geo.f, g, add(h_prev, q));
      cplx pc = project_after(Fp, geo.z0, w, nk);
      cplx pct = project_after(Fp, geo.z0, w_tilde, nk);
      if (!is_finite(pc) || !is_finite(pct) || !(std::abs(pc - c) < 0.5 * Rk) ||
          !(std::abs(pct - ct) < 0.5 * Rk))
        all_ok = false;
    }
    if (all_ok) return delta;
    delta *= 0.5;
  }
  throw std::runtime_error("stability: radius underflowed at stage " + std::to_string(k));
}

stage_state build_stage(const stage_state* prev, const construction_geometry& geo, const fn& g,
                        int k, int max_degree, int trials, std::uint64_t seed, unsigned threads) {
  stage_state st;
  st.k = k;

  if (k == 0) {
    st.h = var_z();
    st.R = st.delta_stab = st.min_delta_stab = geo.delta_geom[0];
    st.tolerance = 0.0;
    double m = 0.5;
    std::size_t horizon = geo.n[0] + 1;
    auto funnel_max = [&](cplx wc) {
      double worst = 0.0;
      cplx u = wc;
      for (std::size_t j = 0; j <= horizon; ++j) {
        worst = std::max(worst, std::abs(u));
        u = eval(g, cplx(0.0, 0.0), u);
      }
      return worst;
    };
    while (m > 1e-300 && !(funnel_max(cplx(m, 0.0)) < 1.0 && funnel_max(cplx(-m, 0.0)) < 1.0))
      m *= 0.5;
    if (!(m > 1e-300)) throw std::runtime_error("stage 0: no unit-funnel witness modulus found");
    st.w = cplx(m, 0.0);
    st.w_tilde = cplx(-m, 0.0);
    st.center = st.center_tilde = geo.z0;
    property_check funnel{"fiber funnel stays in the unit disk",
                          true,
                          std::max(funnel_max(st.w), funnel_max(st.w_tilde)),
                          1.0};
    funnel.ok = funnel.measured < funnel.bound;
    st.properties.push_back(funnel);
    st.all_ok = funnel.ok;
    st.note = "identity stage: no fit, target-disk checks start at stage 1";
    return st;
  }

  if (!prev) throw std::invalid_argument("stage: previous stage state required for k >= 1");
  const fn& h_prev = prev->h;
  std::size_t nk = geo.n[static_cast<std::size_t>(k)];
  double rH = geo.big_radius(k);

  auto [w, wt] = find_fiber_witnesses(geo, h_prev, g, k);
  st.w = w;
  st.w_tilde = wt;

  skew_product F(geo.f, g, h_prev);
  st.center = project_after(F, geo.z0, w, nk);
  st.center_tilde = project_after(F, geo.z0, wt, nk);

  st.R = choose_radius(geo, st.center, st.center_tilde, k);
  st.delta_stab =
      estimate_stability_radius(geo, h_prev, g, k, st.R, w, wt, trials, seed + 101);
  st.min_delta_stab = std::min(prev->min_delta_stab, st.delta_stab);
  st.tolerance = std::ldexp(st.min_delta_stab, -(k + 1));

  cplx gw = w, gwt = wt;
  for (std::size_t j = 0; j < nk; ++j) {
    gw = eval(g, cplx(0.0, 0.0), gw);
    gwt = eval(g, cplx(0.0, 0.0), gwt);
  }
  if (!(std::abs(gw) > 0.0) || !(std::abs(gwt) > 0.0))
    throw std::runtime_error("stage " + std::to_string(k) +
                             ": the fiber funnel hit 0, the target constants are undefined");
  st.A = -(eval_z(geo.f, st.center) - cplx(static_cast<double>(k) + 1.0, 0.0)) / gw;
  st.A_tilde = -eval_z(geo.f, st.center_tilde) / gwt;

  // Properties checkable before the fit.
  {
    property_check p{"witness moduli below 1/k", false, std::max(std::abs(w), std::abs(wt)),
                     1.0 / static_cast<double>(k)};
    p.ok = p.measured < p.bound;
    st.properties.push_back(p);

    double worst = 0.0;
    for (cplx u : {w, wt}) {
      cplx v = u;
      for (std::size_t j = 0; j <= nk + 1; ++j) {
        worst = std::max(worst, std::abs(v));
        v = eval(g, cplx(0.0, 0.0), v);
      }
    }
    property_check p2{"fiber funnel stays in the unit disk", false, worst, 1.0};
    p2.ok = p2.measured < p2.bound;
    st.properties.push_back(p2);

    double rD = geo.delta_geom[static_cast<std::size_t>(k)];
    cplx znk = geo.z_at(k);
    double margin = std::min({rD - (std::abs(st.center - znk) + st.R),
                              rD - (std::abs(st.center_tilde - znk) + st.R),
                              std::abs(st.center - st.center_tilde) - 2.0 * st.R});
    property_check p3{"target disks inside the stage disk and disjoint (margin)", false, margin,
                      0.0};
    p3.ok = margin > 0.0;
    st.properties.push_back(p3);

    double osc = std::max(sampled_oscillation(geo.f, {st.center, st.R}),
                          sampled_oscillation(geo.f, {st.center_tilde, st.R}));
    property_check p4{"oscillation of f on each target disk below 1/3", false, osc, 1.0 / 3.0};
    p4.ok = osc < p4.bound;
    st.properties.push_back(p4);
  }

  approx_problem prob;
  prob.pieces = {{disk{cplx(0.0, 0.0), rH}, h_prev},
                 {disk{st.center, st.R}, constant(st.A)},
                 {disk{st.center_tilde, st.R}, constant(st.A_tilde)}};
  prob.tolerance = st.tolerance;
  prob.max_degree = max_degree;
  prob.samples_per_disk = 4096;
  prob.seed = seed + static_cast<std::uint64_t>(k);
  prob.threads = threads;
  st.fit = fit_piecewise(prob);
  if (!st.fit->note.empty()) st.note = st.fit->note;
  if (st.fit->coeffs.empty()) {
    // Nothing usable came back; the stage cannot be measured.
    st.all_ok = false;
    return st;
  }
  // A tolerance shortfall still builds the stage from the best polynomial the
  // ladder reached; the property checks below then record honest margins.
  st.h = st.fit->to_expr();

  {
    double sup = sampled_sup_diff(st.h, h_prev, {cplx(0.0, 0.0), rH}, seed, 7000 + k);
    property_check p{"increment below the stage tolerance on the big disk", false, sup,
                     st.tolerance};
    p.ok = sup < st.tolerance;
    st.properties.push_back(p);

    double supA = sampled_sup_diff(st.h, constant(st.A), {st.center, st.R}, seed, 7100 + k);
    property_check p2{"fit matches the escape constant on the target disk", false, supA,
                      1.0 / 3.0};
    p2.ok = supA < p2.bound;
    st.properties.push_back(p2);

    double supB = sampled_sup_diff(st.h, constant(st.A_tilde), {st.center_tilde, st.R},
                                   seed, 7200 + k);
    property_check p3{"fit matches the capture constant on the second disk", false, supB,
                      1.0 / 3.0};
    p3.ok = supB < p3.bound;
    st.properties.push_back(p3);

    skew_product Fk(geo.f, g, st.h);
    double moved = std::max(std::abs(project_after(Fk, geo.z0, w, nk) - st.center),
                            std::abs(project_after(Fk, geo.z0, wt, nk) - st.center_tilde));
    property_check p4{"fitted map keeps the witness projections within R/2", false, moved,
                      0.5 * st.R};
    p4.ok = moved < p4.bound;
    st.properties.push_back(p4);
  }

  st.all_ok = true;
  for (const property_check& p : st.properties) st.all_ok = st.all_ok && p.ok;
  return st;
}

assembled_perturbation assemble_h(const std::vector<stage_state>& stages,
                                  const construction_geometry& geo, std::uint64_t seed) {
  if (stages.empty()) throw std::invalid_argument("assemble: at least one completed stage");
  assembled_perturbation out;
  out.K = stages.back().k;
  out.h = stages.back().h;
  out.ok = true;
  for (std::size_t k = 0; k + 1 < stages.size(); ++k) {
    telescope_row row;
    row.k = static_cast<int>(k);
    disk Hk1{cplx(0.0, 0.0), geo.big_radius(static_cast<int>(k) + 1)};
    row.sup = sampled_sup_diff(out.h, stages[k].h, Hk1, seed, 9000 + k);
    row.bound = stages[k + 1].delta_stab;
    row.ok = row.sup < row.bound;
    out.ok = out.ok && row.ok;
    out.telescope.push_back(row);
  }
  return out;
}

dichotomy_outcome dichotomy_check(const assembled_perturbation& assembled,
                                  const construction_geometry& geo,
                                  const std::vector<stage_state>& stages, const fn& g) {
  dichotomy_outcome out;
  out.all_asserted_ok = true;
  skew_product F(geo.f, g, assembled.h);
  for (const stage_state& st : stages) {
    std::size_t nk = geo.n[static_cast<std::size_t>(st.k)];
    dichotomy_row row;
    row.k = st.k;
    row.asserted = st.k >= 1;
    row.v = project_after(F, geo.z0, st.w, nk + 1);
    row.v_tilde = project_after(F, geo.z0, st.w_tilde, nk + 1);
    cplx u = st.w, ut = st.w_tilde;
    for (std::size_t j = 0; j <= nk; ++j) {
      u = eval(g, cplx(0.0, 0.0), u);
      ut = eval(g, cplx(0.0, 0.0), ut);
    }
    row.g_abs = std::abs(u);
    row.g_tilde_abs = std::abs(ut);
    row.in_target = std::abs(row.v - cplx(static_cast<double>(st.k) + 1.0, 0.0)) < 1.0;
    row.tilde_small = std::abs(row.v_tilde) < 1.0;
    row.g_small = row.g_abs < 1.0 && row.g_tilde_abs < 1.0;
    row.fiber_value = project_after(F, geo.z0, cplx(0.0, 0.0), nk);
    cplx expect = geo.z_at(st.k);
    row.fiber_exact =
        row.fiber_value.real() == expect.real() && row.fiber_value.imag() == expect.imag();
    if (row.asserted)
      out.all_asserted_ok =
          out.all_asserted_ok && row.in_target && row.tilde_small && row.g_small && row.fiber_exact;
    out.rows.push_back(row);
  }
  return out;
}

construction_result run_construction(const fn& f, const fn& g, cplx z0, std::int64_t window,
                                     int K, int max_degree, double theta, int trials,
                                     std::uint64_t seed, unsigned threads) {
  construction_result res;
  res.geometry = build_geometry(f, z0, window, K, theta);

  // A stage is built when it yields a usable h (stage 0 always; later stages
  // whenever the fit exported coefficients). It is completed only when the fit
  // met tolerance. The run stops after the first shortfall so later stages do
  // not compound on a degraded h, but the shortfall stage itself is still
  // measured, assembled, and pushed through the dichotomy check.
  std::vector<stage_state> built;
  for (int k = 0; k <= K; ++k) {
    const stage_state* prev = built.empty() ? nullptr : &built.back();
    stage_state st = build_stage(prev, res.geometry, g, k, max_degree, trials, seed, threads);
    bool usable = k == 0 || (st.fit && !st.fit->coeffs.empty());
    bool met = k == 0 || (st.fit && st.fit->success);
    res.stages.push_back(st);
    if (!usable) break;
    built.push_back(res.stages.back());
    if (met) ++res.completed;
    if (!met) break;
  }

  if (!built.empty()) {
    res.assembled = assemble_h(built, res.geometry, seed + 77);
    res.dichotomy = dichotomy_check(*res.assembled, res.geometry, built, g);
  }

  bool stages_ok = res.completed == K + 1;
  for (const stage_state& st : res.stages) stages_ok = stages_ok && st.all_ok;
  res.fully_ok = stages_ok && res.assembled && res.assembled->ok && res.dichotomy &&
                 res.dichotomy->all_asserted_ok;

  std::ostringstream os;
  os << "completed " << res.completed << " of " << (K + 1) << " stages";
  if (!res.stages.empty() && !res.stages.back().note.empty() && res.completed <= K)
    os << "; stage " << res.stages.back().k << ": " << res.stages.back().note;
  res.summary = os.str();
  return res;
}

} // namespace skewfatou
