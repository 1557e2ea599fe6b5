#include "skewfatou/experiment.hpp"

#include "skewfatou/construction.hpp"
#include "skewfatou/criteria.hpp"
#include "skewfatou/gallery.hpp"
#include "skewfatou/orbit.hpp"
#include "skewfatou/parallel.hpp"
#include "skewfatou/probe.hpp"
#include "skewfatou/render.hpp"
#include "skewfatou/report.hpp"
#include "skewfatou/util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace skewfatou {

namespace {

const std::array<const char*, 9> kind_names = {"orbit",      "classify-grid", "quad-family",
                                               "baker-bulge", "runge-build",  "series-test",
                                               "order",       "certify",      "render"};

std::string trim(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && sp(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && sp(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::invalid_argument(what + " must be an unsigned integer, got '" + s + "'");
  return v;
}

std::int64_t parse_i64(const std::string& s, const std::string& what) {
  std::int64_t v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::invalid_argument(what + " must be an integer, got '" + s + "'");
  return v;
}

// "re" or "re,im"
cplx parse_cplx_text(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) return cplx(parse_double(trim(s)), 0.0);
  return cplx(parse_double(trim(s.substr(0, comma))), parse_double(trim(s.substr(comma + 1))));
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string piece =
        comma == std::string::npos ? s.substr(pos) : s.substr(pos, comma - pos);
    out.push_back(parse_double(trim(piece)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void ensure_keys(const experiment_config& cfg, std::initializer_list<const char*> fns,
                 std::initializer_list<const char*> pars) {
  auto in = [](std::initializer_list<const char*> list, const std::string& k) {
    return std::any_of(list.begin(), list.end(), [&](const char* e) { return k == e; });
  };
  for (const auto& [k, v] : cfg.functions)
    if (!in(fns, k))
      throw std::invalid_argument("config: function slot '" + k + "' is not used by kind '" +
                                  cfg.kind + "'");
  for (const auto& [k, v] : cfg.params)
    if (!in(pars, k))
      throw std::invalid_argument("config: parameter '" + k + "' is not used by kind '" +
                                  cfg.kind + "'");
}

fn need_fn(const experiment_config& cfg, const std::string& name, var_kind poly_var) {
  if (!cfg.has_function(name))
    throw std::invalid_argument("config: kind '" + cfg.kind + "' needs function " + name);
  return parse_expr(cfg.function_text(name), poly_var);
}

fn fn_or(const experiment_config& cfg, const std::string& name, var_kind poly_var,
         const std::string& fallback) {
  return parse_expr(cfg.has_function(name) ? cfg.function_text(name) : fallback, poly_var);
}

std::string rec_csv(const orbit_record& rec) {
  std::vector<orbit_entry_row> rows;
  rows.reserve(rec.points.size());
  for (const orbit_point& p : rec.points) rows.push_back({p.k, p.z, p.w});
  return orbit_csv(rows);
}

const char* term_name(orbit_termination t) {
  switch (t) {
    case orbit_termination::completed: return "completed";
    case orbit_termination::escaped: return "escaped";
    default: return "overflowed";
  }
}

const char* class_name(orbit_class c) {
  switch (c) {
    case orbit_class::escaping: return "escaping";
    case orbit_class::bounded: return "bounded";
    case orbit_class::oscillating: return "oscillating";
    default: return "undetermined";
  }
}

const char* verdict_name(series_verdict v) {
  switch (v) {
    case series_verdict::converged: return "converged";
    case series_verdict::diverging: return "diverging";
    default: return "inconclusive";
  }
}

void note_artifact(run_status& st, const std::string& name) { st.artifacts.push_back(name); }

void write_artifact(const std::filesystem::path& dir, const std::string& name,
                    const std::string& text, run_status& st) {
  write_text(dir / name, text);
  note_artifact(st, name);
}

// ---- commands ----

void cmd_orbit(const experiment_config& cfg, const std::filesystem::path& dir, report& rep,
               run_status& st) {
  ensure_keys(cfg, {"f", "g", "h"}, {"z0", "w0", "steps", "escape"});
  skew_product F(need_fn(cfg, "f", var_kind::z), need_fn(cfg, "g", var_kind::w),
                 need_fn(cfg, "h", var_kind::z));
  cplx z0 = parse_cplx_text(cfg.param_or("z0", "0"));
  cplx w0 = parse_cplx_text(cfg.param_or("w0", "0"));
  std::int64_t steps = cfg.param_int("steps", 100);
  if (steps < 0 || steps > 10000000)
    throw std::invalid_argument("orbit: steps out of range 0..1e7");
  std::optional<double> esc;
  if (cfg.has_param("escape")) esc = parse_double(cfg.param("escape"));

  orbit_record rec = iterate(F, z0, w0, steps, esc);
  write_artifact(dir, "orbit_0.csv", rec_csv(rec), st);

  rep.section("orbit");
  rep.kv("start z", z0);
  rep.kv("start w", w0);
  rep.kv("steps requested", steps);
  rep.kv("termination", term_name(rec.termination));
  rep.kv("last step", rec.last_step);
  rep.kv("max |z|", rec.max_abs_z());
  if (rec.escape_step) rep.kv("escape step", *rec.escape_step);

  orbit_classification cls = classify_orbit(rec);
  rep.section("classification");
  rep.kv("label", class_name(cls.label));
  if (!cls.note.empty()) rep.kv("note", cls.note);
}

void cmd_classify_grid(const experiment_config& cfg, const std::filesystem::path& dir,
                       report& rep, run_status& st) {
  (void)dir;
  (void)st;
  ensure_keys(cfg, {"f", "g", "h"},
              {"center", "radius", "n", "w0", "steps", "escape-radius", "bound", "tail"});
  skew_product F(need_fn(cfg, "f", var_kind::z), need_fn(cfg, "g", var_kind::w),
                 need_fn(cfg, "h", var_kind::z));
  cplx center = parse_cplx_text(cfg.param_or("center", "0"));
  double radius = cfg.param_double("radius", 2.0);
  std::int64_t n = cfg.param_int("n", 16);
  cplx w0 = parse_cplx_text(cfg.param_or("w0", "0"));
  std::int64_t steps = cfg.param_int("steps", 200);
  double R = cfg.param_double("escape-radius", 1e6);
  double B = cfg.param_double("bound", 1e3);
  std::int64_t tail = cfg.param_int("tail", 5);
  if (n < 1 || n > 256) throw std::invalid_argument("classify-grid: n out of range 1..256");
  if (!(radius > 0.0)) throw std::invalid_argument("classify-grid: radius must be positive");
  if (steps < 1 || steps > 1000000)
    throw std::invalid_argument("classify-grid: steps out of range 1..1e6");

  std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  std::vector<orbit_classification> cells(total);
  std::vector<cplx> starts(total);
  double step = 2.0 * radius / static_cast<double>(n);
  for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j)
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      double x = center.real() - radius + (static_cast<double>(i) + 0.5) * step;
      double y = center.imag() + radius - (static_cast<double>(j) + 0.5) * step;
      starts[j * static_cast<std::size_t>(n) + i] = cplx(x, y);
    }
  parallel_for(total, cfg.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      orbit_record rec = iterate(F, starts[idx], w0, steps, R * 2.0);
      cells[idx] = classify_orbit(rec, R, B, static_cast<int>(tail));
    }
  });

  std::size_t counts[4] = {0, 0, 0, 0};
  for (const orbit_classification& c : cells) counts[static_cast<std::size_t>(c.label)]++;
  rep.section("grid");
  rep.kv("center", center);
  rep.kv("radius", radius);
  rep.kv("cells per side", n);
  rep.kv("fiber w0", w0);
  rep.section("counts");
  rep.kv("escaping", static_cast<std::int64_t>(counts[0]));
  rep.kv("bounded", static_cast<std::int64_t>(counts[1]));
  rep.kv("oscillating", static_cast<std::int64_t>(counts[2]));
  rep.kv("undetermined", static_cast<std::int64_t>(counts[3]));
  rep.section("cells");
  rep.line("i j re_z im_z label max_abs_z");
  for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j)
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      std::size_t idx = j * static_cast<std::size_t>(n) + i;
      rep.line(std::to_string(i) + " " + std::to_string(j) + " " +
               fmt_double(starts[idx].real()) + " " + fmt_double(starts[idx].imag()) + " " +
               class_name(cells[idx].label) + " " + fmt_double(cells[idx].max_abs_z));
    }
}

void cmd_quad_family(const experiment_config& cfg, const std::filesystem::path& dir, report& rep,
                  run_status& st) {
  ensure_keys(cfg, {}, {"lambda", "x0", "delta", "tolerance"});
  double lambda = cfg.param_double("lambda", 0.5);
  double x0 = cfg.param_double("x0", 5.0);
  double delta = cfg.param_double("delta", 0.01);
  double tol = cfg.param_double("tolerance", 1e-15);

  poly_example ex = make_poly_example(lambda, x0, delta);
  sign_flip_report sf = example_sign_flip(ex);
  bisect_result bi = example_bisect_bounded(ex, tol);

  rep.section("example");
  rep.kv("lambda", lambda);
  rep.kv("x0", x0);
  rep.kv("delta", delta);
  rep.kv("N", static_cast<std::int64_t>(ex.N));
  rep.kv("n0", static_cast<std::int64_t>(ex.n0));
  rep.kv("y0", ex.y0);

  rep.section("sign flip");
  rep.line("k x_k y_k");
  for (std::size_t k = 0; k < sf.xs.size(); ++k)
    rep.line(std::to_string(k) + " " + fmt_double(sf.xs[k]) + " " + fmt_double(sf.ys[k]));
  rep.kv("iterates positive before the flip", sf.positives_ok);
  rep.kv("final iterate nonpositive", sf.flip_ok);
  rep.kv("products x_k*y_k stay below 1-lambda", sf.products_ok);
  rep.kv("orbit stays real", sf.all_real);

  rep.section("bisection");
  rep.kv("y_tilde", bi.y_tilde);
  rep.kv("bracket width", bi.bracket_width);
  rep.kv("halvings", static_cast<std::int64_t>(bi.steps));
  rep.kv("x after flip step", bi.x_after);
  rep.kv("bound cap", bi.bound_cap);
  rep.kv("orbit max", bi.orbit_max);
  rep.kv("bounded for 200 steps", bi.bounded);

  if (!sf.positives_ok) st.failures.push_back("a pre-flip iterate was not positive");
  if (!sf.flip_ok) st.failures.push_back("the flip-step iterate stayed positive");
  if (!sf.products_ok) st.failures.push_back("a product x_k*y_k reached 1-lambda early");
  if (!sf.all_real) st.failures.push_back("the real slice left the real line");
  if (!bi.bounded) st.failures.push_back("the bounded-side orbit exceeded its cap");
  if (!(bi.bracket_width <= tol))
    st.failures.push_back("bisection bracket wider than " + fmt_double(tol));

  std::vector<orbit_entry_row> flip_rows;
  for (std::size_t k = 0; k < sf.xs.size(); ++k)
    flip_rows.push_back({static_cast<std::int64_t>(k), cplx(sf.xs[k], 0.0), cplx(sf.ys[k], 0.0)});
  write_artifact(dir, "orbit_flip.csv", orbit_csv(flip_rows), st);

  orbit_record bounded = iterate(ex.map, cplx(x0, 0.0), cplx(bi.y_tilde, 0.0), 200);
  write_artifact(dir, "orbit_bounded.csv", rec_csv(bounded), st);
}

void cmd_baker_bulge(const experiment_config& cfg, const std::filesystem::path& dir, report& rep,
                     run_status& st) {
  ensure_keys(cfg, {"g", "h", "p"},
              {"T", "guess", "z0", "w0", "delta", "steps", "grid", "z-center", "z-radius",
               "w-radius"});
  baker_family fam =
      cfg.has_function("p")
          ? make_baker_family(parse_cplx_text(cfg.param_or("T", "0,6.2831853071795865")),
                              parse_expr(cfg.function_text("p"), var_kind::z),
                              parse_cplx_text(cfg.param_or("guess", "0")))
          : default_baker();
  fn g = fn_or(cfg, "g", var_kind::w, "poly(0,0.5)");
  fn h = fn_or(cfg, "h", var_kind::z, "poly(1)");
  skew_product F(fam.f, g, h);

  cplx z0 = parse_cplx_text(cfg.param_or("z0", "0.1"));
  cplx w0 = parse_cplx_text(cfg.param_or("w0", "0.01"));
  double delta = cfg.param_double("delta", 0.5);
  std::int64_t steps = cfg.param_int("steps", 50);
  if (steps < 1 || steps > 100000)
    throw std::invalid_argument("baker-bulge: steps out of range 1..1e5");

  rep.section("family");
  rep.kv("T", fam.T);
  rep.kv("fixed point", fam.fixed_point);
  rep.kv("fixed point defect", fam.fixed_point_defect);
  rep.kv("|b'| at the fixed point", fam.derivative_abs);
  rep.kv("periodicity defect", fam.periodicity_defect);

  shadowing_report sh = shadowing_check(F, z0, w0, delta, fam.T, static_cast<int>(steps));
  rep.section("shadowing");
  rep.kv("start z", z0);
  rep.kv("start w", w0);
  rep.kv("delta", delta);
  rep.kv("tube index l", sh.l);
  rep.line("k e_k increment bound");
  for (std::size_t k = 0; k < sh.e.size(); ++k)
    rep.line(std::to_string(k) + " " + fmt_double(sh.e[k]) + " " +
             (k < sh.increments.size() ? fmt_double(sh.increments[k]) : "-") + " " +
             fmt_double(sh.bounds[k]));
  rep.kv("errors stay below delta", sh.within_delta);
  rep.kv("errors stay below the inductive bounds", sh.induction_ok);
  rep.kv("per-step increment inequality", sh.chain_ok);
  rep.kv("inductive bounds stay below delta", sh.sum_bound_ok);
  rep.kv("fiber coordinate stays enveloped", sh.w_enveloped);
  rep.kv("final |w|", sh.w_final_abs);
  if (!sh.note.empty()) rep.kv("note", sh.note);

  if (!sh.within_delta) st.failures.push_back("orbit left the delta tube");
  if (!sh.induction_ok) st.failures.push_back("an error exceeded its inductive bound");
  if (!sh.chain_ok) st.failures.push_back("the per-step increment inequality failed");
  if (!sh.sum_bound_ok) st.failures.push_back("the summed increments reached delta");
  if (!sh.w_enveloped) st.failures.push_back("the fiber coordinate left its envelope");

  orbit_record rec = iterate(F, z0, w0, steps);
  write_artifact(dir, "orbit_0.csv", rec_csv(rec), st);

  if (cfg.param_int("grid", 1) != 0) {
    cplx zc = parse_cplx_text(cfg.param_or("z-center", "0.1"));
    double zr = cfg.param_double("z-radius", 0.2);
    double wr = cfg.param_double("w-radius", 0.01);
    bulging_report br = bulging_probe(fam, g, h, zc, zr, wr, delta, steps, cfg.threads);
    rep.section("bulging probe");
    rep.kv("z center", zc);
    rep.kv("z radius", zr);
    rep.kv("w radius", wr);
    rep.line("sample re_z im_z re_w im_w l max_err final_|w| shadows");
    for (std::size_t s = 0; s < br.samples.size(); ++s) {
      const bulge_sample& smp = br.samples[s];
      rep.line(std::to_string(s) + " " + fmt_double(smp.z_start.real()) + " " +
               fmt_double(smp.z_start.imag()) + " " + fmt_double(smp.w_start.real()) + " " +
               fmt_double(smp.w_start.imag()) + " " + std::to_string(smp.l) + " " +
               fmt_double(smp.max_err) + " " + fmt_double(smp.w_final_abs) + " " +
               (smp.shadows ? "yes" : "no"));
    }
    rep.kv("verdict", br.verdict);
    if (br.verdict != "uniform-shadowing")
      st.failures.push_back("bulging probe verdict: " + br.verdict);
  }
}

void cmd_runge_build(const experiment_config& cfg, const std::filesystem::path& dir, report& rep,
                     run_status& st) {
  ensure_keys(cfg, {"f", "g"}, {"z0", "stages", "window", "theta", "max-degree", "trials"});
  fn f = need_fn(cfg, "f", var_kind::z);
  fn g = need_fn(cfg, "g", var_kind::w);
  cplx z0 = parse_cplx_text(cfg.param_or("z0", "2"));
  std::int64_t K = cfg.param_int("stages", 2);
  std::int64_t window = cfg.param_int("window", 64);
  double theta = cfg.param_double("theta", 0.5);
  std::int64_t maxdeg = cfg.param_int("max-degree", 1500);
  std::int64_t trials = cfg.param_int("trials", 24);
  if (K < 0 || K > 64) throw std::invalid_argument("runge-build: stages out of range 0..64");
  if (maxdeg < 1 || maxdeg > 20000)
    throw std::invalid_argument("runge-build: max-degree out of range 1..20000");

  construction_result res =
      run_construction(f, g, z0, window, static_cast<int>(K), static_cast<int>(maxdeg), theta,
                       static_cast<int>(trials), cfg.seed, cfg.threads);
  const construction_geometry& geo = res.geometry;

  rep.section("geometry");
  rep.kv("z0", geo.z0);
  rep.kv("theta", theta);
  rep.kv("stages", static_cast<std::int64_t>(geo.K) + 1);
  {
    std::string ns;
    for (std::size_t idx : geo.n) ns += (ns.empty() ? "" : " ") + std::to_string(idx);
    rep.kv("escape subsequence", ns);
  }
  rep.line("k n_k |z_{n_k}| delta_tilde delta");
  for (int k = 0; k <= geo.K; ++k)
    rep.line(std::to_string(k) + " " + std::to_string(geo.n[static_cast<std::size_t>(k)]) + " " +
             fmt_double(std::abs(geo.z_at(k))) + " " +
             fmt_double(geo.delta_tilde[static_cast<std::size_t>(k)]) + " " +
             fmt_double(geo.delta_geom[static_cast<std::size_t>(k)]));
  rep.kv("margin: targets pairwise disjoint", geo.margin_disjoint_targets);
  rep.kv("margin: big disks nested", geo.margin_nesting);
  rep.kv("margin: earlier targets contained", geo.margin_contains);
  rep.kv("margin: later targets separated", geo.margin_separation);
  rep.kv("margin: early orbit interior", geo.margin_orbit_interior);

  for (const stage_state& s : res.stages) {
    rep.section("stage " + std::to_string(s.k));
    rep.kv("w", s.w);
    rep.kv("w~", s.w_tilde);
    rep.kv("center", s.center);
    rep.kv("center~", s.center_tilde);
    if (s.k >= 1) {
      rep.kv("A", s.A);
      rep.kv("A~", s.A_tilde);
      rep.kv("R", s.R);
    }
    rep.kv("stability radius", s.delta_stab);
    rep.kv("tolerance", s.tolerance);
    if (s.fit) {
      rep.kv("fit success", s.fit->success);
      rep.kv("fit degree", static_cast<std::int64_t>(s.fit->degree_used));
      for (std::size_t i = 0; i < s.fit->errors.size(); ++i)
        rep.kv("fit piece " + std::to_string(i) + " error", s.fit->errors[i].achieved);
      std::string fname = "fit_" + std::to_string(s.k) + ".txt";
      report frep("stage " + std::to_string(s.k) + " polynomial fit");
      frep.kv("success", s.fit->success);
      frep.kv("degree", static_cast<std::int64_t>(s.fit->degree_used));
      frep.kv("requested tolerance", s.fit->requested_tolerance);
      frep.kv("grid per disk", static_cast<std::int64_t>(s.fit->grid_per_disk));
      frep.kv("min subdiagonal ratio", s.fit->min_subdiag_ratio);
      frep.kv("max reorthogonalization", s.fit->max_reorth);
      frep.kv("evaluation consistency", s.fit->eval_consistency);
      if (!s.fit->note.empty()) frep.kv("note", s.fit->note);
      for (std::size_t i = 0; i < s.fit->errors.size(); ++i) {
        frep.kv("piece " + std::to_string(i) + " achieved", s.fit->errors[i].achieved);
        frep.kv("piece " + std::to_string(i) + " met", s.fit->errors[i].met);
      }
      if (!s.fit->coeffs.empty()) {
        frep.kv("center", s.fit->center);
        frep.kv("scale", s.fit->scale);
        frep.section("coefficients");
        frep.line("j re im");
        for (std::size_t j = 0; j < s.fit->coeffs.size(); ++j)
          frep.line(std::to_string(j) + " " + fmt_double(s.fit->coeffs[j].real()) + " " +
                    fmt_double(s.fit->coeffs[j].imag()));
      }
      write_artifact(dir, fname, frep.str(), st);
    }
    for (const property_check& p : s.properties) {
      rep.line((p.ok ? "ok   " : "FAIL ") + p.what + ": measured " + fmt_double(p.measured) +
               ", bound " + fmt_double(p.bound));
      if (!p.ok)
        st.failures.push_back("stage " + std::to_string(s.k) + ": " + p.what + " (measured " +
                              fmt_double(p.measured) + ", bound " + fmt_double(p.bound) + ")");
    }
    if (!s.note.empty()) rep.kv("note", s.note);
    if (s.fit && !s.fit->success)
      st.failures.push_back("stage " + std::to_string(s.k) + ": fit did not meet tolerance");
  }

  if (res.assembled) {
    rep.section("telescoping");
    rep.line("k sup bound ok");
    for (const telescope_row& row : res.assembled->telescope) {
      rep.line(std::to_string(row.k) + " " + fmt_double(row.sup) + " " + fmt_double(row.bound) +
               " " + (row.ok ? "yes" : "no"));
      if (!row.ok)
        st.failures.push_back("telescoping bound failed at stage " + std::to_string(row.k));
    }
  }
  if (res.dichotomy) {
    rep.section("dichotomy");
    rep.line("k |v-(k+1)| |v~| |g-orbit| fiber-exact asserted");
    for (const dichotomy_row& row : res.dichotomy->rows) {
      rep.line(std::to_string(row.k) + " " +
               fmt_double(std::abs(row.v - cplx(static_cast<double>(row.k) + 1.0, 0.0))) + " " +
               fmt_double(std::abs(row.v_tilde)) + " " +
               fmt_double(std::max(row.g_abs, row.g_tilde_abs)) + " " +
               (row.fiber_exact ? "yes" : "no") + " " + (row.asserted ? "yes" : "no"));
      if (row.asserted && !(row.in_target && row.tilde_small && row.g_small && row.fiber_exact))
        st.failures.push_back("dichotomy failed at stage " + std::to_string(row.k));
    }
  }

  rep.section("summary");
  rep.kv("completed stages", static_cast<std::int64_t>(res.completed));
  rep.kv("all checks passed", res.fully_ok);
  rep.kv("summary", res.summary);
  if (res.completed < static_cast<int>(K) + 1)
    st.failures.push_back("construction stopped after " + std::to_string(res.completed) + " of " +
                          std::to_string(K + 1) + " stages");
}

void cmd_series_test(const experiment_config& cfg, const std::filesystem::path& dir, report& rep,
                     run_status& st) {
  (void)dir;
  ensure_keys(cfg, {"g", "h"}, {"frame", "probe", "t", "z0", "T", "delta", "terms", "expect"});
  fn g = need_fn(cfg, "g", var_kind::w);
  fn h = need_fn(cfg, "h", var_kind::z);
  std::string frame = cfg.param_or("frame", "geometric");
  double probe = cfg.param_double("probe", 0.25);
  cplx z0 = parse_cplx_text(cfg.param_or("z0", "0"));
  cplx T = parse_cplx_text(cfg.param_or("T", "1"));
  double delta = cfg.param_double("delta", 0.5);
  std::int64_t K = cfg.param_int("terms", 60);
  if (K < 1 || K > 10000) throw std::invalid_argument("series-test: terms out of range 1..1e4");

  rho_sequence rho;
  if (frame == "geometric")
    rho = derive_rho_geometric(g, probe, static_cast<int>(K));
  else if (frame == "superattracting")
    rho = derive_rho_superattracting(g, probe, cfg.param_double("t", 0.05), static_cast<int>(K));
  else
    throw std::invalid_argument("series-test: frame must be geometric or superattracting");

  series_report sr = series_test(h, rho, z0, T, delta, static_cast<int>(K));

  rep.section("envelope");
  rep.kv("frame", frame);
  if (rho.tag == rho_tag::geometric) {
    rep.kv("alpha", rho.alpha);
    rep.kv("delta_g", rho.delta_g);
  } else {
    rep.kv("C_g", rho.C_g);
    rep.kv("d", static_cast<std::int64_t>(rho.d));
    rep.kv("t", rho.t);
  }
  rep.kv("containment verified", rho.containment_verified);

  rep.section("series");
  rep.kv("constants", sr.constants);
  rep.line("k term partial_sum ratio");
  for (std::size_t k = 0; k < sr.terms.size(); ++k)
    rep.line(std::to_string(k) + " " + fmt_double(sr.terms[k]) + " " +
             fmt_double(sr.partial_sums[k]) + " " +
             (k >= 1 && k - 1 < sr.ratios.size() ? fmt_double(sr.ratios[k - 1]) : "-"));
  rep.kv("verdict", verdict_name(sr.verdict));
  if (sr.sum_estimate) rep.kv("sum estimate", *sr.sum_estimate);
  rep.kv("overflow", sr.overflow);

  if (!rho.containment_verified)
    st.failures.push_back("envelope containment could not be verified by sampling");
  if (cfg.has_param("expect")) {
    std::string want = cfg.param("expect");
    if (want != verdict_name(sr.verdict))
      st.failures.push_back("verdict " + std::string(verdict_name(sr.verdict)) + ", expected " +
                            want);
  }
}

void cmd_order(const experiment_config& cfg, const std::filesystem::path& dir, report& rep,
               run_status& st) {
  (void)dir;
  ensure_keys(cfg, {"h"}, {"r2", "expect-lo", "expect-hi"});
  fn h = need_fn(cfg, "h", var_kind::z);
  double r2 = cfg.param_double("r2", 1.0);
  order_estimate est = estimate_order(h, r2);

  rep.section("growth");
  rep.line("radius log_max loglog");
  for (std::size_t i = 0; i < est.radii.size(); ++i)
    rep.line(fmt_double(est.radii[i]) + " " + fmt_double(est.log_max[i]) + " " +
             fmt_double(est.loglog[i]));
  rep.kv("order estimate", est.rho1);
  if (est.diagonal) rep.kv("diagonal estimate", *est.diagonal);
  rep.kv("degenerate", est.degenerate);

  if (cfg.has_param("expect-lo") && !(est.rho1 >= parse_double(cfg.param("expect-lo"))))
    st.failures.push_back("order estimate below expect-lo");
  if (cfg.has_param("expect-hi") && !(est.rho1 <= parse_double(cfg.param("expect-hi"))))
    st.failures.push_back("order estimate above expect-hi");
}

void cmd_certify(const experiment_config& cfg, const std::filesystem::path& dir, report& rep,
                 run_status& st) {
  ensure_keys(cfg, {"f", "g", "h"},
              {"z0", "scales", "horizon", "escape-base", "bound", "shrink-max"});
  skew_product F(need_fn(cfg, "f", var_kind::z), need_fn(cfg, "g", var_kind::w),
                 need_fn(cfg, "h", var_kind::z));
  // default base point sits on the unit circle where both behaviors coexist
  cplx z0 = parse_cplx_text(cfg.param_or("z0", "1"));
  std::vector<double> scales = parse_double_list(cfg.param_or("scales", "0.5,0.25,0.125"));
  std::int64_t horizon = cfg.param_int("horizon", 200);
  double eb = cfg.param_double("escape-base", 10.0);
  double cap = cfg.param_double("bound", 1e3);
  std::int64_t smax = cfg.param_int("shrink-max", 40);

  non_normality_certificate cert = certify_non_normality(
      F, z0, scales, horizon, eb, cap, static_cast<int>(smax), cfg.threads);

  report crep("behavior certificate at the invariant fiber");
  crep.kv("base z", cert.base);
  crep.kv("horizon", cert.horizon);
  crep.kv("escape base", cert.escape_base);
  crep.kv("bound cap", cert.bound_cap);
  for (std::size_t j = 0; j < cert.scales.size(); ++j) {
    const scale_witnesses& sw = cert.scales[j];
    crep.section("scale " + fmt_double(sw.scale));
    crep.kv("escape target", sw.escape_target);
    if (sw.escape_w) {
      std::string csv = "orbit_escape_" + std::to_string(j) + ".csv";
      orbit_record rec = iterate(F, z0, *sw.escape_w, horizon);
      write_artifact(dir, csv, rec_csv(rec), st);
      crep.kv("escape w", *sw.escape_w);
      crep.kv("escape attained |z|", sw.escape_attained);
      crep.kv("escape step", static_cast<std::int64_t>(sw.escape_step));
      crep.kv("escape orbit", csv);
    } else {
      crep.kv("escape w", "none found");
    }
    if (sw.bounded_w) {
      std::string csv = "orbit_bounded_" + std::to_string(j) + ".csv";
      orbit_record rec = iterate(F, z0, *sw.bounded_w, horizon);
      write_artifact(dir, csv, rec_csv(rec), st);
      crep.kv("bounded w", *sw.bounded_w);
      crep.kv("bounded max", sw.bounded_max);
      crep.kv("bounded orbit", csv);
    } else {
      crep.kv("bounded w", "none found");
    }
    crep.kv("complete", sw.complete);
  }
  crep.kv("verdict", cert.verdict);
  write_artifact(dir, "certificate_0.txt", crep.str(), st);

  rep.section("certificate");
  rep.kv("scales", static_cast<std::int64_t>(cert.scales.size()));
  rep.kv("complete", cert.complete);
  rep.kv("verdict", cert.verdict);
  if (!cert.complete) st.failures.push_back(cert.verdict);
}

void cmd_render(const experiment_config& cfg, const std::filesystem::path& dir, report& rep,
                run_status& st) {
  ensure_keys(cfg, {"f", "g", "h"}, {"w-slice", "viewport", "size", "maxiter", "escape"});
  skew_product F(need_fn(cfg, "f", var_kind::z), fn_or(cfg, "g", var_kind::w, "poly(0)"),
                 fn_or(cfg, "h", var_kind::z, "poly(0)"));
  cplx w_slice = parse_cplx_text(cfg.param_or("w-slice", "0"));
  std::vector<double> vp = parse_double_list(cfg.param_or("viewport", "-2,-2,2,2"));
  if (vp.size() != 4)
    throw std::invalid_argument("render: viewport needs x0,y0,x1,y1");
  std::string size = cfg.param_or("size", "512x512");
  auto x = size.find('x');
  if (x == std::string::npos) throw std::invalid_argument("render: size must look like 512x512");
  std::int64_t width = parse_i64(trim(size.substr(0, x)), "render width");
  std::int64_t height = parse_i64(trim(size.substr(x + 1)), "render height");
  std::int64_t maxiter = cfg.param_int("maxiter", 100);
  double escape = cfg.param_double("escape", 4.0);

  escape_time_image img =
      render_slice(F, viewport{vp[0], vp[1], vp[2], vp[3]}, w_slice, static_cast<int>(width),
                   static_cast<int>(height), maxiter, escape, cfg.threads);

  std::ofstream out(dir / "image_0.pgm", std::ios::binary);
  if (!out) throw std::runtime_error("render: cannot open image_0.pgm for writing");
  write_pgm(img, out);
  out.close();
  note_artifact(st, "image_0.pgm");

  std::size_t interior = 0;
  for (std::int64_t s : img.steps)
    if (s == maxiter) ++interior;
  rep.section("image");
  rep.kv("width", width);
  rep.kv("height", height);
  rep.kv("w slice", w_slice);
  rep.kv("maxiter", maxiter);
  rep.kv("escape radius", escape);
  rep.kv("pixels at maxiter", static_cast<std::int64_t>(interior));
}

} // namespace

bool experiment_config::has_function(const std::string& name) const {
  for (const auto& [k, v] : functions)
    if (k == name) return true;
  return false;
}

const std::string& experiment_config::function_text(const std::string& name) const {
  for (const auto& [k, v] : functions)
    if (k == name) return v;
  throw std::invalid_argument("config: missing function '" + name + "'");
}

bool experiment_config::has_param(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return true;
  return false;
}

const std::string& experiment_config::param(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  throw std::invalid_argument("config: missing parameter '" + key + "'");
}

std::string experiment_config::param_or(const std::string& key, const std::string& dflt) const {
  return has_param(key) ? param(key) : dflt;
}

double experiment_config::param_double(const std::string& key, double dflt) const {
  if (!has_param(key)) return dflt;
  try {
    return parse_double(param(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config: parameter '" + key + "' is not a number: '" +
                                param(key) + "'");
  }
}

std::int64_t experiment_config::param_int(const std::string& key, std::int64_t dflt) const {
  if (!has_param(key)) return dflt;
  return parse_i64(param(key), "parameter '" + key + "'");
}

void experiment_config::set_function(const std::string& name, const std::string& text) {
  for (auto& [k, v] : functions)
    if (k == name) {
      v = text;
      return;
    }
  functions.emplace_back(name, text);
}

void experiment_config::set_param(const std::string& key, const std::string& value) {
  for (auto& [k, v] : params)
    if (k == key) {
      v = value;
      return;
    }
  params.emplace_back(key, value);
}

experiment_config parse_config(const std::string& text) {
  experiment_config cfg;
  enum class sec { none, experiment, functions, params } cur = sec::none;
  std::set<std::string> seen_exp;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "experiment")
        cur = sec::experiment;
      else if (name == "functions")
        cur = sec::functions;
      else if (name == "params")
        cur = sec::params;
      else
        fail("unknown section [" + name + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    switch (cur) {
      case sec::none:
        fail("key before any section");
        break;
      case sec::experiment:
        if (!seen_exp.insert(key).second) fail("duplicate key '" + key + "'");
        if (key == "kind")
          cfg.kind = value;
        else if (key == "seed")
          cfg.seed = parse_u64(value, "seed");
        else if (key == "threads") {
          std::uint64_t t = parse_u64(value, "threads");
          if (t > 1024) fail("threads out of range 0..1024");
          cfg.threads = static_cast<unsigned>(t);
        } else if (key == "out")
          cfg.out_dir = value;
        else
          fail("unknown experiment key '" + key + "'");
        break;
      case sec::functions:
        if (key != "f" && key != "g" && key != "h" && key != "p")
          fail("unknown function slot '" + key + "' (expected f, g, h, or p)");
        if (cfg.has_function(key)) fail("duplicate function '" + key + "'");
        cfg.functions.emplace_back(key, value);
        break;
      case sec::params:
        if (cfg.has_param(key)) fail("duplicate parameter '" + key + "'");
        cfg.params.emplace_back(key, value);
        break;
    }
  }
  if (std::find(kind_names.begin(), kind_names.end(), cfg.kind) == kind_names.end()) {
    std::string all;
    for (const char* k : kind_names) all += std::string(all.empty() ? "" : ", ") + k;
    throw std::invalid_argument("config: unknown kind '" + cfg.kind + "' (expected one of " +
                                all + ")");
  }
  return cfg;
}

std::string serialize_config(const experiment_config& cfg) {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "kind = " << cfg.kind << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "threads = " << cfg.threads << "\n";
  os << "out = " << cfg.out_dir << "\n";
  if (!cfg.functions.empty()) {
    os << "[functions]\n";
    for (const auto& [k, v] : cfg.functions) os << k << " = " << v << "\n";
  }
  if (!cfg.params.empty()) {
    os << "[params]\n";
    for (const auto& [k, v] : cfg.params) os << k << " = " << v << "\n";
  }
  return os.str();
}

run_status run(const experiment_config& cfg_in) {
  experiment_config cfg = cfg_in;
  if (const char* env = std::getenv("SKEWFATOU_SEED"))
    cfg.seed = parse_u64(env, "SKEWFATOU_SEED");

  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);

  report rep("skewfatou " + cfg.kind);
  rep.stamp_now();
  rep.section("config");
  rep.kv("kind", cfg.kind);
  rep.kv("seed", std::to_string(cfg.seed));
  rep.kv("threads", static_cast<std::int64_t>(cfg.threads));
  for (const auto& [k, v] : cfg.functions) rep.kv("function " + k, v);
  for (const auto& [k, v] : cfg.params) rep.kv("param " + k, v);

  run_status st;
  note_artifact(st, "report.txt");

  if (cfg.kind == "orbit")
    cmd_orbit(cfg, dir, rep, st);
  else if (cfg.kind == "classify-grid")
    cmd_classify_grid(cfg, dir, rep, st);
  else if (cfg.kind == "quad-family")
    cmd_quad_family(cfg, dir, rep, st);
  else if (cfg.kind == "baker-bulge")
    cmd_baker_bulge(cfg, dir, rep, st);
  else if (cfg.kind == "runge-build")
    cmd_runge_build(cfg, dir, rep, st);
  else if (cfg.kind == "series-test")
    cmd_series_test(cfg, dir, rep, st);
  else if (cfg.kind == "order")
    cmd_order(cfg, dir, rep, st);
  else if (cfg.kind == "certify")
    cmd_certify(cfg, dir, rep, st);
  else if (cfg.kind == "render")
    cmd_render(cfg, dir, rep, st);
  else
    throw std::invalid_argument("config: unknown kind '" + cfg.kind + "'");

  rep.section("status");
  st.ok = st.failures.empty();
  rep.kv("ok", st.ok);
  for (const std::string& f : st.failures) rep.line("failed: " + f);
  rep.write(dir / "report.txt");
  return st;
}

} // namespace skewfatou
