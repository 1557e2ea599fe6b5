#include "skewfatou/experiment.hpp"

#include "CLI11.hpp"

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using skewfatou::experiment_config;

constexpr const char* grammar_help =
    "Function grammar for --f/--g/--h/--p:\n"
    "  expr   := term (('+'|'-') term)*\n"
    "  term   := factor ('*' factor)*\n"
    "  factor := atom ('^' nonneg-int)?\n"
    "  atom   := 'z' | 'w' | number | 'i' | 'exp' '(' expr ')'\n"
    "          | 'poly' '(' const-expr (',' const-expr)* ')' | '(' expr ')' | '-' atom\n"
    "Numbers are decimal literals with optional exponent and optional trailing 'i'.\n"
    "poly(c0,c1,...) expands in the slot's own variable: z for --f/--h/--p, w for --g.\n"
    "There is no division; write w/2 as 0.5*w.";

struct param_spec {
  const char* name;
  const char* help;
};

struct kind_spec {
  const char* kind;
  const char* help;
  std::vector<const char*> fns;
  std::vector<param_spec> params;
};

const std::vector<kind_spec>& kind_table() {
  static const std::vector<kind_spec> table = {
      {"orbit",
       "Iterate one orbit of the skew-product and classify it",
       {"f", "g", "h"},
       {{"z0", "start z (complex: re or re,im)"},
        {"w0", "start w"},
        {"steps", "iteration count (default 100)"},
        {"escape", "stop early when |z| exceeds this radius"}}},
      {"classify-grid",
       "Classify a square grid of fiber starting points",
       {"f", "g", "h"},
       {{"center", "grid center in the z-plane"},
        {"radius", "half side length (default 2)"},
        {"n", "cells per side, <= 256 (default 16)"},
        {"w0", "shared start w"},
        {"steps", "iteration count per cell (default 200)"},
        {"escape-radius", "escape classification radius (default 1e6)"},
        {"bound", "bounded classification cap (default 1e3)"},
        {"tail", "tail length checked against the cap (default 5)"}}},
      {"quad-family",
       "Reproduce the quadratic one-parameter family: sign flip and bounded bisection witness",
       {},
       {{"lambda", "family parameter (default 0.5)"},
        {"x0", "real start point (default 5)"},
        {"delta", "flip-side offset (default 0.01)"},
        {"tolerance", "bisection bracket width target (default 1e-15)"}}},
      {"baker-bulge",
       "Shadowing run for the wandering-domain family plus a bulging probe over a base patch",
       {"g", "h", "p"},
       {{"T", "translation constant of the family (default 0,6.28...)"},
        {"guess", "fixed-point refinement start"},
        {"z0", "orbit start z (default 0.1)"},
        {"w0", "orbit start w (default 0.01)"},
        {"delta", "shadowing tube radius (default 0.5)"},
        {"steps", "shadowing horizon (default 50)"},
        {"grid", "1 to run the 25-point base-patch probe, 0 to skip (default 1)"},
        {"z-center", "probe patch center (default 0.1)"},
        {"z-radius", "probe patch radius (default 0.2)"},
        {"w-radius", "probe fiber radius (default 0.01)"}}},
      {"runge-build",
       "Staged polynomial perturbation toward the escape/capture dichotomy",
       {"f", "g"},
       {{"z0", "escaping fiber orbit start (default 2)"},
        {"stages", "last stage index K (default 2)"},
        {"window", "orbit window scanned for the escaping subsequence (default 64)"},
        {"theta", "ladder safety factor in (0,1) (default 0.5)"},
        {"max-degree", "fit degree budget per stage (default 1500)"},
        {"trials", "random perturbations per stability estimate (default 24)"}}},
      {"series-test",
       "Linearizer envelope and series convergence at a probe point",
       {"g", "h"},
       {{"frame", "geometric or superattracting (default geometric)"},
        {"probe", "envelope radius probed (default 0.25)"},
        {"t", "superattracting calibration radius (default 0.05)"},
        {"z0", "series evaluation point (default 0)"},
        {"T", "family translation constant (default 1)"},
        {"delta", "envelope margin (default 0.5)"},
        {"terms", "partial sums computed (default 60)"},
        {"expect", "converged or diverging; checked when given"}}},
      {"order",
       "Growth-order estimate of an entire function on a dyadic radius ladder",
       {"h"},
       {{"r2", "base radius of the ladder (default 1)"},
        {"expect-lo", "fail when the estimate is below this"},
        {"expect-hi", "fail when the estimate is above this"}}},
      {"certify",
       "Escape/bounded witnesses on shrinking fiber circles (non-normality certificate)",
       {"f", "g", "h"},
       {{"z0", "base point of the probed circles (default 2)"},
        {"scales", "comma list of circle radii, strictly decreasing (default 0.5,0.25,0.125)"},
        {"horizon", "bounded-witness horizon (default 200)"},
        {"escape-base", "escape target base E0 (default 10)"},
        {"bound", "bounded-witness cap (default 1e3)"},
        {"shrink-max", "halvings tried per circle (default 40)"}}},
      {"render",
       "Escape-time raster of a fixed-w slice, written as binary PGM",
       {"f", "g", "h"},
       {{"w-slice", "fiber value of the slice (default 0)"},
        {"viewport", "x0,y0,x1,y1 rectangle (default -2,-2,2,2)"},
        {"size", "WxH pixels, each <= 8192 (default 512x512)"},
        {"maxiter", "iteration cap per pixel (default 100)"},
        {"escape", "escape radius (default 4)"}}},
  };
  return table;
}

struct pending_values {
  std::string config_path;
  std::string seed, threads, out;
  std::vector<std::pair<std::string, std::string>> fns;    // slot -> text
  std::vector<std::pair<std::string, std::string>> params; // key -> text
};

experiment_config assemble(const kind_spec& ks, const pending_values& v) {
  experiment_config cfg;
  if (!v.config_path.empty()) {
    std::ifstream in(v.config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + v.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = skewfatou::parse_config(ss.str());
    if (cfg.kind != ks.kind)
      throw std::runtime_error("config file kind '" + cfg.kind + "' does not match subcommand '" +
                               ks.kind + "'");
  }
  cfg.kind = ks.kind;
  if (!v.seed.empty()) cfg.seed = std::stoull(v.seed);
  if (!v.threads.empty()) cfg.threads = static_cast<unsigned>(std::stoul(v.threads));
  if (!v.out.empty()) cfg.out_dir = v.out;
  for (const auto& [slot, text] : v.fns) cfg.set_function(slot, text);
  for (const auto& [key, text] : v.params) cfg.set_param(key, text);
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("skewfatou: experiments with holomorphic skew-products near an "
                           "invariant fiber\n\n") +
               grammar_help};
  app.require_subcommand(1);
  // --h is a function slot, so help stays long-form only
  app.set_help_flag("--help", "print help and exit");

  std::vector<pending_values> values(kind_table().size());
  std::vector<CLI::App*> subs;

  for (std::size_t i = 0; i < kind_table().size(); ++i) {
    const kind_spec& ks = kind_table()[i];
    pending_values& v = values[i];
    CLI::App* sub = app.add_subcommand(ks.kind, ks.help);
    sub->set_help_flag("--help", "print help and exit");
    sub->add_option("--config", v.config_path, "config file; flags given here override it");
    sub->add_option("--seed", v.seed, "RNG seed (default 1; SKEWFATOU_SEED env overrides)");
    sub->add_option("--threads", v.threads, "worker threads, 0 = machine parallelism");
    sub->add_option("--out", v.out, "output directory (default .)");
    for (const char* slot : ks.fns) {
      std::string flag = std::string("--") + slot;
      sub->add_option_function<std::string>(
          flag, [&v, slot](const std::string& text) { v.fns.emplace_back(slot, text); },
          std::string("function literal for slot ") + slot);
    }
    for (const param_spec& ps : ks.params) {
      std::string flag = std::string("--") + ps.name;
      std::string key = ps.name;
      sub->add_option_function<std::string>(
          flag, [&v, key](const std::string& text) { v.params.emplace_back(key, text); },
          ps.help);
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      experiment_config cfg = assemble(kind_table()[i], values[i]);
      skewfatou::run_status st = skewfatou::run(cfg);
      for (const std::string& a : st.artifacts)
        std::cout << "wrote " << cfg.out_dir << "/" << a << "\n";
      for (const std::string& f : st.failures) std::cout << "failed: " << f << "\n";
      std::cout << (st.ok ? "ok" : "not ok") << "\n";
      return st.ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
