#pragma once

#include "skewfatou/expr.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace skewfatou {

// Flat text config: "[experiment]" carries kind/seed/threads/out, "[functions]"
// carries the expression literals (f, g, h, p), "[params]" everything else.
// Keys are unique; unknown keys are rejected here or by the command.
struct experiment_config {
  std::string kind;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_dir = ".";
  std::vector<std::pair<std::string, std::string>> functions;
  std::vector<std::pair<std::string, std::string>> params;

  bool has_function(const std::string& name) const;
  const std::string& function_text(const std::string& name) const;
  bool has_param(const std::string& key) const;
  const std::string& param(const std::string& key) const;
  std::string param_or(const std::string& key, const std::string& dflt) const;
  double param_double(const std::string& key, double dflt) const;
  std::int64_t param_int(const std::string& key, std::int64_t dflt) const;
  void set_function(const std::string& name, const std::string& text); // insert or replace
  void set_param(const std::string& key, const std::string& value);
};

// Errors carry the 1-based line number. Round-trips with serialize_config.
experiment_config parse_config(const std::string& text);
std::string serialize_config(const experiment_config& cfg);

struct run_status {
  bool ok = false;
  std::vector<std::string> failures;  // failed assertions, in report order
  std::vector<std::string> artifacts; // files written, relative to out_dir
};

// Dispatches on cfg.kind (orbit, classify-grid, quad-family, baker-bulge,
// runge-build, series-test, order, certify, render), writes report.txt and the
// command's data files into out_dir, and collects every failed assertion.
// SKEWFATOU_SEED in the environment overrides the config seed. Invalid configs
// and module-level errors throw; mathematical shortfalls land in failures.
run_status run(const experiment_config& cfg);

} // namespace skewfatou
