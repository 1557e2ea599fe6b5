#pragma once

#include "skewfatou/fit.hpp"
#include "skewfatou/orbit.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace skewfatou {

// Frozen geometry for the staged perturbation: an escaping fiber orbit, the
// shrinking radius ladder delta_tilde, and the frozen disk radii delta_geom
// used for the target disks D_k and the big disks H_k. The stability radii
// estimated later per stage stay below delta_geom, so freezing the disks first
// is safe; the stability value is what tolerances and telescoping use.
struct construction_geometry {
  fn f;
  cplx z0{0.0, 0.0};
  double theta = 0.5;
  std::vector<cplx> orbit;         // z_j = f^j(z0)
  std::vector<std::size_t> n;      // escaping subsequence indices, size >= K+2
  std::vector<double> delta_tilde; // k = 0..K, theta times the recurrence bound
  std::vector<double> delta_geom;  // theta * min(delta_tilde_k, 1/4)
  int K = 0;

  cplx z_at(int k) const;          // z_{n_k}
  disk target_disk(int k) const;   // D_k = closed D(z_{n_k}, delta_geom_k)
  double big_radius(int k) const;  // H_k radius |z_{n_k}| - 2*delta_geom_k (k >= 1)

  // smallest margins found while validating the disk arrangement; all > 0
  double margin_disjoint_targets = 0.0; // between D_j disks
  double margin_nesting = 0.0;          // H_k inside interior H_{k+1}
  double margin_contains = 0.0;         // D_j inside H_k for j < k
  double margin_separation = 0.0;       // H_k away from D_j for j >= k
  double margin_orbit_interior = 0.0;   // z_j inside interior H_k for j < n_k
};

// Builds the ladder with delta_tilde_k = theta * recurrence bound and checks
// every disk relation, recording margins. Needs an escaping subsequence of
// length >= K+2 within the window.
construction_geometry build_geometry(const fn& f, cplx z0, std::int64_t window, int K,
                                     double theta = 0.5);

struct property_check {
  std::string what;
  bool ok = false;
  double measured = 0.0;
  double bound = 0.0;
};

struct stage_state {
  int k = 0;
  fn h;                              // h_k (stage 0: identity)
  std::optional<polynomial_fit> fit; // stages >= 1
  cplx w{0.0, 0.0}, w_tilde{0.0, 0.0};
  cplx center{0.0, 0.0}, center_tilde{0.0, 0.0}; // n_k-step projections of the witnesses
  cplx A{0.0, 0.0}, A_tilde{0.0, 0.0};           // piecewise constants of the fit target
  double R = 0.0;                    // target-disk radius around the centers
  double delta_stab = 0.0;           // stability radius estimate, <= delta_geom_k
  double min_delta_stab = 0.0;       // min over stages 0..k
  double tolerance = 0.0;            // fit tolerance 2^-(k+1) * min_delta_stab
  std::vector<property_check> properties;
  bool all_ok = false;
  std::string note;
};

// Nonzero w != w_tilde (arguments 0 and pi on one modulus circle, halved from
// 1/4) with: |w| < 1/k; the g-orbit stays in the unit disk for n_k+1 steps; the
// z-projections stay inside H_k before step n_k and land inside D_k at step
// n_k; and the two landing points are distinct.
std::pair<cplx, cplx> find_fiber_witnesses(const construction_geometry& geo, const fn& h_prev,
                                           const fn& g, int k);

// Largest radius (times 0.9) with both target disks inside D_k, disjoint, and
// the sampled oscillation of f on each below 1/3.
double choose_radius(const construction_geometry& geo, cplx center, cplx center_tilde, int k);

// Largest delta (halved from delta_geom_k) such that `trials` random degree-10
// perturbations q with sampled sup |q| <= delta on H_k move both witness
// projections by less than R_k/2.
double estimate_stability_radius(const construction_geometry& geo, const fn& h_prev,
                                 const fn& g, int k, double Rk, cplx w, cplx w_tilde,
                                 int trials, std::uint64_t seed);

// Stage 0 fixes h_0 = id with R_0 = delta_stab_0 = delta_geom_0. Later stages
// fit one polynomial matching h_{k-1} on H_k and the two funnel constants on
// the target disks, then re-verify all stage properties by sampling (2048
// boundary + 512 interior points per disk).
stage_state build_stage(const stage_state* prev, const construction_geometry& geo, const fn& g,
                        int k, int max_degree, int trials, std::uint64_t seed, unsigned threads);

struct telescope_row {
  int k = 0;
  double sup = 0.0;   // sampled sup over H_{k+1} of |h - h_k|
  double bound = 0.0; // delta_stab_{k+1}
  bool ok = false;
};

struct assembled_perturbation {
  fn h; // last built h_k
  int K = 0;
  std::vector<telescope_row> telescope;
  bool ok = false;
};

assembled_perturbation assemble_h(const std::vector<stage_state>& stages,
                                  const construction_geometry& geo, std::uint64_t seed);

struct dichotomy_row {
  int k = 0;
  bool asserted = false;   // the k = 0 row is reported but carries no bound claim
  cplx v{0.0, 0.0};        // z-projection after n_k + 1 steps from (z0, w_k)
  cplx v_tilde{0.0, 0.0};  // same from (z0, w_tilde_k)
  double g_abs = 0.0;      // |g^(n_k+1)(w_k)|
  double g_tilde_abs = 0.0;
  bool in_target = false;  // |v - (k+1)| < 1
  bool tilde_small = false;// |v_tilde| < 1
  bool g_small = false;
  cplx fiber_value{0.0, 0.0}; // z-projection after n_k steps from (z0, 0)
  bool fiber_exact = false;   // equals z_{n_k} bit for bit
};

struct dichotomy_outcome {
  std::vector<dichotomy_row> rows;
  bool all_asserted_ok = false;
};

dichotomy_outcome dichotomy_check(const assembled_perturbation& assembled,
                                  const construction_geometry& geo,
                                  const std::vector<stage_state>& stages, const fn& g);

struct construction_result {
  construction_geometry geometry;
  std::vector<stage_state> stages; // includes a trailing failed stage, if any
  std::optional<assembled_perturbation> assembled;
  std::optional<dichotomy_outcome> dichotomy;
  int completed = 0;               // stages fully built (fit met tolerance)
  bool fully_ok = false;           // all K+1 stages completed with every check green
  std::string summary;
};

// Runs geometry, stages 0..K (stopping at the first stage whose fit cannot
// meet tolerance at max_degree), assembly, and the escape/bounded dichotomy.
construction_result run_construction(const fn& f, const fn& g, cplx z0, std::int64_t window,
                                     int K, int max_degree, double theta = 0.5, int trials = 24,
                                     std::uint64_t seed = 1, unsigned threads = 0);

} // namespace skewfatou
