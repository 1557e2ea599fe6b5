#pragma once

#include "skewfatou/orbit.hpp"

#include <optional>
#include <string>
#include <vector>

namespace skewfatou {

// Shrinking fiber radii rho_0 >= rho_1 >= ... with the forward-image property
// g(closed D(0, rho_k)) inside closed D(0, rho_{k+1}).
enum class rho_tag { geometric, superattracting, user };

struct rho_sequence {
  rho_tag tag = rho_tag::user;
  std::vector<double> values; // rho_0 .. rho_K
  int K = 0;
  // geometric: rho_k = alpha^k * delta_g
  double alpha = 0.0;
  double delta_g = 0.0;
  // superattracting: rho_0 = t, rho_{k+1} = C_g * rho_k^d
  double C_g = 0.0;
  int d = 0;
  double t = 0.0;
  double D = 0.0; // log(C_g)/(1-d)
  bool containment_verified = false;
};

double rho_at(const rho_sequence& rho, int k);

// 256 boundary samples per level: |g(w)| <= rho_{k+1} * (1 + slack) on |w| = rho_k.
bool check_rho_containment(const rho_sequence& rho, const fn& g, double slack = 1e-12);

// g(0) = 0 with 0 < |g'(0)| < 1: finds delta_g <= probe_radius and the sampled
// contraction factor alpha = sup |g(w)/w| < 1 on the closed disk, then
// rho_k = alpha^k * delta_g for k = 0..K.
rho_sequence derive_rho_geometric(const fn& g, double probe_radius, int K = 64);

// g vanishing to order d >= 2 at 0: shrinks delta_g <= probe_radius until
// C_g * delta_g^d <= delta_g and |g(w)| <= |w| sampled, with
// C_g = sup |g(w)/w^d|; then rho_0 = t < delta_g, rho_{k+1} = C_g * rho_k^d,
// cross-checked against the closed form C_g^((1-d^k)/(1-d)) * t^(d^k).
// K is truncated where rho_k underflows.
rho_sequence derive_rho_superattracting(const fn& g, double probe_radius, double t, int K = 64);

rho_sequence user_rho(std::vector<double> values);

// Max of |h| over the closed bidisk {|z - z_center| <= z_radius} x {|w| <= w_radius},
// sampled on the distinguished boundary torus (where the maximum principle puts
// the sup). Variables h does not use collapse their sampling direction.
double sampled_sup_abs(const fn& h, cplx z_center, double z_radius, double w_radius,
                       std::size_t nz = 256, std::size_t nw = 64);

enum class series_verdict { converged, diverging, inconclusive };

struct series_report {
  std::vector<double> terms;        // term_k = rho_k * sup |h| on the k-th bidisk
  std::vector<double> partial_sums; // nondecreasing
  std::vector<double> ratios;       // ratios[k-1] = term_k / term_{k-1}
  series_verdict verdict = series_verdict::inconclusive;
  std::optional<double> sum_estimate; // partial sum plus a geometric tail, when converged
  bool overflow = false;
  int K = 0;
  std::string constants;
};

// term_k = rho_k * max |h| over {|z - (z0 + k*T)| <= delta} x {|w| <= rho_k}.
// Converged: last min(10,K) term ratios all < 0.9. Diverging: terms
// nondecreasing over that window. Otherwise inconclusive.
series_report series_test(const fn& h, const rho_sequence& rho, cplx z0, cplx T,
                          double delta, int K);

struct order_estimate {
  double rho1 = 0.0;               // slope of log+log M against log r, top half-ladder
  std::vector<double> radii;
  std::vector<double> log_max;     // log M(r, r2; h) per radius
  std::vector<double> loglog;      // log+ of log_max
  double r2 = 1.0;
  std::optional<double> diagonal;  // same estimator with r2 = r (two-variable h)
  bool degenerate = false;         // h with empty growth (identically 0)
};

// Growth order of h in z: M(r, r2; h) sampled with >= 1024 boundary points per
// radius through log-space evaluation, so exponential h never overflows.
// Default ladder 2^6 .. 2^14, geometric ratio 2.
order_estimate estimate_order(const fn& h, double r2 = 1.0,
                              std::vector<double> ladder = {});

enum class growth_verdict { satisfied, not_satisfied, inconclusive };
enum class attraction_kind { geometric, superattracting };

struct growth_report {
  growth_verdict verdict = growth_verdict::inconclusive;
  attraction_kind g_kind = attraction_kind::geometric;
  int d = 1;                 // vanishing order of g at 0
  double rho1_estimate = 0.0;
  double band = 0.15;        // tolerance band of the order estimator
  std::string note;
  std::optional<series_report> consistency; // series run with the derived rho
};

// Sufficient growth condition for trapping near the invariant fiber:
// geometric attraction needs order(h) < 1, superattracting needs it finite.
// Estimates within `band` of the threshold come back inconclusive.
growth_report growth_criterion_check(const fn& h, const fn& g, double probe_radius);

struct shadowing_report {
  std::int64_t l = 0;               // start tube index: |z_start - l*T| < delta/2
  std::vector<double> e;            // e_k = |z_k - (l+k)*T|
  std::vector<double> increments;   // rho_k * sampled max |h| on the k-th tube disk
  std::vector<double> bounds;       // sum of increments below k, plus delta/2
  bool within_delta = false;        // e_k < delta for all k
  bool induction_ok = false;        // e_k < bounds[k] for all k
  bool chain_ok = false;            // e_{k+1} <= e_k + increments[k] (small slack)
  bool sum_bound_ok = false;        // bounds[k] < delta for all k
  bool w_enveloped = false;         // |w_k| <= rho_k along the orbit
  double w_final_abs = 0.0;
  double periodicity_defect = 0.0;
  rho_sequence rho;                 // envelope derived from g at scale |w_start|
  std::string note;
};

// For f(z) = z + T + p(z) with p T-periodic and an attracting fixed point of
// z + p(z) at 0: checks that the orbit of (z_start, w_start) shadows the tube
// centers l*T, (l+1)*T, ... within delta, with the perturbation budget
// rho_{l+k} * max |h| derived from g at scale |w_start|.
shadowing_report shadowing_check(const skew_product& F, cplx z_start, cplx w_start,
                                 double delta, cplx T, int steps);

} // namespace skewfatou
