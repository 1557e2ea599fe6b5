#pragma once

#include "skewfatou/expr.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace skewfatou {

// F(z,w) = (f(z) + w*h(z,w), g(w)). f depends on z only, g on w only; h may
// use both (form tag below). With the invariant-fiber flag set, g(0) = 0 is
// validated so {w=0} is forward invariant and F restricted to it is (f, 0).
struct skew_product {
  fn f, g, h;
  bool invariant_fiber = true;
  bool h_uses_w = false; // form tag: h(z) vs h(z,w)

  skew_product(fn f_, fn g_, fn h_, bool invariant_fiber_ = true);

  std::pair<cplx, cplx> step(cplx z, cplx w) const;
};

enum class orbit_termination { completed, escaped, overflowed };

struct orbit_point {
  std::int64_t k;
  cplx z, w;
};

struct orbit_record {
  std::vector<orbit_point> points;   // k ascending; start point always kept
  orbit_termination termination = orbit_termination::completed;
  std::int64_t last_step = 0;        // k of the final recorded point
  std::int64_t overflow_step = -1;   // first non-finite step, when overflowed
  std::optional<double> escape_radius;
  std::optional<std::int64_t> escape_step; // first k with |z_k| > escape_radius

  double max_abs_z() const; // over recorded (finite) points
};

// Records (z_k, w_k) for k = 0..steps, stopping early when |z| crosses
// escape_radius or a non-finite value appears (the non-finite point is not
// recorded). Dense up to dense_cap points, then thinned by stride doubling.
orbit_record iterate(const skew_product& F, cplx z0, cplx w0, std::int64_t steps,
                     std::optional<double> escape_radius = std::nullopt,
                     std::size_t dense_cap = 100000);

enum class orbit_class { escaping, bounded, oscillating, undetermined };

struct orbit_classification {
  orbit_class label = orbit_class::undetermined;
  double max_abs_z = 0.0;
  std::optional<std::int64_t> escape_step;
  std::optional<std::int64_t> exceed_step;   // first |z| > R (oscillation evidence)
  std::optional<std::int64_t> reentry_step;  // first later |z| < B
  bool overflowed = false;
  std::string note;
};

// R: escape radius, B: bound, m: monotone tail length. Pre: R > B > 0.
// Overflow-terminated records classify as undetermined unless the recorded
// prefix already met the escape criterion.
orbit_classification classify_orbit(const orbit_record& rec, double R = 1e6,
                                    double B = 1e3, int m = 5);

// [z0, f(z0), ..., f^steps(z0)], truncated before the first non-finite value.
std::vector<cplx> fiber_orbit(const fn& f, cplx z0, std::int64_t steps);

// Greedy escaping subsequence: n_0 = 0; n_{j+1} is the least m > n_j with
// |z_m| strictly above every earlier |z_i|. Scan stops at non-finite values.
std::vector<std::size_t> select_escaping_subsequence(const std::vector<cplx>& zs);

} // namespace skewfatou
