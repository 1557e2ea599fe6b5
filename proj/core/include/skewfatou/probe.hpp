#pragma once

#include "skewfatou/criteria.hpp"
#include "skewfatou/gallery.hpp"
#include "skewfatou/orbit.hpp"

#include <optional>
#include <string>
#include <vector>

namespace skewfatou {

// Witness pair at one scale r: an orbit that climbs past the escape target and a
// second orbit that stays under the cap for the whole horizon. Both start at
// (z0, w) with |w| <= r.
struct scale_witnesses {
  double scale = 0.0;
  double escape_target = 0.0;
  std::optional<cplx> escape_w;
  std::size_t escape_step = 0;   // first step with |z| >= escape_target
  double escape_attained = 0.0;  // max |z| seen on that orbit
  std::optional<cplx> bounded_w;
  double bounded_max = 0.0;      // max of |z|, |w| over the full horizon
  bool complete = false;
};

struct non_normality_certificate {
  cplx base;
  std::int64_t horizon = 0;
  double escape_base = 0.0;  // target at scale j is j * escape_base
  double bound_cap = 0.0;
  std::vector<scale_witnesses> scales;
  bool complete = false;
  std::string verdict;
};

// Deterministic witness search: at each scale r_j, scan circles |w| = r_j * 2^-i
// (i = 0..shrink_max, 64 arguments each) until both witnesses are found. The
// escape target grows linearly along the scale list, so a complete certificate
// exhibits arbitrarily incompatible behaviors accumulating at (z0, 0).
non_normality_certificate certify_non_normality(const skew_product& F, cplx z0,
                                                const std::vector<double>& scales,
                                                std::int64_t horizon, double escape_base = 10.0,
                                                double bound_cap = 1e3, int shrink_max = 40,
                                                unsigned threads = 0);

struct bulge_sample {
  cplx z_start;
  cplx w_start;
  long long l = 0;          // index of the translate the start is nearest to
  double max_err = 0.0;     // max_k |z_k - (l+k)T|
  double w_final_abs = 0.0;
  bool shadows = false;     // stayed in the delta tube with w -> 0
  bool escaped_tube = false;
  std::string note;
};

struct bulging_report {
  cplx z_center;
  double z_radius = 0.0;
  double w_radius = 0.0;
  double delta = 0.0;
  std::int64_t horizon = 0;
  std::vector<bulge_sample> samples;
  std::string verdict;  // uniform-shadowing | mixed-behavior | inconclusive
};

// 25 deterministic starts (center plus three rings of eight) in the z-disk,
// paired with a w spiral through the w-disk that includes w = 0; each start is
// tracked against the translate ladder of the Baker family.
bulging_report bulging_probe(const baker_family& family, const fn& g, const fn& h, cplx z_center,
                             double z_radius, double w_radius, double delta, std::int64_t horizon,
                             unsigned threads = 0);

} // namespace skewfatou
