#include "skewfatou/probe.hpp"

#include "skewfatou/parallel.hpp"
#include "skewfatou/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace skewfatou {

namespace {

cplx unit_angle(std::size_t t, std::size_t n) {
  double a = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
  return cplx(std::cos(a), std::sin(a));
}

void search_scale(const skew_product& F, cplx z0, std::int64_t horizon, double bound_cap,
                  int shrink_max, scale_witnesses& out) {
  for (int i = 0; i <= shrink_max && !out.complete; ++i) {
    double r = out.scale * std::ldexp(1.0, -i);
    if (!(r > 0.0)) break;
    for (std::size_t t = 0; t < 64 && !out.complete; ++t) {
      cplx w = r * unit_angle(t, 64);
      orbit_record rec = iterate(F, z0, w, horizon);
      double zmax = 0.0, allmax = 0.0;
      for (const orbit_point& p : rec.points) {
        zmax = std::max(zmax, std::abs(p.z));
        allmax = std::max({allmax, std::abs(p.z), std::abs(p.w)});
      }
      if (!out.escape_w && zmax >= out.escape_target) {
        out.escape_w = w;
        out.escape_attained = zmax;
        for (const orbit_point& p : rec.points)
          if (std::abs(p.z) >= out.escape_target) {
            out.escape_step = static_cast<std::size_t>(p.k);
            break;
          }
      }
      if (!out.bounded_w && rec.termination == orbit_termination::completed &&
          rec.last_step == horizon && allmax <= bound_cap) {
        out.bounded_w = w;
        out.bounded_max = allmax;
      }
      out.complete = out.escape_w.has_value() && out.bounded_w.has_value();
    }
  }
}

} // namespace

non_normality_certificate certify_non_normality(const skew_product& F, cplx z0,
                                                const std::vector<double>& scales,
                                                std::int64_t horizon, double escape_base,
                                                double bound_cap, int shrink_max,
                                                unsigned threads) {
  if (scales.empty()) throw std::invalid_argument("certificate: scale list is empty");
  for (std::size_t j = 0; j < scales.size(); ++j) {
    if (!std::isfinite(scales[j]) || !(scales[j] > 0.0))
      throw std::invalid_argument("certificate: scales must be positive and finite");
    if (j > 0 && !(scales[j] < scales[j - 1]))
      throw std::invalid_argument("certificate: scales must be strictly decreasing");
  }
  if (horizon < 1) throw std::invalid_argument("certificate: horizon must be >= 1");
  if (!(escape_base > 0.0) || !(bound_cap > 0.0))
    throw std::invalid_argument("certificate: escape base and bound cap must be positive");
  if (shrink_max < 0) throw std::invalid_argument("certificate: shrink_max must be >= 0");

  non_normality_certificate cert;
  cert.base = z0;
  cert.horizon = horizon;
  cert.escape_base = escape_base;
  cert.bound_cap = bound_cap;
  cert.scales.resize(scales.size());
  for (std::size_t j = 0; j < scales.size(); ++j) {
    cert.scales[j].scale = scales[j];
    cert.scales[j].escape_target = static_cast<double>(j + 1) * escape_base;
  }

  parallel_for(scales.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j)
      search_scale(F, z0, horizon, bound_cap, shrink_max, cert.scales[j]);
  });

  cert.complete = true;
  for (const scale_witnesses& s : cert.scales) cert.complete = cert.complete && s.complete;
  if (cert.complete) {
    cert.verdict = "both behaviors witnessed at every scale";
  } else {
    for (const scale_witnesses& s : cert.scales)
      if (!s.complete) {
        cert.verdict = "inconclusive at scale " + fmt_double(s.scale);
        break;
      }
  }
  return cert;
}

bulging_report bulging_probe(const baker_family& family, const fn& g, const fn& h, cplx z_center,
                             double z_radius, double w_radius, double delta, std::int64_t horizon,
                             unsigned threads) {
  if (!g || !h) throw std::invalid_argument("bulging probe: g and h are required");
  if (!(delta > 0.0)) throw std::invalid_argument("bulging probe: delta must be positive");
  if (horizon < 1 || horizon > 1000000)
    throw std::invalid_argument("bulging probe: horizon out of range");
  if (!(z_radius >= 0.0) || !(w_radius >= 0.0))
    throw std::invalid_argument("bulging probe: radii must be nonnegative");

  skew_product F(family.f, g, h);

  bulging_report rep;
  rep.z_center = z_center;
  rep.z_radius = z_radius;
  rep.w_radius = w_radius;
  rep.delta = delta;
  rep.horizon = horizon;
  rep.samples.resize(25);

  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t s = 0; s < 25; ++s) {
    bulge_sample& smp = rep.samples[s];
    if (s == 0) {
      smp.z_start = z_center;
    } else {
      std::size_t ring = (s - 1) / 8, pos = (s - 1) % 8;
      double rr = z_radius * static_cast<double>(ring + 1) / 3.0;
      double ang = 2.0 * std::numbers::pi *
                   (static_cast<double>(pos) / 8.0 + static_cast<double>(ring) / 16.0);
      smp.z_start = z_center + rr * cplx(std::cos(ang), std::sin(ang));
    }
    if (s == 0) {
      smp.w_start = cplx(0.0, 0.0); // the fiber itself is always probed
    } else {
      double rw = w_radius * static_cast<double>(s) / 24.0;
      double ang = 2.0 * std::numbers::pi * std::fmod(golden * static_cast<double>(s), 1.0);
      smp.w_start = rw * cplx(std::cos(ang), std::sin(ang));
    }
  }

  parallel_for(rep.samples.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      bulge_sample& smp = rep.samples[s];
      double proj = (smp.z_start.real() * family.T.real() + smp.z_start.imag() * family.T.imag()) /
                    std::norm(family.T);
      std::int64_t l = std::max<std::int64_t>(0, std::llround(proj));
      bool tube_ok = false;
      if (std::abs(smp.z_start - static_cast<double>(l) * family.T) < 0.5 * delta) {
        shadowing_report sh = shadowing_check(F, smp.z_start, smp.w_start, delta, family.T,
                                              static_cast<int>(horizon));
        smp.l = sh.l;
        smp.note = sh.note;
        smp.max_err = sh.e.empty() ? std::numeric_limits<double>::infinity()
                                   : *std::max_element(sh.e.begin(), sh.e.end());
        smp.w_final_abs = sh.w_final_abs;
        // notes are informational; real failures clear the measured flags
        tube_ok = sh.within_delta;
      } else {
        // Outside the induction patch D(lT, delta/2) the per-step chain does
        // not apply; the delta-tube itself is still checked by iteration.
        smp.l = l;
        smp.note = "outside the induction patch; tube checked directly";
        cplx z = smp.z_start, w = smp.w_start;
        tube_ok = true;
        double max_err = 0.0;
        for (std::size_t k = 0;; ++k) {
          double ek = std::abs(z - static_cast<double>(l + static_cast<std::int64_t>(k)) * family.T);
          if (!std::isfinite(ek) || !(ek < delta)) {
            tube_ok = false;
            max_err = std::isfinite(ek) ? std::max(max_err, ek)
                                        : std::numeric_limits<double>::infinity();
            break;
          }
          max_err = std::max(max_err, ek);
          if (k == horizon) break;
          std::tie(z, w) = F.step(z, w);
        }
        smp.max_err = max_err;
        smp.w_final_abs = std::abs(w);
      }
      bool w_zero = (smp.w_start == cplx(0.0, 0.0)) ||
                    smp.w_final_abs < std::min(1e-6, std::abs(smp.w_start));
      smp.shadows = tube_ok && w_zero;
      smp.escaped_tube = !tube_ok;
    }
  });

  std::size_t n_shadow = 0, n_escape = 0;
  for (const bulge_sample& smp : rep.samples) {
    if (smp.shadows) ++n_shadow;
    if (smp.escaped_tube) ++n_escape;
  }
  if (n_shadow == rep.samples.size())
    rep.verdict = "uniform-shadowing";
  else if (n_shadow > 0 && n_escape > 0)
    rep.verdict = "mixed-behavior";
  else
    rep.verdict = "inconclusive";
  return rep;
}

} // namespace skewfatou
