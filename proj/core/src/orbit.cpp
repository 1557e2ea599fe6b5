#include "skewfatou/orbit.hpp"

#include <cmath>

namespace skewfatou {

skew_product::skew_product(fn f_, fn g_, fn h_, bool invariant_fiber_)
    : f(std::move(f_)), g(std::move(g_)), h(std::move(h_)), invariant_fiber(invariant_fiber_) {
  if (!f || !g) throw std::invalid_argument("skew product needs f and g");
  if (!h) h = constant(0.0);
  if (f->uses_w) throw std::invalid_argument("f must depend on z only");
  if (g->uses_z) throw std::invalid_argument("g must depend on w only");
  h_uses_w = h->uses_w;
  if (invariant_fiber) {
    cplx g0 = eval(g, cplx(0.0), cplx(0.0));
    if (!(std::abs(g0) <= 1e-12))
      throw std::invalid_argument("invariant fiber requires g(0) = 0 (got |g(0)| = " +
                                  fmt_double(std::abs(g0)) + ")");
  }
}

std::pair<cplx, cplx> skew_product::step(cplx z, cplx w) const {
  // w == 0 makes the first coordinate exactly f(z) as long as h stays finite.
  cplx zn = eval(f, z, w) + w * eval(h, z, w);
  cplx wn = eval(g, z, w);
  return {zn, wn};
}

double orbit_record::max_abs_z() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, std::abs(p.z));
  return m;
}

orbit_record iterate(const skew_product& F, cplx z0, cplx w0, std::int64_t steps,
                     std::optional<double> escape_radius, std::size_t dense_cap) {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (dense_cap < 4) throw std::invalid_argument("dense_cap too small");
  orbit_record rec;
  rec.escape_radius = escape_radius;
  if (!is_finite(z0) || !is_finite(w0)) {
    rec.termination = orbit_termination::overflowed;
    rec.overflow_step = 0;
    return rec;
  }

  std::int64_t stride = 1;
  cplx z = z0, w = w0;
  auto push = [&](std::int64_t k) {
    if (rec.points.size() >= dense_cap) {
      // Thin to every other stored point and double the sampling stride.
      std::vector<orbit_point> kept;
      kept.reserve(rec.points.size() / 2 + 1);
      for (std::size_t i = 0; i < rec.points.size(); i += 2) kept.push_back(rec.points[i]);
      rec.points = std::move(kept);
      stride *= 2;
    }
    rec.points.push_back({k, z, w});
  };

  push(0);
  rec.last_step = 0;
  if (escape_radius && std::abs(z) > *escape_radius) {
    rec.termination = orbit_termination::escaped;
    rec.escape_step = 0;
    return rec;
  }
  for (std::int64_t k = 1; k <= steps; ++k) {
    auto [zn, wn] = F.step(z, w);
    if (!is_finite(zn) || !is_finite(wn)) {
      rec.termination = orbit_termination::overflowed;
      rec.overflow_step = k;
      return rec;
    }
    z = zn;
    w = wn;
    bool crossing = escape_radius && std::abs(z) > *escape_radius;
    if (k % stride == 0 || crossing || k == steps) {
      push(k);
      rec.last_step = k;
    }
    if (crossing) {
      rec.termination = orbit_termination::escaped;
      rec.escape_step = k;
      return rec;
    }
  }
  rec.termination = orbit_termination::completed;
  return rec;
}

orbit_classification classify_orbit(const orbit_record& rec, double R, double B, int m) {
  if (!(R > B && B > 0)) throw std::invalid_argument("classify_orbit requires R > B > 0");
  if (m < 1) throw std::invalid_argument("classify_orbit requires m >= 1");
  orbit_classification out;
  out.overflowed = rec.termination == orbit_termination::overflowed;
  out.max_abs_z = rec.max_abs_z();
  out.escape_step = rec.escape_step;
  if (rec.points.empty()) {
    out.note = "empty record";
    return out;
  }

  // Oscillation: some |z| > R with a later return below B.
  for (std::size_t i = 0; i < rec.points.size(); ++i) {
    if (std::abs(rec.points[i].z) > R) {
      out.exceed_step = rec.points[i].k;
      for (std::size_t j = i + 1; j < rec.points.size(); ++j) {
        if (std::abs(rec.points[j].z) < B) {
          out.reentry_step = rec.points[j].k;
          out.label = orbit_class::oscillating;
          out.note = "exceeded R then re-entered D(0,B)";
          return out;
        }
      }
      break;
    }
  }

  // Escape: final |z| above R with a nondecreasing tail of up to m steps.
  const auto& pts = rec.points;
  if (std::abs(pts.back().z) > R) {
    bool monotone = true;
    std::size_t lo = pts.size() > static_cast<std::size_t>(m) ? pts.size() - 1 - m : 0;
    for (std::size_t i = lo; i + 1 < pts.size(); ++i)
      if (std::abs(pts[i].z) > std::abs(pts[i + 1].z)) {
        monotone = false;
        break;
      }
    if (monotone) {
      out.label = orbit_class::escaping;
      if (!out.escape_step) {
        for (const auto& p : pts)
          if (std::abs(p.z) > R) {
            out.escape_step = p.k;
            break;
          }
      }
      out.note = "crossed R with monotone tail";
      return out;
    }
    out.note = "final |z| > R but tail not monotone";
    return out;
  }

  if (rec.termination == orbit_termination::completed) {
    double mx = 0.0;
    for (const auto& p : pts) mx = std::max(mx, std::hypot(std::abs(p.z), std::abs(p.w)));
    if (mx <= B) {
      out.label = orbit_class::bounded;
      out.note = "completed horizon inside D(0,B)";
      return out;
    }
    out.note = "completed but exited D(0,B) without crossing R";
    return out;
  }
  out.note = out.overflowed ? "overflow before criterion met" : "stopped before criterion met";
  return out;
}

std::vector<cplx> fiber_orbit(const fn& f, cplx z0, std::int64_t steps) {
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (f->uses_w) throw std::invalid_argument("fiber orbit needs f = f(z)");
  std::vector<cplx> out;
  if (!is_finite(z0)) return out;
  out.push_back(z0);
  cplx z = z0;
  for (std::int64_t k = 1; k <= steps; ++k) {
    z = eval(f, z, cplx(0.0));
    if (!is_finite(z)) break;
    out.push_back(z);
  }
  return out;
}

std::vector<std::size_t> select_escaping_subsequence(const std::vector<cplx>& zs) {
  std::vector<std::size_t> idx;
  if (zs.empty()) return idx;
  idx.push_back(0);
  double runmax = std::abs(zs[0]);
  for (std::size_t m = 1; m < zs.size(); ++m) {
    if (!is_finite(zs[m])) break;
    double a = std::abs(zs[m]);
    if (a > runmax) {
      idx.push_back(m);
      runmax = a;
    }
  }
  return idx;
}

} // namespace skewfatou
