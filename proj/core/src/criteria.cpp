#include "skewfatou/criteria.hpp"

#include "skewfatou/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace skewfatou {

namespace {

cplx unit_angle(std::size_t t, std::size_t n) {
  double a = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
  return cplx(std::cos(a), std::sin(a));
}

// sup of |g(w)/w^d| on |w| = r; the ratio is holomorphic on the disk once g
// vanishes to order d at 0, so the boundary sup dominates the disk.
double ratio_sup(const fn& g, double r, int d, std::size_t n = 512) {
  double m = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    cplx w = r * unit_angle(t, n);
    double num = std::abs(eval(g, cplx(0.0, 0.0), w));
    double den = std::pow(r, d);
    double v = num / den;
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    m = std::max(m, v);
  }
  return m;
}

void require_fixes_zero(const fn& g, const char* who) {
  if (!g) throw std::invalid_argument(std::string(who) + ": g is required");
  if (g->uses_z) throw std::invalid_argument(std::string(who) + ": g must depend on w only");
  if (!(std::abs(eval(g, cplx(0.0, 0.0), cplx(0.0, 0.0))) <= 1e-12))
    throw std::invalid_argument(std::string(who) + ": g(0) must vanish");
}

// Least j with g^(j)(0) != 0, scanned symbolically up to j = 12; 0 if none.
int vanishing_order(const fn& g) {
  fn cur = g;
  for (int j = 1; j <= 12; ++j) {
    cur = derivative(cur, var_kind::w);
    if (std::abs(eval(cur, cplx(0.0, 0.0), cplx(0.0, 0.0))) > 1e-12) return j;
  }
  return 0;
}

struct super_frame {
  int d = 0;
  double C = 0.0;
  double delta_g = 0.0;
};

super_frame superattracting_frame(const fn& g, double probe_radius) {
  require_fixes_zero(g, "rho derivation");
  if (!(probe_radius > 0.0) || !std::isfinite(probe_radius))
    throw std::invalid_argument("rho derivation: probe radius must be positive");
  int d = vanishing_order(g);
  if (d == 0) throw std::invalid_argument("rho derivation: vanishing order of g undetectable (<= 12)");
  if (d == 1)
    throw std::invalid_argument("rho derivation: g is geometrically attracting (g'(0) != 0), "
                                "not superattracting");
  double delta = probe_radius;
  for (int tries = 0; tries < 200; ++tries) {
    double C = ratio_sup(g, delta, d);
    bool small_image = C * std::pow(delta, d) <= delta;    // g(D) stays inside D
    bool contracting = ratio_sup(g, delta, 1) <= 1.0;      // |g(w)| <= |w| on the disk
    if (std::isfinite(C) && C > 0.0 && small_image && contracting) return {d, C, delta};
    delta *= 0.5;
  }
  throw std::runtime_error("rho derivation: no admissible delta_g below the probe radius");
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(x.size());
  ym /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - xm) * (y[i] - ym);
    den += (x[i] - xm) * (x[i] - xm);
  }
  if (den == 0.0) throw std::invalid_argument("order estimate: degenerate radius ladder");
  return num / den;
}

} // namespace

double rho_at(const rho_sequence& rho, int k) {
  if (k < 0) throw std::invalid_argument("rho_at: negative index");
  if (k <= rho.K) return rho.values[static_cast<std::size_t>(k)];
  switch (rho.tag) {
    case rho_tag::geometric:
      return std::pow(rho.alpha, k) * rho.delta_g;
    case rho_tag::superattracting:
      return 0.0; // underflowed past the stored range
    case rho_tag::user:
      throw std::invalid_argument("rho_at: index " + std::to_string(k) +
                                  " beyond a user sequence of length " + std::to_string(rho.K + 1));
  }
  return 0.0;
}

bool check_rho_containment(const rho_sequence& rho, const fn& g, double slack) {
  require_fixes_zero(g, "rho containment");
  for (int k = 0; k < rho.K; ++k) {
    double rk = rho.values[static_cast<std::size_t>(k)];
    double rnext = rho.values[static_cast<std::size_t>(k) + 1];
    for (std::size_t t = 0; t < 256; ++t) {
      cplx w = rk * unit_angle(t, 256);
      if (!(std::abs(eval(g, cplx(0.0, 0.0), w)) <= rnext * (1.0 + slack))) return false;
    }
  }
  return true;
}

rho_sequence derive_rho_geometric(const fn& g, double probe_radius, int K) {
  require_fixes_zero(g, "rho derivation");
  if (!(probe_radius > 0.0) || !std::isfinite(probe_radius))
    throw std::invalid_argument("rho derivation: probe radius must be positive");
  if (K < 0) throw std::invalid_argument("rho derivation: K must be >= 0");
  double a1 = std::abs(eval(derivative(g, var_kind::w), cplx(0.0, 0.0), cplx(0.0, 0.0)));
  if (!(a1 < 1.0))
    throw std::invalid_argument("rho derivation: |g'(0)| = " + fmt_double(a1) +
                                " is not < 1 (fixed point not attracting)");

  double delta = probe_radius;
  double alpha = 0.0;
  bool found = false;
  for (int tries = 0; tries < 60 && !found; ++tries) {
    alpha = ratio_sup(g, delta, 1); // sup |g(w)/w|, attained on the boundary
    if (std::isfinite(alpha) && alpha < 1.0 && alpha > 0.0)
      found = true;
    else
      delta *= 0.5;
  }
  if (!found)
    throw std::runtime_error("rho derivation: no contraction radius found below the probe radius");

  rho_sequence rho;
  rho.tag = rho_tag::geometric;
  rho.alpha = alpha;
  rho.delta_g = delta;
  double v = delta;
  for (int k = 0; k <= K && v > 0.0; ++k) {
    rho.values.push_back(v);
    v *= alpha;
  }
  rho.K = static_cast<int>(rho.values.size()) - 1;
  if (!check_rho_containment(rho, g))
    throw std::runtime_error("rho derivation: sampled containment failed (geometric)");
  rho.containment_verified = true;
  return rho;
}

rho_sequence derive_rho_superattracting(const fn& g, double probe_radius, double t, int K) {
  super_frame fr = superattracting_frame(g, probe_radius);
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("rho derivation: t must be positive");
  if (!(t < fr.delta_g))
    throw std::invalid_argument("rho derivation: t = " + fmt_double(t) +
                                " must be below delta_g = " + fmt_double(fr.delta_g));
  if (K < 0) throw std::invalid_argument("rho derivation: K must be >= 0");

  rho_sequence rho;
  rho.tag = rho_tag::superattracting;
  rho.C_g = fr.C;
  rho.d = fr.d;
  rho.t = t;
  rho.delta_g = fr.delta_g;
  rho.D = std::log(fr.C) / (1.0 - fr.d);

  double v = t;
  for (int k = 0; k <= K && v >= 1e-300; ++k) {
    rho.values.push_back(v);
    v = fr.C * std::pow(v, fr.d);
  }
  rho.K = static_cast<int>(rho.values.size()) - 1;

  // Closed form rho_k = C^((1-d^k)/(1-d)) * t^(d^k), checked in log space.
  for (int k = 1; k <= rho.K; ++k) {
    double dk = std::pow(static_cast<double>(fr.d), k);
    double lr = (1.0 - dk) / (1.0 - fr.d) * std::log(fr.C) + dk * std::log(t);
    double closed = std::exp(lr);
    double rec = rho.values[static_cast<std::size_t>(k)];
    if (!(std::abs(rec - closed) <= 1e-10 * std::max(std::abs(closed), 1e-300)))
      throw std::runtime_error("rho derivation: recurrence and closed form disagree at k = " +
                               std::to_string(k));
  }
  if (!check_rho_containment(rho, g))
    throw std::runtime_error("rho derivation: sampled containment failed (superattracting)");
  rho.containment_verified = true;
  return rho;
}

rho_sequence user_rho(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("rho sequence: at least one value required");
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("rho sequence: values must be positive and finite");
  rho_sequence rho;
  rho.tag = rho_tag::user;
  rho.values = std::move(values);
  rho.K = static_cast<int>(rho.values.size()) - 1;
  return rho;
}

double sampled_sup_abs(const fn& h, cplx z_center, double z_radius, double w_radius,
                       std::size_t nz, std::size_t nw) {
  if (!h) throw std::invalid_argument("sup sampling: h is required");
  if (z_radius < 0.0 || w_radius < 0.0)
    throw std::invalid_argument("sup sampling: radii must be >= 0");
  std::size_t mz = h->uses_z ? nz : 1;
  std::size_t mw = h->uses_w ? nw : 1;
  double m = 0.0;
  for (std::size_t a = 0; a < mz; ++a) {
    cplx z = h->uses_z ? z_center + z_radius * unit_angle(a, mz) : z_center;
    for (std::size_t b = 0; b < mw; ++b) {
      cplx w = h->uses_w ? w_radius * unit_angle(b, mw) : cplx(0.0, 0.0);
      double v = std::abs(eval(h, z, w));
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      m = std::max(m, v);
    }
  }
  return m;
}

series_report series_test(const fn& h, const rho_sequence& rho, cplx z0, cplx T,
                          double delta, int K) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("series test: delta must be positive");
  if (K < 0) throw std::invalid_argument("series test: K must be >= 0");

  series_report rep;
  rep.K = K;
  {
    std::ostringstream os;
    switch (rho.tag) {
      case rho_tag::geometric:
        os << "rho geometric: alpha = " << fmt_double(rho.alpha)
           << ", delta_g = " << fmt_double(rho.delta_g);
        break;
      case rho_tag::superattracting:
        os << "rho superattracting: C_g = " << fmt_double(rho.C_g) << ", d = " << rho.d
           << ", t = " << fmt_double(rho.t) << ", D = " << fmt_double(rho.D);
        break;
      case rho_tag::user:
        os << "rho user-supplied, K = " << rho.K;
        break;
    }
    rep.constants = os.str();
  }

  double sum = 0.0;
  for (int k = 0; k <= K; ++k) {
    double rk = rho_at(rho, k);
    double term = 0.0;
    if (rk > 0.0) {
      double sup = sampled_sup_abs(h, z0 + static_cast<double>(k) * T, delta, rk);
      term = rk * sup;
    }
    if (!std::isfinite(term)) {
      rep.overflow = true;
      rep.verdict = series_verdict::inconclusive;
      return rep;
    }
    rep.terms.push_back(term);
    sum += term;
    rep.partial_sums.push_back(sum);
    if (k >= 1) {
      double prev = rep.terms[static_cast<std::size_t>(k) - 1];
      rep.ratios.push_back(prev > 0.0 ? term / prev
                                      : (term > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
    }
  }

  if (K >= 1) {
    std::size_t window = std::min<std::size_t>(10, rep.ratios.size());
    bool conv = true, nondec = true;
    double rmax = 0.0;
    for (std::size_t i = rep.ratios.size() - window; i < rep.ratios.size(); ++i) {
      if (!(rep.ratios[i] < 0.9)) conv = false;
      rmax = std::max(rmax, rep.ratios[i]);
      std::size_t k = i + 1;
      if (!(rep.terms[k] >= rep.terms[k - 1])) nondec = false;
    }
    if (conv) {
      rep.verdict = series_verdict::converged;
      double tail = rep.terms.back() * (rmax > 0.0 ? rmax / (1.0 - rmax) : 0.0);
      rep.sum_estimate = sum + tail;
    } else if (nondec) {
      rep.verdict = series_verdict::diverging;
    }
  }
  return rep;
}

order_estimate estimate_order(const fn& h, double r2, std::vector<double> ladder) {
  if (!h) throw std::invalid_argument("order estimate: h is required");
  if (!(r2 > 0.0) || !std::isfinite(r2))
    throw std::invalid_argument("order estimate: r2 must be positive");
  if (ladder.empty())
    for (int e = 6; e <= 14; ++e) ladder.push_back(std::exp2(e));
  if (ladder.size() < 2) throw std::invalid_argument("order estimate: ladder needs >= 2 radii");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i]))
      throw std::invalid_argument("order estimate: radii must be positive");
    if (i > 0 && !(ladder[i] > ladder[i - 1]))
      throw std::invalid_argument("order estimate: ladder must be strictly increasing");
  }

  order_estimate est;
  est.r2 = r2;
  est.radii = ladder;

  auto log_max_at = [&](double r, double rw) {
    std::size_t mz = h->uses_z ? 1024 : 1;
    std::size_t mw = h->uses_w ? 16 : 1;
    if (!h->uses_z && h->uses_w) mw = 1024;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < mz; ++a) {
      cplx z = h->uses_z ? r * unit_angle(a, mz) : cplx(0.0, 0.0);
      for (std::size_t b = 0; b < mw; ++b) {
        cplx w = h->uses_w ? rw * unit_angle(b, mw) : cplx(0.0, 0.0);
        double v;
        try {
          v = log_modulus_eval(h, z, w);
        } catch (const std::range_error&) {
          v = std::numeric_limits<double>::infinity();
        }
        m = std::max(m, v);
      }
    }
    return m;
  };

  for (double r : ladder) {
    double lm = log_max_at(r, r2);
    est.log_max.push_back(lm);
    est.loglog.push_back(lm > 1.0 ? std::log(lm) : 0.0);
  }

  std::size_t lo = std::min(ladder.size() / 2, ladder.size() - 2);
  std::vector<double> xs, ys;
  bool degenerate = true;
  for (std::size_t i = lo; i < ladder.size(); ++i) {
    if (est.log_max[i] == std::numeric_limits<double>::infinity())
      throw std::runtime_error("order estimate: |h| overflowed direct evaluation at r = " +
                               fmt_double(ladder[i]) + "; no structural log form available");
    if (est.log_max[i] != -std::numeric_limits<double>::infinity()) degenerate = false;
    xs.push_back(std::log(ladder[i]));
    ys.push_back(est.loglog[i]);
  }
  if (degenerate) {
    est.degenerate = true;
    est.rho1 = 0.0;
    return est;
  }
  est.rho1 = ls_slope(xs, ys);

  if (h->uses_w) {
    std::vector<double> yd;
    for (std::size_t i = lo; i < ladder.size(); ++i) {
      double lm = log_max_at(ladder[i], ladder[i]);
      if (lm == std::numeric_limits<double>::infinity())
        throw std::runtime_error("order estimate: diagonal overflow at r = " + fmt_double(ladder[i]));
      yd.push_back(lm > 1.0 ? std::log(lm) : 0.0);
    }
    est.diagonal = ls_slope(xs, yd);
  }
  return est;
}

growth_report growth_criterion_check(const fn& h, const fn& g, double probe_radius) {
  require_fixes_zero(g, "growth criterion");
  if (!(probe_radius > 0.0) || !std::isfinite(probe_radius))
    throw std::invalid_argument("growth criterion: probe radius must be positive");
  double a1 = std::abs(eval(derivative(g, var_kind::w), cplx(0.0, 0.0), cplx(0.0, 0.0)));
  if (!(a1 < 1.0))
    throw std::invalid_argument("growth criterion: |g'(0)| = " + fmt_double(a1) +
                                " is not < 1 (fixed point not attracting)");

  growth_report rep;
  order_estimate est = estimate_order(h);
  rep.rho1_estimate = est.rho1;

  if (a1 > 1e-12) {
    rep.g_kind = attraction_kind::geometric;
    rep.d = 1;
    if (est.rho1 < 1.0 - rep.band) {
      rep.verdict = growth_verdict::satisfied;
      rep.note = "geometric attraction and order(h) below 1";
    } else if (est.rho1 > 1.0 + rep.band) {
      rep.verdict = growth_verdict::not_satisfied;
      rep.note = "geometric attraction but order(h) above 1";
    } else {
      rep.verdict = growth_verdict::inconclusive;
      rep.note = "order estimate " + fmt_double(est.rho1) + " inside the band around 1";
    }
  } else {
    rep.g_kind = attraction_kind::superattracting;
    int d = vanishing_order(g);
    if (d < 2) {
      rep.verdict = growth_verdict::inconclusive;
      rep.note = "vanishing order of g undetectable";
      return rep;
    }
    rep.d = d;
    rep.verdict = growth_verdict::satisfied;
    rep.note = "superattracting fixed point; any finite order suffices";
  }

  if (rep.verdict == growth_verdict::satisfied) {
    try {
      rho_sequence rho;
      if (rep.g_kind == attraction_kind::geometric) {
        rho = derive_rho_geometric(g, probe_radius, 40);
      } else {
        super_frame fr = superattracting_frame(g, probe_radius);
        rho = derive_rho_superattracting(g, probe_radius, fr.delta_g * 0.5, 40);
      }
      cplx T(0.0, 2.0 * std::numbers::pi);
      rep.consistency = series_test(h, rho, cplx(0.0, 0.0), T, 0.5, std::min(40, rho.K));
    } catch (const std::exception& ex) {
      rep.note += std::string("; consistency series skipped: ") + ex.what();
    }
  }
  return rep;
}

shadowing_report shadowing_check(const skew_product& F, cplx z_start, cplx w_start,
                                 double delta, cplx T, int steps) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("shadowing: delta must be positive");
  if (!(std::abs(T) > 0.0) || !is_finite(T))
    throw std::invalid_argument("shadowing: T must be nonzero");
  if (steps < 1) throw std::invalid_argument("shadowing: steps must be >= 1");

  shadowing_report rep;

  // Tube index: nearest nonnegative l with z_start close to l*T.
  double proj = (z_start.real() * T.real() + z_start.imag() * T.imag()) / std::norm(T);
  rep.l = std::max<std::int64_t>(0, std::llround(proj));
  cplx base = static_cast<double>(rep.l) * T;
  if (!(std::abs(z_start - base) < 0.5 * delta))
    throw std::invalid_argument("shadowing: |z_start - l*T| = " + fmt_double(std::abs(z_start - base)) +
                                " is not below delta/2 = " + fmt_double(0.5 * delta));

  // p(z) = f(z) - z - T must be T-periodic near the tube.
  fn p = sub(sub(F.f, var_z()), constant(T));
  double defect = 0.0;
  for (int t = 0; t < 48; ++t) {
    double r = delta * static_cast<double>(t + 1) / 48.0;
    double turn = 0.61803398874989485 * static_cast<double>(t + 1);
    turn -= std::floor(turn);
    cplx z = base + r * unit_angle(static_cast<std::size_t>(turn * 4096.0), 4096);
    defect = std::max(defect, std::abs(eval_z(p, z + T) - eval_z(p, z)));
  }
  rep.periodicity_defect = defect;
  if (!(defect < 1e-9))
    throw std::invalid_argument("shadowing: p(z) = f(z) - z - T is not T-periodic (sampled defect " +
                                fmt_double(defect) + ")");

  double w0 = std::abs(w_start);
  bool have_rho = false;
  if (w0 > 0.0) {
    double a1 = std::abs(eval(derivative(F.g, var_kind::w), cplx(0.0, 0.0), cplx(0.0, 0.0)));
    if (a1 > 1e-12) {
      rep.rho = derive_rho_geometric(F.g, w0, steps);
    } else {
      super_frame fr = superattracting_frame(F.g, std::max(4.0 * w0, 0.125));
      if (!(w0 < fr.delta_g))
        throw std::invalid_argument("shadowing: |w_start| = " + fmt_double(w0) +
                                    " exceeds the superattracting radius delta_g = " +
                                    fmt_double(fr.delta_g));
      rep.rho = derive_rho_superattracting(F.g, fr.delta_g, w0, steps);
    }
    have_rho = true;
  } else {
    rep.note = "w_start = 0: unperturbed orbit, zero envelope";
  }
  auto env = [&](int k) { return have_rho ? rho_at(rep.rho, k) : 0.0; };

  const fn& h = F.h;
  rep.within_delta = rep.induction_ok = rep.chain_ok = rep.sum_bound_ok = rep.w_enveloped = true;

  cplx z = z_start, w = w_start;
  double running = 0.0;
  for (int k = 0; k <= steps; ++k) {
    if (!is_finite(z) || !is_finite(w)) {
      rep.note += (rep.note.empty() ? "" : "; ");
      rep.note += "orbit left the finite range at step " + std::to_string(k);
      rep.within_delta = rep.induction_ok = rep.chain_ok = rep.sum_bound_ok = false;
      break;
    }
    cplx center = static_cast<double>(rep.l + k) * T;
    double ek = std::abs(z - center);
    rep.e.push_back(ek);
    rep.bounds.push_back(running + 0.5 * delta);
    if (!(ek < delta)) rep.within_delta = false;
    if (!(ek < rep.bounds.back())) rep.induction_ok = false;
    if (!(rep.bounds.back() < delta)) rep.sum_bound_ok = false;
    if (!(std::abs(w) <= env(k) * (1.0 + 1e-9))) rep.w_enveloped = false;
    if (k == steps) break;

    double sup = sampled_sup_abs(h, center, delta, env(k));
    double inc = env(k) > 0.0 ? env(k) * sup : 0.0;
    if (!std::isfinite(inc)) {
      rep.note += (rep.note.empty() ? "" : "; ");
      rep.note += "perturbation budget overflowed at step " + std::to_string(k);
      rep.chain_ok = rep.induction_ok = rep.sum_bound_ok = false;
      inc = 0.0;
    }
    rep.increments.push_back(inc);
    running += inc;

    auto [zn, wn] = F.step(z, w);
    double enext = std::abs(zn - static_cast<double>(rep.l + k + 1) * T);
    if (is_finite(zn) && !(enext <= ek + inc + 1e-9 * std::max(1.0, ek) + 1e-15))
      rep.chain_ok = false;
    z = zn;
    w = wn;
  }
  rep.w_final_abs = std::abs(w);
  return rep;
}

} // namespace skewfatou
