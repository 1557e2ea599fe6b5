#include "skewfatou/gallery.hpp"

#include "skewfatou/util.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace skewfatou {

namespace {

skew_product poly_map(double lambda) {
  fn z = var_z();
  fn f = intpow(z, 2);
  fn h = mul(constant(cplx(-1.0, 0.0)), intpow(z, 3));
  fn g = mul(constant(cplx(lambda, 0.0)), var_w());
  return skew_product(f, g, h);
}

// x_{n0+1} of the real slice started at (x0, y). The whole run stays real
// because complex products of real values carry exact zero imaginary parts.
double x_after_flip(const poly_example& ex, double y) {
  cplx z(ex.x0, 0.0), w(y, 0.0);
  for (int k = 0; k <= ex.n0; ++k) {
    auto [zn, wn] = ex.map.step(z, w);
    z = zn;
    w = wn;
  }
  return z.real();
}

} // namespace

poly_example make_poly_example(double lambda, double x0, double delta) {
  if (!(lambda > 0.0 && lambda < 1.0) || !std::isfinite(lambda))
    throw std::invalid_argument("poly example: lambda must lie in (0,1)");
  if (!(x0 > 0.0) || !std::isfinite(x0))
    throw std::invalid_argument("poly example: x0 must be positive");
  if (!(lambda * x0 > 1.0))
    throw std::invalid_argument("poly example: need lambda*x0 > 1 (got " +
                                fmt_double(lambda * x0) + ")");
  if (!(lambda * lambda * x0 > 1.0))
    throw std::invalid_argument("poly example: need lambda^2*x0 > 1 (got " +
                                fmt_double(lambda * lambda * x0) + ")");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("poly example: delta must be positive");

  // Least n with (lambda^2 x0)^(2^(n-1)) > 1/(1-lambda), by repeated squaring.
  double bound = 1.0 / (1.0 - lambda);
  double s = lambda * lambda * x0;
  int bigN = 1;
  while (!(s > bound)) {
    s *= s;
    ++bigN;
    if (bigN > 64) throw std::runtime_error("poly example: escape threshold N not found by n=64");
  }

  // Least n >= N with 1/((lambda x0)^(2^n) * lambda^(n-1)) < delta.
  double t = lambda * x0;
  for (int i = 0; i < bigN; ++i) t *= t; // (lambda x0)^(2^N)
  double pw = 1.0;
  for (int i = 0; i < bigN - 1; ++i) pw *= lambda; // lambda^(N-1)
  int n0 = bigN;
  double y0 = 0.0;
  while (true) {
    double y = std::isfinite(t) ? 1.0 / (t * pw)
                                : std::exp(-(std::exp2(n0) * std::log(lambda * x0) +
                                             (n0 - 1) * std::log(lambda)));
    if (y < delta) {
      y0 = y;
      break;
    }
    t *= t;
    pw *= lambda;
    ++n0;
    if (n0 > 64) throw std::runtime_error("poly example: no n0 <= 64 meets delta");
  }
  return poly_example{lambda, x0, delta, bigN, n0, y0, poly_map(lambda)};
}

sign_flip_report example_sign_flip(const poly_example& ex) {
  sign_flip_report rep;
  cplx z(ex.x0, 0.0), w(ex.y0, 0.0);
  rep.all_real = true;
  rep.xs.push_back(z.real());
  rep.ys.push_back(w.real());
  for (int k = 0; k <= ex.n0; ++k) {
    auto [zn, wn] = ex.map.step(z, w);
    z = zn;
    w = wn;
    if (z.imag() != 0.0 || w.imag() != 0.0) rep.all_real = false;
    rep.xs.push_back(z.real());
    rep.ys.push_back(w.real());
  }
  rep.positives_ok = true;
  for (int k = 0; k <= ex.n0; ++k)
    if (!(rep.xs[static_cast<std::size_t>(k)] > 0.0)) rep.positives_ok = false;
  rep.flip_ok = rep.xs[static_cast<std::size_t>(ex.n0) + 1] <= 0.0;
  rep.products_ok = true;
  for (int k = 0; k < ex.n0; ++k)
    if (!(rep.xs[static_cast<std::size_t>(k)] * rep.ys[static_cast<std::size_t>(k)] <
          1.0 - ex.lambda))
      rep.products_ok = false;
  return rep;
}

bisect_result example_bisect_bounded(const poly_example& ex, double tolerance) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance))
    throw std::invalid_argument("bisect: tolerance must be positive");

  double lo = 0.0, hi = ex.y0;
  double flo = x_after_flip(ex, lo);
  double fhi = x_after_flip(ex, hi);
  if (!(flo > 0.0) || !(fhi <= 0.0))
    throw std::logic_error("bisect: sign flip not present on [0, y0] despite preconditions");

  // Stop only once the bounded side sits close enough to the fixed line z=0
  // that its evidence orbit collapses; near the root one unit in the last
  // place of y moves x_{n0+1} by a few 1e-3, so the settle target must stay
  // above that and the loop must stop when the bracket endpoints touch.
  constexpr double settle_target = 0x1p-10;
  bisect_result out;
  while (hi - lo > tolerance || lo == 0.0 || std::abs(flo) > settle_target) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break; // adjacent doubles, cannot refine further
    double fm = x_after_flip(ex, mid);
    if (fm > 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    out.widths.push_back(hi - lo);
    ++out.steps;
  }

  out.y_tilde = lo;
  out.bracket_width = hi - lo;
  out.x_after = flo;

  double cap = ex.x0;
  for (int i = 0; i < ex.n0; ++i) cap *= cap; // x0^(2^n0)
  out.bound_cap = cap;

  orbit_record rec = iterate(ex.map, cplx(ex.x0, 0.0), cplx(out.y_tilde, 0.0), 200);
  out.orbit_max = rec.max_abs_z();
  out.bounded = rec.termination != orbit_termination::escaped && out.orbit_max <= cap &&
                rec.termination != orbit_termination::overflowed;
  return out;
}

baker_family make_baker_family(cplx T, const fn& p, cplx fixed_point_guess) {
  if (!(std::abs(T) > 0.0) || !is_finite(T))
    throw std::invalid_argument("baker family: period T must be nonzero");
  if (!p) throw std::invalid_argument("baker family: p is required");
  if (p->uses_w) throw std::invalid_argument("baker family: p must depend on z only");

  fn pd = derivative(p, var_kind::z);

  // Fixed points of b(z) = z + p(z) are zeros of p; damped Newton on p.
  cplx z0 = fixed_point_guess;
  cplx pv = eval_z(p, z0);
  for (int iter = 0; iter < 200 && std::abs(pv) > 1e-13; ++iter) {
    cplx dv = eval_z(pd, z0);
    if (!is_finite(dv) || std::abs(dv) < 1e-300)
      throw std::runtime_error("baker family: p' vanished while polishing the fixed point");
    cplx step = pv / dv;
    double damp = 1.0;
    bool moved = false;
    while (damp >= 1.0 / 1024.0) {
      cplx cand = z0 - damp * step;
      cplx pc = eval_z(p, cand);
      if (is_finite(pc) && std::abs(pc) < std::abs(pv)) {
        z0 = cand;
        pv = pc;
        moved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!moved) break;
  }

  baker_family fam;
  fam.T = T;
  fam.p = p;
  fam.b = add(var_z(), p);
  fam.f = add(fam.b, constant(T));
  fam.fixed_point = z0;
  fam.fixed_point_defect = std::abs(pv);
  if (!(fam.fixed_point_defect <= 1e-10))
    throw std::runtime_error("baker family: no fixed point of z + p(z) near the guess (defect " +
                             fmt_double(fam.fixed_point_defect) + ")");

  fam.derivative_abs = std::abs(eval_z(derivative(fam.b, var_kind::z), z0));
  if (!(fam.derivative_abs < 1.0))
    throw std::runtime_error("baker family: fixed point is not attracting (|b'| = " +
                             fmt_double(fam.derivative_abs) + ")");

  double defect = 0.0;
  for (int t = 0; t < 48; ++t) {
    double r = 0.1 + 2.4 * static_cast<double>(t) / 47.0;
    double turn = 0.61803398874989485 * static_cast<double>(t + 1);
    turn -= std::floor(turn);
    double a = 2.0 * std::numbers::pi * turn;
    cplx z = z0 + r * cplx(std::cos(a), std::sin(a));
    defect = std::max(defect, std::abs(eval_z(p, z + T) - eval_z(p, z)));
  }
  fam.periodicity_defect = defect;
  if (!(defect < 1e-9))
    throw std::runtime_error("baker family: p is not T-periodic (sampled defect " +
                             fmt_double(defect) + ")");
  return fam;
}

baker_family default_baker() {
  fn p = sub(exponential(mul(constant(cplx(-1.0, 0.0)), var_z())), constant(cplx(1.0, 0.0)));
  return make_baker_family(cplx(0.0, 2.0 * std::numbers::pi), p, cplx(0.0, 0.0));
}

} // namespace skewfatou
