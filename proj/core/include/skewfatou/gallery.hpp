#pragma once

#include "skewfatou/orbit.hpp"

#include <vector>

namespace skewfatou {

// The quadratic family F(z,w) = (z^2 - w z^3, lambda*w): real slices started
// at (x0, y0) first escape, then flip sign once the product x_k y_k crosses 1.
struct poly_example {
  double lambda = 0.5;
  double x0 = 5.0;
  double delta = 0.01;
  int N = 0;         // least n with (lambda^2 x0)^(2^(n-1)) > 1/(1-lambda)
  int n0 = 0;        // least n >= N whose y-formula value drops below delta
  double y0 = 0.0;   // 1 / ((lambda x0)^(2^n0) * lambda^(n0-1))
  skew_product map;
};

// Requires lambda in (0,1), lambda*x0 > 1, lambda^2*x0 > 1, delta > 0.
poly_example make_poly_example(double lambda, double x0, double delta);

struct sign_flip_report {
  std::vector<double> xs; // x_0 .. x_{n0+1}
  std::vector<double> ys;
  bool positives_ok = false;  // x_k > 0 for k <= n0
  bool flip_ok = false;       // x_{n0+1} <= 0
  bool products_ok = false;   // x_k y_k < 1 - lambda for k < n0
  bool all_real = false;      // imaginary parts exactly zero along the run
};

sign_flip_report example_sign_flip(const poly_example& ex);

struct bisect_result {
  double y_tilde = 0.0;       // bounded-side endpoint of the final bracket
  double bracket_width = 0.0;
  std::vector<double> widths; // bracket width after each halving
  int steps = 0;
  double x_after = 0.0;       // x_{n0+1} started from (x0, y_tilde)
  double bound_cap = 0.0;     // x0^(2^n0)
  double orbit_max = 0.0;     // max |z_k| over the 200-step evidence orbit
  bool bounded = false;       // orbit_max <= bound_cap
};

// Bisects y in [0, y0] on the sign of x_{n0+1}, positive at 0 and nonpositive
// at y0, down to `tolerance` width; keeps halving (while the endpoints remain
// distinct doubles) until the bounded side lands near the zero of z^2 - w z^3,
// so the 200-step evidence orbit collapses instead of re-escaping.
bisect_result example_bisect_bounded(const poly_example& ex, double tolerance);

// f(z) = z + p(z) + T with p periodic of period T: the base map b(z) = z + p(z)
// has an attracting fixed point whose basin f translates by T each step.
struct baker_family {
  cplx T{0.0, 0.0};
  fn p;
  fn b; // z + p(z)
  fn f; // z + p(z) + T
  cplx fixed_point{0.0, 0.0};
  double fixed_point_defect = 0.0; // |b(z0) - z0|
  double derivative_abs = 0.0;     // |b'(z0)|, < 1
  double periodicity_defect = 0.0; // sampled max |p(z+T) - p(z)|
};

// Polishes the fixed point by damped Newton from the guess and validates:
// |b(z0) - z0| <= 1e-10, |b'(z0)| < 1, sampled periodicity defect < 1e-9.
baker_family make_baker_family(cplx T, const fn& p, cplx fixed_point_guess);

// T = 2*pi*i, p(z) = exp(-z) - 1: fixed point 0, b'(0) = 0.
baker_family default_baker();

} // namespace skewfatou
