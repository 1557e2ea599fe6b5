#include "skewfatou/criteria.hpp"
#include "skewfatou/expr.hpp"
#include "skewfatou/fit.hpp"
#include "skewfatou/orbit.hpp"
#include "skewfatou/render.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace skewfatou;

namespace {

skew_product quad_map() {
  return skew_product(parse_expr("z^2 - 1", var_kind::z), parse_expr("0.5*w", var_kind::w),
                      parse_expr("z*w + 1", var_kind::z));
}

} // namespace

static void bm_orbit_bounded(benchmark::State& state) {
  skew_product F = quad_map();
  const std::int64_t steps = state.range(0);
  for (auto _ : state) {
    orbit_record rec = iterate(F, cplx(0.1, 0.2), cplx(1e-8, 0.0), steps);
    benchmark::DoNotOptimize(rec.points.back());
  }
  state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(bm_orbit_bounded)->Arg(256)->Arg(4096);

static void bm_orbit_escape_check(benchmark::State& state) {
  // early exit through the escape radius test dominates here
  skew_product F = quad_map();
  for (auto _ : state) {
    orbit_record rec = iterate(F, cplx(2.0, 0.0), cplx(0.0, 0.0), 1000, 1e6);
    benchmark::DoNotOptimize(rec.escape_step);
  }
}
BENCHMARK(bm_orbit_escape_check);

static void bm_expr_eval(benchmark::State& state) {
  fn e = parse_expr("exp(z)*z^3 - i*z*w + w^2 + 1", var_kind::z);
  cplx z(0.3, -0.8), w(0.01, 0.02);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval(e, z, w));
    z += cplx(1e-12, 0.0); // defeat loop-invariant hoisting
  }
}
BENCHMARK(bm_expr_eval);

static void bm_expr_log_modulus(benchmark::State& state) {
  // the overflow-safe path used by growth measurements at huge |z|
  fn e = parse_expr("z^3*exp(z)", var_kind::z);
  cplx z(1e6, 3.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_modulus_eval(e, z, cplx(0.0, 0.0)));
    z += cplx(1.0, 0.0);
  }
}
BENCHMARK(bm_expr_log_modulus);

static void bm_fit_two_disk(benchmark::State& state) {
  approx_problem p;
  p.pieces.push_back({disk{cplx(-2.0, 0.0), 0.5}, parse_expr("exp(z)", var_kind::z)});
  p.pieces.push_back({disk{cplx(2.0, 0.5), 0.45}, parse_expr("z^2 - 3", var_kind::z)});
  p.tolerance = 1e-15; // never met, so the sweep always runs to the cap
  p.max_degree = static_cast<int>(state.range(0));
  for (auto _ : state) {
    polynomial_fit f = fit_piecewise(p);
    benchmark::DoNotOptimize(f.errors[0].achieved);
  }
}
BENCHMARK(bm_fit_two_disk)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void bm_render_slice(benchmark::State& state) {
  skew_product F = quad_map();
  viewport view;
  const int w = static_cast<int>(state.range(0));
  const int h = (w * 2) / 3;
  for (auto _ : state) {
    escape_time_image img = render_slice(F, view, cplx(1e-6, 0.0), w, h, 64, 100.0);
    benchmark::DoNotOptimize(img.steps.data());
  }
  state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(bm_render_slice)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);

static void bm_bidisk_sup(benchmark::State& state) {
  fn h = parse_expr("exp(z)*w + z^2", var_kind::z);
  for (auto _ : state)
    benchmark::DoNotOptimize(sampled_sup_abs(h, cplx(1.0, 0.0), 0.5, 0.25));
}
BENCHMARK(bm_bidisk_sup)->Unit(benchmark::kMillisecond);

static void bm_escaping_subsequence(benchmark::State& state) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<cplx> zs(100000);
  double m = 1.0;
  for (auto& z : zs) {
    m *= 1.0001;
    z = m * cplx(U(rng), U(rng));
  }
  for (auto _ : state) {
    auto idx = select_escaping_subsequence(zs);
    benchmark::DoNotOptimize(idx.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(zs.size()));
}
BENCHMARK(bm_escaping_subsequence);

BENCHMARK_MAIN();
