#include "doctest.h"

#include "skewfatou/parallel.hpp"
#include "skewfatou/util.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

using namespace skewfatou;

namespace {

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

} // namespace

TEST_SUITE("util") {

TEST_CASE("double formatting round-trips every value bit for bit") {
  std::vector<double> cases = {0.0,
                               -0.0,
                               1.0,
                               0.1,
                               1.0 / 3.0,
                               -2.5e-7,
                               1e308,
                               std::numeric_limits<double>::denorm_min(),
                               std::numeric_limits<double>::min(),
                               std::numeric_limits<double>::max(),
                               4.015625,
                               0.012656250000000001,
                               3.141592653589793};
  for (double x : cases) {
    CAPTURE(x);
    CHECK(same_bits(parse_double(fmt_double(x)), x));
  }
  CHECK(fmt_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(fmt_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(fmt_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("formatting is stable across repeated calls") {
  // reports are byte-compared between runs, so the text must be a pure function
  double x = 0.1 + 0.2;
  CHECK(fmt_double(x) == fmt_double(x));
  CHECK(fmt_cplx(cplx(x, -x)) == fmt_double(x) + "," + fmt_double(-x));
}

TEST_CASE("number parsing rejects trailing junk") {
  CHECK(parse_double("  1.5\t") == 1.5);
  CHECK(parse_double("-2e-3") == -2e-3);
  CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_double("1.5 2"), std::invalid_argument);
}

TEST_CASE("seeded engines are deterministic and stream-separated") {
  auto a = seeded_engine(42, 0);
  auto b = seeded_engine(42, 0);
  for (int i = 0; i < 8; ++i) CHECK(a() == b());

  auto c = seeded_engine(42, 1);
  auto d = seeded_engine(43, 0);
  bool differs_stream = false, differs_seed = false;
  auto a2 = seeded_engine(42, 0);
  for (int i = 0; i < 8; ++i) {
    auto base = a2();
    differs_stream = differs_stream || c() != base;
    differs_seed = differs_seed || d() != base;
  }
  CHECK(differs_stream);
  CHECK(differs_seed);
}

TEST_CASE("chunked reductions do not depend on the thread count") {
  std::size_t n = 100000;
  auto run = [&](unsigned threads) {
    return parallel_reduce<double>(
        n, threads, 0.0,
        [](std::size_t lo, std::size_t hi) {
          double s = 0.0;
          for (std::size_t i = lo; i < hi; ++i) s += std::sin(static_cast<double>(i)) * 1e-3;
          return s;
        },
        [](double a, double b) { return a + b; });
  };
  double t1 = run(1);
  CHECK(same_bits(t1, run(2)));
  CHECK(same_bits(t1, run(7)));
  CHECK(same_bits(t1, run(0)));
}

} // TEST_SUITE
