#include "doctest.h"

#include "skewfatou/render.hpp"

#include <cmath>
#include <sstream>
#include <string>

using namespace skewfatou;

namespace {

skew_product quad_half() {
  return skew_product(parse_expr("z^2", var_kind::z), parse_expr("0.5*w", var_kind::w),
                      parse_expr("1", var_kind::z));
}

} // namespace

TEST_SUITE("render") {

TEST_CASE("escape steps on the invariant slice match direct fiber iteration") {
  skew_product F = quad_half();
  viewport vp{-2.0, -2.0, 2.0, 2.0};
  escape_time_image img = render_slice(F, vp, cplx(0.0, 0.0), 48, 48, 64, 4.0);
  REQUIRE(img.steps.size() == 48u * 48u);

  double dx = (vp.x1 - vp.x0) / 48.0, dy = (vp.y1 - vp.y0) / 48.0;
  int checked = 0;
  for (int j = 0; j < 48; j += 5)
    for (int i = 0; i < 48; i += 5) {
      cplx z(vp.x0 + (i + 0.5) * dx, vp.y1 - (j + 0.5) * dy);
      std::int64_t expect = 64;
      for (std::int64_t k = 0; k <= 64; ++k) {
        if (!(std::abs(z) <= 4.0) || !is_finite(z)) {
          expect = k;
          break;
        }
        z = z * z; // w = 0 reduces the map to the base polynomial
      }
      CAPTURE(i);
      CAPTURE(j);
      CHECK(img.at(i, j) == (expect > 64 ? 64 : expect));
      ++checked;
    }
  CHECK(checked == 100);
}

TEST_CASE("a tiny slice offset barely changes the picture") {
  skew_product F = quad_half();
  viewport vp{-2.0, -2.0, 2.0, 2.0};
  escape_time_image a = render_slice(F, vp, cplx(0.0, 0.0), 64, 64, 48, 4.0);
  escape_time_image b = render_slice(F, vp, cplx(1e-9, 0.0), 64, 64, 48, 4.0);
  std::size_t diff = count_pixel_diff(a, b);
  CHECK(diff <= (64u * 64u) / 1000); // under 0.1 percent of pixels
}

TEST_CASE("a viewport inside the basin saturates at maxiter") {
  skew_product F = quad_half();
  escape_time_image img = render_slice(F, viewport{-0.4, -0.4, 0.4, 0.4}, cplx(0.0, 0.0), 16, 16,
                                       32, 4.0);
  for (std::int64_t s : img.steps) CHECK(s == 32);
}

TEST_CASE("pgm output is binary, sized, and linearly scaled") {
  skew_product F = quad_half();
  escape_time_image img = render_slice(F, viewport{-2.0, -2.0, 2.0, 2.0}, cplx(0.0, 0.0), 32, 24,
                                       50, 4.0);
  std::ostringstream os;
  write_pgm(img, os);
  std::string bytes = os.str();
  std::string header = "P5\n32 24\n255\n";
  REQUIRE(bytes.size() == header.size() + 32u * 24u);
  CHECK(bytes.compare(0, header.size(), header) == 0);
  // spot-check the linear map from step count to gray level
  for (std::size_t p = 0; p < img.steps.size(); p += 97) {
    long want = std::lround(255.0 * static_cast<double>(img.steps[p]) / 50.0);
    CHECK(static_cast<unsigned char>(bytes[header.size() + p]) ==
          static_cast<unsigned char>(want > 255 ? 255 : want));
  }
}

TEST_CASE("the thread count never shows up in the pixels") {
  skew_product F = quad_half();
  viewport vp{-2.0, -1.5, 2.0, 1.5};
  escape_time_image a = render_slice(F, vp, cplx(0.01, 0.0), 40, 30, 40, 4.0, 1);
  escape_time_image b = render_slice(F, vp, cplx(0.01, 0.0), 40, 30, 40, 4.0, 3);
  CHECK(count_pixel_diff(a, b) == 0);
}

TEST_CASE("render validation") {
  skew_product F = quad_half();
  viewport vp{-2.0, -2.0, 2.0, 2.0};
  CHECK_THROWS_AS(render_slice(F, vp, cplx(0.0, 0.0), 0, 10, 10, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(render_slice(F, vp, cplx(0.0, 0.0), 10, 9000, 10, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(render_slice(F, vp, cplx(0.0, 0.0), 10, 10, 0, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(render_slice(F, vp, cplx(0.0, 0.0), 10, 10, 10, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(render_slice(F, viewport{2.0, -2.0, -2.0, 2.0}, cplx(0.0, 0.0), 10, 10, 10, 4.0),
                  std::invalid_argument);
  escape_time_image a = render_slice(F, vp, cplx(0.0, 0.0), 8, 8, 10, 4.0);
  escape_time_image b = render_slice(F, vp, cplx(0.0, 0.0), 8, 9, 10, 4.0);
  CHECK_THROWS_AS(count_pixel_diff(a, b), std::invalid_argument);
}

} // TEST_SUITE
