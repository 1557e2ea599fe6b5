#pragma once

#include "skewfatou/orbit.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace skewfatou {

// Axis-aligned rectangle [x0,x1] x [y0,y1] in the z-plane.
struct viewport {
  double x0 = -2.0, y0 = -2.0, x1 = 2.0, y1 = 2.0;
};

struct escape_time_image {
  int width = 0, height = 0;
  viewport view;
  cplx w_slice;
  std::int64_t maxiter = 0;
  double escape_radius = 0.0;
  std::vector<std::int64_t> steps; // row-major from the top-left pixel

  std::int64_t at(int column, int row) const {
    return steps[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(column)];
  }
};

// Pixel (i,j) samples z = x0 + (i+0.5)*dx + i*(y1 - (j+0.5)*dy); the stored value
// is the first step with |z| > R (a non-finite step counts as escape there), or
// maxiter when the orbit never leaves. Rows are swept in parallel; the result is
// independent of the thread count.
escape_time_image render_slice(const skew_product& F, viewport view, cplx w_slice, int width,
                               int height, std::int64_t maxiter, double escape_radius,
                               unsigned threads = 0);

// Binary PGM, "P5", maxval 255, escape step scaled linearly into 0..255.
void write_pgm(const escape_time_image& img, std::ostream& out);

// Number of pixel positions with different stored steps. Pre: same dimensions.
std::size_t count_pixel_diff(const escape_time_image& a, const escape_time_image& b);

} // namespace skewfatou
