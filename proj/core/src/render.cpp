#include "skewfatou/render.hpp"

#include "skewfatou/parallel.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace skewfatou {

escape_time_image render_slice(const skew_product& F, viewport view, cplx w_slice, int width,
                               int height, std::int64_t maxiter, double escape_radius,
                               unsigned threads) {
  if (width < 1 || height < 1 || width > 8192 || height > 8192)
    throw std::invalid_argument("render: size must be within 1..8192 per side");
  if (maxiter < 1) throw std::invalid_argument("render: maxiter must be >= 1");
  if (!(escape_radius > 0.0)) throw std::invalid_argument("render: escape radius must be positive");
  if (!(view.x0 < view.x1) || !(view.y0 < view.y1))
    throw std::invalid_argument("render: viewport must have positive extent");

  escape_time_image img;
  img.width = width;
  img.height = height;
  img.view = view;
  img.w_slice = w_slice;
  img.maxiter = maxiter;
  img.escape_radius = escape_radius;
  img.steps.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);

  double dx = (view.x1 - view.x0) / static_cast<double>(width);
  double dy = (view.y1 - view.y0) / static_cast<double>(height);

  parallel_for(static_cast<std::size_t>(height), threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t row = r0; row < r1; ++row) {
      double y = view.y1 - (static_cast<double>(row) + 0.5) * dy;
      for (std::size_t col = 0; col < static_cast<std::size_t>(width); ++col) {
        double x = view.x0 + (static_cast<double>(col) + 0.5) * dx;
        cplx z(x, y), w = w_slice;
        std::int64_t step = maxiter;
        if (std::abs(z) > escape_radius) {
          step = 0;
        } else {
          for (std::int64_t k = 1; k <= maxiter; ++k) {
            auto [zn, wn] = F.step(z, w);
            z = zn;
            w = wn;
            if (!is_finite(z) || std::abs(z) > escape_radius) {
              step = k;
              break;
            }
          }
        }
        img.steps[row * static_cast<std::size_t>(width) + col] = step;
      }
    }
  });
  return img;
}

void write_pgm(const escape_time_image& img, std::ostream& out) {
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (std::int64_t s : img.steps) {
    long v = std::lround(255.0 * static_cast<double>(s) / static_cast<double>(img.maxiter));
    unsigned char byte = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
    out.put(static_cast<char>(byte));
  }
}

std::size_t count_pixel_diff(const escape_time_image& a, const escape_time_image& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("pixel diff: image dimensions differ");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.steps.size(); ++i)
    if (a.steps[i] != b.steps[i]) ++n;
  return n;
}

} // namespace skewfatou
