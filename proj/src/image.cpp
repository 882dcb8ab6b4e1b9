#include "tsr/image.hpp"

#include <cmath>
#include <string>

#include "tsr/error.hpp"

namespace tsr {

GradientField sobel(const GrayFrame& frame) {
  const int w = frame.width();
  const int h = frame.height();
  if (w < 3 || h < 3) {
    throw DimensionError("sobel: frame must be at least 3x3, got " +
                         std::to_string(w) + "x" + std::to_string(h));
  }

  GradientField field;
  field.gx = Plane<int>::Zero(h, w);
  field.gy = Plane<int>::Zero(h, w);
  field.magnitude = Plane<float>::Zero(h, w);

  const auto& p = frame.pixels;
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const int tl = p(y - 1, x - 1), tc = p(y - 1, x), tr = p(y - 1, x + 1);
      const int ml = p(y, x - 1), mr = p(y, x + 1);
      const int bl = p(y + 1, x - 1), bc = p(y + 1, x), br = p(y + 1, x + 1);
      const int gx = (tr + 2 * mr + br) - (tl + 2 * ml + bl);
      const int gy = (bl + 2 * bc + br) - (tl + 2 * tc + tr);
      field.gx(y, x) = gx;
      field.gy(y, x) = gy;
      field.magnitude(y, x) = static_cast<float>(
          std::hypot(static_cast<double>(gx), static_cast<double>(gy)));
    }
  }
  return field;
}

IntegralImage integral(const GrayFrame& frame) {
  const int w = frame.width();
  const int h = frame.height();
  IntegralImage img;
  img.table = Plane<std::uint64_t>::Zero(h + 1, w + 1);
  for (int y = 0; y < h; ++y) {
    std::uint64_t row_sum = 0;
    for (int x = 0; x < w; ++x) {
      row_sum += frame.pixels(y, x);
      img.table(y + 1, x + 1) = img.table(y, x + 1) + row_sum;
    }
  }
  return img;
}

BinaryImage adaptive_threshold(const GrayFrame& frame, const Rect& region,
                               int window, int offset) {
  if (window < 3 || window % 2 == 0) {
    throw ArgumentError("adaptive_threshold: window must be odd and >= 3, got " +
                        std::to_string(window));
  }
  if (!region.inside(frame.width(), frame.height()) || region.empty()) {
    throw BoundsError("adaptive_threshold: region " + std::to_string(region.x) +
                      "," + std::to_string(region.y) + " " +
                      std::to_string(region.w) + "x" + std::to_string(region.h) +
                      " exceeds frame " + std::to_string(frame.width()) + "x" +
                      std::to_string(frame.height()));
  }

  // Integral table over the region alone; the window never looks outside it.
  GrayFrame crop;
  crop.pixels = frame.pixels.block(region.y, region.x, region.h, region.w);
  const IntegralImage sums = integral(crop);

  const int half = window / 2;
  BinaryImage out;
  out.bits = Plane<std::uint8_t>::Zero(region.h, region.w);
  for (int y = 0; y < region.h; ++y) {
    const int y0 = std::max(0, y - half);
    const int y1 = std::min(region.h, y + half + 1);
    for (int x = 0; x < region.w; ++x) {
      const int x0 = std::max(0, x - half);
      const int x1 = std::min(region.w, x + half + 1);
      const std::uint64_t sum = sums.window_sum(x0, y0, x1, y1);
      const std::int64_t count = static_cast<std::int64_t>(x1 - x0) * (y1 - y0);
      // p < sum/count - offset, kept in integers so the comparison is exact
      // and invariant under shifting every pixel by the same constant.
      const std::int64_t lhs =
          (static_cast<std::int64_t>(crop.pixels(y, x)) + offset) * count;
      if (lhs < static_cast<std::int64_t>(sum)) out.bits(y, x) = 1;
    }
  }
  return out;
}

}  // namespace tsr
