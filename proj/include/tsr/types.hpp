#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>

namespace tsr {

/// Dense row-major raster plane; element (row, col) == pixel (y, x).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ShapeKind { Circle, Rectangle };

enum class RegionMode { EU, US };

/// Axis-aligned integer rectangle covering columns [x, x+w) and rows [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool empty() const { return w <= 0 || h <= 0; }
  long long area() const { return empty() ? 0 : static_cast<long long>(w) * h; }
  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }

  bool contains(int px, int py) const {
    return px >= x && px < right() && py >= y && py < bottom();
  }

  /// True when the rectangle lies entirely within a frame of the given size.
  bool inside(int frame_w, int frame_h) const {
    return x >= 0 && y >= 0 && right() <= frame_w && bottom() <= frame_h;
  }

  Rect intersect(const Rect& o) const {
    const int x0 = std::max(x, o.x);
    const int y0 = std::max(y, o.y);
    const int x1 = std::min(right(), o.right());
    const int y1 = std::min(bottom(), o.bottom());
    if (x1 <= x0 || y1 <= y0) return Rect{};
    return Rect{x0, y0, x1 - x0, y1 - y0};
  }

  bool operator==(const Rect& o) const = default;
};

inline double iou(const Rect& a, const Rect& b) {
  const long long inter = a.intersect(b).area();
  if (inter == 0) return 0.0;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace tsr
