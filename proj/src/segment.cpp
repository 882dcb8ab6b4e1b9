#include "tsr/segment.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tsr/error.hpp"

namespace tsr {

// ============================================================================
// Connected-component labeling
// ============================================================================

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];  // path halving
    i = parent[i];
  }
  return i;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

}  // namespace

std::vector<Component> label_components(const BinaryImage& binary) {
  const int w = binary.width();
  const int h = binary.height();
  const auto& bits = binary.bits;

  // First pass: provisional labels, union-find over the 8-neighbors already
  // visited in raster order (W, NW, N, NE).
  Plane<int> labels = Plane<int>::Zero(h, w);
  std::vector<int> parent(1, 0);  // slot 0 unused (0 = background)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bits(y, x)) continue;
      int neighbor[4];
      int n = 0;
      if (x > 0 && bits(y, x - 1)) neighbor[n++] = labels(y, x - 1);
      if (y > 0) {
        if (x > 0 && bits(y - 1, x - 1)) neighbor[n++] = labels(y - 1, x - 1);
        if (bits(y - 1, x)) neighbor[n++] = labels(y - 1, x);
        if (x + 1 < w && bits(y - 1, x + 1)) neighbor[n++] = labels(y - 1, x + 1);
      }
      if (n == 0) {
        const int fresh = static_cast<int>(parent.size());
        parent.push_back(fresh);
        labels(y, x) = fresh;
        continue;
      }
      int best = neighbor[0];
      for (int i = 1; i < n; ++i) best = std::min(best, neighbor[i]);
      labels(y, x) = best;
      for (int i = 0; i < n; ++i) unite(parent, best, neighbor[i]);
    }
  }

  // Second pass: compact roots into dense component indices (first-seen
  // raster order) and gather extents.
  struct Extent {
    int x0, y0, x1, y1;
    long long area = 0;
  };
  std::vector<int> compact(parent.size(), -1);
  std::vector<Extent> extents;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bits(y, x)) continue;
      const int root = find_root(parent, labels(y, x));
      int idx = compact[root];
      if (idx < 0) {
        idx = static_cast<int>(extents.size());
        compact[root] = idx;
        extents.push_back(Extent{x, y, x, y, 0});
      }
      labels(y, x) = idx + 1;  // reuse the plane for the final pass
      Extent& e = extents[idx];
      e.x0 = std::min(e.x0, x);
      e.y0 = std::min(e.y0, y);
      e.x1 = std::max(e.x1, x);
      e.y1 = std::max(e.y1, y);
      ++e.area;
    }
  }

  // Materialize masks.
  std::vector<Component> components(extents.size());
  for (std::size_t i = 0; i < extents.size(); ++i) {
    const Extent& e = extents[i];
    Component& c = components[i];
    c.bbox = Rect{e.x0, e.y0, e.x1 - e.x0 + 1, e.y1 - e.y0 + 1};
    c.area = e.area;
    c.mask = Plane<std::uint8_t>::Zero(c.bbox.h, c.bbox.w);
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = labels(y, x);
      if (l == 0) continue;
      Component& c = components[l - 1];
      c.mask(y - c.bbox.y, x - c.bbox.x) = 1;
    }
  }

  // Sort by left edge (ties: top edge, then discovery order) and hand out
  // dense 1-based labels in that order.
  std::vector<int> order(components.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (components[a].bbox.x != components[b].bbox.x)
      return components[a].bbox.x < components[b].bbox.x;
    return components[a].bbox.y < components[b].bbox.y;
  });
  std::vector<Component> sorted;
  sorted.reserve(components.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.push_back(std::move(components[order[i]]));
    sorted.back().label = static_cast<int>(i) + 1;
  }
  return sorted;
}

// ============================================================================
// Digit filtering
// ============================================================================

std::vector<Component> filter_digits(const std::vector<Component>& components,
                                     int roi_height) {
  // Individual plausibility: height band, aspect band, fill ratio.
  std::vector<const Component*> plausible;
  for (const Component& c : components) {
    const double height_frac =
        static_cast<double>(c.bbox.h) / static_cast<double>(roi_height);
    if (height_frac < 0.30 || height_frac > 0.85) continue;
    const double aspect =
        static_cast<double>(c.bbox.w) / static_cast<double>(c.bbox.h);
    if (aspect < 0.15 || aspect > 0.95) continue;
    const double fill =
        static_cast<double>(c.area) / static_cast<double>(c.bbox.area());
    if (fill < 0.25) continue;
    plausible.push_back(&c);
  }
  if (plausible.empty()) return {};

  // Left-to-right by centroid x (the input is bbox-left sorted already, but
  // centroids are the contract).
  std::stable_sort(plausible.begin(), plausible.end(),
                   [](const Component* a, const Component* b) {
                     return a->bbox.cx() < b->bbox.cx();
                   });

  // Mutual height consistency: pick the best contiguous run of <= 3 whose
  // members all sit within 25% of the run's median height.  Best = most
  // members, ties by total area, further ties to the leftmost run.
  const int n = static_cast<int>(plausible.size());
  int best_start = 0, best_len = 0;
  long long best_area = -1;
  for (int start = 0; start < n; ++start) {
    for (int len = 1; len <= 3 && start + len <= n; ++len) {
      std::vector<int> heights;
      heights.reserve(len);
      long long area = 0;
      for (int i = start; i < start + len; ++i) {
        heights.push_back(plausible[i]->bbox.h);
        area += plausible[i]->area;
      }
      std::sort(heights.begin(), heights.end());
      const double median =
          len % 2 ? heights[len / 2]
                  : 0.5 * (heights[len / 2 - 1] + heights[len / 2]);
      bool consistent = true;
      for (int i = start; i < start + len; ++i) {
        if (std::abs(plausible[i]->bbox.h - median) > 0.25 * median) {
          consistent = false;
          break;
        }
      }
      if (!consistent) continue;
      if (len > best_len || (len == best_len && area > best_area)) {
        best_start = start;
        best_len = len;
        best_area = area;
      }
    }
  }
  if (best_len == 0) return {};

  std::vector<Component> kept;
  kept.reserve(best_len);
  for (int i = best_start; i < best_start + best_len; ++i) {
    kept.push_back(*plausible[i]);
  }
  return kept;
}

// ============================================================================
// Glyph normalization
// ============================================================================

DigitGlyph normalize_glyph(const Component& component) {
  const int sw = component.bbox.w;
  const int sh = component.bbox.h;

  // Fit inside the canvas preserving aspect: the major dimension maps to the
  // full canvas, the minor one scales along (rounded up so thin strokes keep
  // at least their proportional width).
  int tw, th;
  if (sw >= sh) {
    tw = kGlyphSize;
    th = std::min(kGlyphSize,
                  static_cast<int>(std::ceil(
                      static_cast<double>(sh) * kGlyphSize / sw)));
  } else {
    th = kGlyphSize;
    tw = std::min(kGlyphSize,
                  static_cast<int>(std::ceil(
                      static_cast<double>(sw) * kGlyphSize / sh)));
  }
  tw = std::max(tw, 1);
  th = std::max(th, 1);

  // Bilinear sample of the membership mask: target pixel centers map back
  // into source space, clamped at the borders.
  Plane<float> scaled(th, tw);
  const double sx_ratio = static_cast<double>(sw) / tw;
  const double sy_ratio = static_cast<double>(sh) / th;
  for (int ty = 0; ty < th; ++ty) {
    const double sy = (ty + 0.5) * sy_ratio - 0.5;
    const int y0 = static_cast<int>(std::floor(sy));
    const double fy = sy - y0;
    const int yc0 = std::clamp(y0, 0, sh - 1);
    const int yc1 = std::clamp(y0 + 1, 0, sh - 1);
    for (int tx = 0; tx < tw; ++tx) {
      const double sx = (tx + 0.5) * sx_ratio - 0.5;
      const int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      const int xc0 = std::clamp(x0, 0, sw - 1);
      const int xc1 = std::clamp(x0 + 1, 0, sw - 1);
      const double v00 = component.mask(yc0, xc0);
      const double v01 = component.mask(yc0, xc1);
      const double v10 = component.mask(yc1, xc0);
      const double v11 = component.mask(yc1, xc1);
      const double top = v00 + (v01 - v00) * fx;
      const double bot = v10 + (v11 - v10) * fx;
      scaled(ty, tx) = static_cast<float>(top + (bot - top) * fy);
    }
  }

  DigitGlyph glyph;
  glyph.bitmap = Plane<float>::Zero(kGlyphSize, kGlyphSize);
  const int ox = (kGlyphSize - tw) / 2;
  const int oy = (kGlyphSize - th) / 2;
  glyph.bitmap.block(oy, ox, th, tw) = scaled;
  glyph.source_bbox = component.bbox;
  return glyph;
}

// ============================================================================
// ROI segmentation
// ============================================================================

std::vector<DigitGlyph> segment_roi(const GrayFrame& frame,
                                    const ShapeCandidate& candidate,
                                    const SegmentConfig& cfg) {
  const Rect roi = candidate.inner;
  if (roi.empty() || !roi.inside(frame.width(), frame.height())) return {};
  if (roi.w < 4 || roi.h < 4) return {};

  // Window: nearest odd to half the ROI height, floored at 3.
  const int window = std::max(3, 2 * (roi.h / 4) + 1);
  const BinaryImage binary =
      adaptive_threshold(frame, roi, window, cfg.offset);

  const std::vector<Component> kept =
      filter_digits(label_components(binary), roi.h);

  std::vector<DigitGlyph> glyphs;
  glyphs.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    DigitGlyph g = normalize_glyph(kept[i]);
    g.order_index = static_cast<int>(i);
    g.source_bbox.x += roi.x;
    g.source_bbox.y += roi.y;
    glyphs.push_back(std::move(g));
  }
  return glyphs;
}

}  // namespace tsr
