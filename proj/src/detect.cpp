#include "tsr/detect.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tsr/error.hpp"
#include "tsr/segment.hpp"

namespace tsr {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTan22_5 = 0.41421356237309503;  // orientation band half-width
constexpr double kTiltSlackTan = 0.21255656167;   // tan 12°: segment width bound
constexpr double kCos30 = 0.86602540378443865;    // edge/normal agreement floor

}  // namespace

void validate(const DetectorConfig& cfg) {
  if (cfg.r_min < 4) throw ArgumentError("detector: r_min must be >= 4");
  if (cfg.r_min >= cfg.r_max)
    throw ArgumentError("detector: r_min must be below r_max");
  if (!(cfg.magnitude_threshold > 0))
    throw ArgumentError("detector: magnitude_threshold must be positive");
  if (!(cfg.vote_threshold > 0.0 && cfg.vote_threshold <= 1.0))
    throw ArgumentError("detector: vote_threshold must be in (0,1]");
  if (!(cfg.aspect_min > 0.0 && cfg.aspect_min <= cfg.aspect_max))
    throw ArgumentError("detector: aspect band must satisfy 0 < min <= max");
  if (!(cfg.nms_overlap > 0.0 && cfg.nms_overlap <= 1.0))
    throw ArgumentError("detector: nms_overlap must be in (0,1]");
  if (cfg.rect_min_side < 4 || cfg.rect_min_side >= cfg.rect_max_side)
    throw ArgumentError("detector: rect side bounds must satisfy 4 <= min < max");
}

// ============================================================================
// Circles
// ============================================================================

namespace {

/// Fraction of K circumference samples that have a strong, radially-oriented
/// edge within their 3x3 pixel neighborhood.
double circle_support(const GradientField& grad, double cx, double cy,
                      double r, float mag_threshold) {
  const int w = grad.width();
  const int h = grad.height();
  const int K = std::max(16, static_cast<int>(std::lround(2.0 * kPi * r)));
  int supported = 0;
  for (int k = 0; k < K; ++k) {
    const double theta = 2.0 * kPi * k / K;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const int ix = static_cast<int>(std::lround(cx + r * ct));
    const int iy = static_cast<int>(std::lround(cy + r * st));
    bool ok = false;
    for (int dy = -1; dy <= 1 && !ok; ++dy) {
      const int py = iy + dy;
      if (py < 0 || py >= h) continue;
      for (int dx = -1; dx <= 1; ++dx) {
        const int px = ix + dx;
        if (px < 0 || px >= w) continue;
        const float mag = grad.magnitude(py, px);
        if (mag < mag_threshold) continue;
        const double dot =
            std::abs(grad.gx(py, px) * ct + grad.gy(py, px) * st);
        if (dot >= kCos30 * mag) {
          ok = true;
          break;
        }
      }
    }
    supported += ok;
  }
  return static_cast<double>(supported) / K;
}

}  // namespace

std::vector<CircleCandidate> detect_circles(const GradientField& grad,
                                            const DetectorConfig& cfg) {
  validate(cfg);
  const int w = grad.width();
  const int h = grad.height();
  if (w < 3 || h < 3) return {};
  const int r_min = cfg.r_min;
  const int r_max = cfg.r_max;
  const int R = r_max - r_min + 1;

  // Edge pixels with unit gradient directions.
  struct EdgePx {
    float x, y, ux, uy;
  };
  static thread_local std::vector<EdgePx> edges;
  edges.clear();
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const float mag = grad.magnitude(y, x);
      if (mag < cfg.magnitude_threshold) continue;
      edges.push_back(EdgePx{static_cast<float>(x), static_cast<float>(y),
                             grad.gx(y, x) / mag, grad.gy(y, x) / mag});
    }
  }
  if (edges.empty()) return {};

  // 3D accumulator (cy, cx, r) at 1-pixel quantization plus its projection
  // over r.  Buffers are reused across calls: zeroing beats reallocating at
  // video rates.
  static thread_local std::vector<std::uint16_t> acc;
  static thread_local std::vector<std::uint32_t> proj;
  const std::size_t cells = static_cast<std::size_t>(w) * h * R;
  acc.assign(cells, 0);
  proj.assign(static_cast<std::size_t>(w) * h, 0);

  for (const EdgePx& e : edges) {
    for (int sense = 0; sense < 2; ++sense) {
      const float sx = sense ? -e.ux : e.ux;
      const float sy = sense ? -e.uy : e.uy;
      float px = e.x + r_min * sx;
      float py = e.y + r_min * sy;
      for (int r = r_min; r <= r_max; ++r, px += sx, py += sy) {
        if (px <= -0.5f || px >= w - 0.5f || py <= -0.5f || py >= h - 0.5f)
          continue;
        const int cx = static_cast<int>(px + 0.5f);
        const int cy = static_cast<int>(py + 0.5f);
        ++acc[(static_cast<std::size_t>(cy) * w + cx) * R + (r - r_min)];
        ++proj[static_cast<std::size_t>(cy) * w + cx];
      }
    }
  }

  // Candidate centers: 2D local maxima of the projected accumulator.
  const int floor2 = std::max(
      6, static_cast<int>(std::lround(0.25 * cfg.vote_threshold * 2.0 * kPi *
                                      r_min)));
  struct Col {
    std::uint32_t votes;
    int x, y;
  };
  std::vector<Col> cols;
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const std::uint32_t v = proj[static_cast<std::size_t>(y) * w + x];
      if (v < static_cast<std::uint32_t>(floor2)) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (proj[static_cast<std::size_t>(y + dy) * w + (x + dx)] > v) {
            peak = false;
            break;
          }
        }
      }
      if (peak) cols.push_back(Col{v, x, y});
    }
  }
  std::stable_sort(cols.begin(), cols.end(), [](const Col& a, const Col& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (cols.size() > 512) cols.resize(512);

  // Radius scan per candidate center with 3x3x3 pooling, then sub-pixel
  // centroid refinement and circumference verification.
  std::vector<CircleCandidate> found;
  std::vector<std::uint32_t> s3(R);
  for (const Col& col : cols) {
    std::fill(s3.begin(), s3.end(), 0);
    for (int dy = -1; dy <= 1; ++dy) {
      const int ay = col.y + dy;
      if (ay < 0 || ay >= h) continue;
      for (int dx = -1; dx <= 1; ++dx) {
        const int ax = col.x + dx;
        if (ax < 0 || ax >= w) continue;
        const std::uint16_t* base =
            &acc[(static_cast<std::size_t>(ay) * w + ax) * R];
        for (int ri = 0; ri < R; ++ri) s3[ri] += base[ri];
      }
    }
    for (int ri = 0; ri < R; ++ri) {
      const std::uint32_t pooled = s3[ri] + (ri > 0 ? s3[ri - 1] : 0u) +
                                   (ri + 1 < R ? s3[ri + 1] : 0u);
      const std::uint32_t lo = ri > 0
                                   ? s3[ri - 1] + (ri > 1 ? s3[ri - 2] : 0u) +
                                         s3[ri]
                                   : 0u;
      const std::uint32_t hi = ri + 1 < R
                                   ? s3[ri] + s3[ri + 1] +
                                         (ri + 2 < R ? s3[ri + 2] : 0u)
                                   : 0u;
      if (pooled < lo || pooled < hi) continue;  // not an r-local max
      if (ri > 0 && pooled == lo) continue;      // plateau: keep smallest ri
      const int r = r_min + ri;
      const std::uint32_t floor3 = static_cast<std::uint32_t>(std::max(
          8l, std::lround(0.5 * cfg.vote_threshold * 2.0 * kPi * r)));
      if (pooled < floor3) continue;

      // Centroid over the 3x3x3 accumulator block.
      double sw = 0, sx = 0, sy = 0, sr = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int ay = col.y + dy;
        if (ay < 0 || ay >= h) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int ax = col.x + dx;
          if (ax < 0 || ax >= w) continue;
          for (int dr = -1; dr <= 1; ++dr) {
            const int ar = ri + dr;
            if (ar < 0 || ar >= R) continue;
            const double v =
                acc[(static_cast<std::size_t>(ay) * w + ax) * R + ar];
            sw += v;
            sx += v * ax;
            sy += v * ay;
            sr += v * (r_min + ar);
          }
        }
      }
      if (sw <= 0) continue;
      CircleCandidate c;
      c.cx = sx / sw;
      c.cy = sy / sw;
      c.radius = sr / sw;
      if (c.cx - c.radius < 0 || c.cy - c.radius < 0 ||
          c.cx + c.radius > w - 1 || c.cy + c.radius > h - 1)
        continue;  // poking outside the frame
      c.score = circle_support(grad, c.cx, c.cy, c.radius,
                               cfg.magnitude_threshold);
      if (c.score >= cfg.vote_threshold) found.push_back(c);
    }
  }

  // Merge candidates describing the same sign.  Concentric rims (outer and
  // inner boundary of a dark ring) both verify near 1.0; the outer one is
  // the sign's extent, so it wins whenever its score is comparable.
  std::stable_sort(found.begin(), found.end(),
                   [](const CircleCandidate& a, const CircleCandidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.cy != b.cy) return a.cy < b.cy;
                     return a.cx < b.cx;
                   });
  std::vector<CircleCandidate> kept;
  for (const CircleCandidate& c : found) {
    bool merged = false;
    for (CircleCandidate& k : kept) {
      const double dist = std::hypot(c.cx - k.cx, c.cy - k.cy);
      if (dist <= std::max(4.0, 0.3 * std::max(c.radius, k.radius))) {
        if (c.radius > k.radius && c.score >= k.score - 0.15) k = c;
        merged = true;
        break;
      }
      // An off-centre circle whose center falls inside an accepted (higher
      // scoring) one traces interior clutter -- digit strokes grazing the
      // rim -- never a second sign: distinct signs do not overlap.  The
      // radius estimate sits anywhere in the rim band (both rim edges
      // vote), so gate on the center rather than on full containment.
      if (dist < 0.8 * k.radius) {
        merged = true;
        break;
      }
    }
    if (!merged) kept.push_back(c);
    if (kept.size() >= 64) break;
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const CircleCandidate& a, const CircleCandidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.cy != b.cy) return a.cy < b.cy;
                     return a.cx < b.cx;
                   });
  return kept;
}

// ============================================================================
// Rectangles
// ============================================================================

namespace {

/// One near-straight edge run: spans rows (vertical) or columns (horizontal)
/// [lo, hi] with per-end cross-coordinate centroids c0/c1 and overall mean
/// cross-coordinate.
struct EdgeSegment {
  int lo = 0, hi = 0;
  double c0 = 0.0, c1 = 0.0;
  double center = 0.0;
  double len = 0.0;
};

std::vector<EdgeSegment> extract_segments(const BinaryImage& mask,
                                          bool vertical, int min_len) {
  std::vector<EdgeSegment> segments;
  for (const Component& c : label_components(mask)) {
    const int len_dim = vertical ? c.bbox.h : c.bbox.w;
    const int thick_dim = vertical ? c.bbox.w : c.bbox.h;
    if (len_dim < min_len) continue;
    if (thick_dim > std::max(3.0, len_dim * kTiltSlackTan + 2.0)) continue;

    // Per-end centroids of the cross coordinate, plus the overall mean.
    double first_sum = 0, first_n = 0, last_sum = 0, last_n = 0;
    double all_sum = 0;
    for (int y = 0; y < c.bbox.h; ++y) {
      for (int x = 0; x < c.bbox.w; ++x) {
        if (!c.mask(y, x)) continue;
        const int along = vertical ? y : x;
        const double cross = vertical ? c.bbox.x + x : c.bbox.y + y;
        all_sum += cross;
        if (along == 0) {
          first_sum += cross;
          ++first_n;
        }
        if (along == len_dim - 1) {
          last_sum += cross;
          ++last_n;
        }
      }
    }
    EdgeSegment s;
    s.lo = vertical ? c.bbox.y : c.bbox.x;
    s.hi = vertical ? c.bbox.bottom() - 1 : c.bbox.right() - 1;
    s.c0 = first_n > 0 ? first_sum / first_n : 0.0;
    s.c1 = last_n > 0 ? last_sum / last_n : s.c0;
    s.center = all_sum / static_cast<double>(c.area);
    s.len = len_dim;
    segments.push_back(s);
  }
  // Longest first; keeps the interesting ones when capping.
  std::stable_sort(segments.begin(), segments.end(),
                   [](const EdgeSegment& a, const EdgeSegment& b) {
                     if (a.len != b.len) return a.len > b.len;
                     if (a.lo != b.lo) return a.lo < b.lo;
                     return a.center < b.center;
                   });
  if (segments.size() > 128) segments.resize(128);
  return segments;
}

/// Fraction of samples along the line (x0,y0)-(x1,y1) whose 3x3 neighborhood
/// holds a strong edge aligned with the unit normal (nx, ny), up to sign.
double side_support(const GradientField& grad, double x0, double y0, double x1,
                    double y1, double nx, double ny, float mag_threshold) {
  const int w = grad.width();
  const int h = grad.height();
  const double length = std::hypot(x1 - x0, y1 - y0);
  const int K = std::max(8, static_cast<int>(std::lround(length)));
  int supported = 0;
  for (int k = 0; k < K; ++k) {
    const double t = (k + 0.5) / K;
    const int ix = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    const int iy = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    bool ok = false;
    for (int dy = -1; dy <= 1 && !ok; ++dy) {
      const int py = iy + dy;
      if (py < 0 || py >= h) continue;
      for (int dx = -1; dx <= 1; ++dx) {
        const int px = ix + dx;
        if (px < 0 || px >= w) continue;
        const float mag = grad.magnitude(py, px);
        if (mag < mag_threshold) continue;
        const double dot =
            std::abs(grad.gx(py, px) * nx + grad.gy(py, px) * ny);
        if (dot >= kCos30 * mag) {
          ok = true;
          break;
        }
      }
    }
    supported += ok;
  }
  return static_cast<double>(supported) / K;
}

}  // namespace

std::vector<RectCandidate> detect_rectangles(const GradientField& grad,
                                             const DetectorConfig& cfg) {
  validate(cfg);
  const int w = grad.width();
  const int h = grad.height();
  if (w < 3 || h < 3) return {};

  // Orientation/polarity masks.  A dark outline on a lighter ground has its
  // outer-boundary gradients pointing away from the rectangle: left side
  // gx < 0, right side gx > 0, top gy < 0, bottom gy > 0.  Classifying by
  // polarity keeps the two boundary ridges of one stroke apart and pins each
  // mask to one side of the outline.
  BinaryImage left_mask, right_mask, top_mask, bottom_mask;
  left_mask.bits = Plane<std::uint8_t>::Zero(h, w);
  right_mask.bits = Plane<std::uint8_t>::Zero(h, w);
  top_mask.bits = Plane<std::uint8_t>::Zero(h, w);
  bottom_mask.bits = Plane<std::uint8_t>::Zero(h, w);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      if (grad.magnitude(y, x) < cfg.magnitude_threshold) continue;
      const double gx = grad.gx(y, x);
      const double gy = grad.gy(y, x);
      if (std::abs(gy) <= kTan22_5 * std::abs(gx)) {
        (gx < 0 ? left_mask : right_mask).bits(y, x) = 1;
      } else if (std::abs(gx) <= kTan22_5 * std::abs(gy)) {
        (gy < 0 ? top_mask : bottom_mask).bits(y, x) = 1;
      }
    }
  }

  const int min_len = std::max(8, static_cast<int>(std::lround(
                                      0.7 * cfg.rect_min_side)));
  const std::vector<EdgeSegment> lefts =
      extract_segments(left_mask, true, min_len);
  const std::vector<EdgeSegment> rights =
      extract_segments(right_mask, true, min_len);
  const std::vector<EdgeSegment> tops =
      extract_segments(top_mask, false, min_len);
  const std::vector<EdgeSegment> bottoms =
      extract_segments(bottom_mask, false, min_len);
  if (lefts.empty() || rights.empty() || tops.empty() || bottoms.empty())
    return {};

  std::vector<RectCandidate> found;
  for (const EdgeSegment& left : lefts) {
    for (const EdgeSegment& right : rights) {
      const double width = right.center - left.center;
      if (width < cfg.rect_min_side || width > cfg.rect_max_side) continue;
      const double len_max = std::max(left.len, right.len);
      if (std::abs(left.len - right.len) > 0.15 * len_max) continue;
      const double overlap = std::min<double>(left.hi, right.hi) -
                             std::max<double>(left.lo, right.lo) + 1.0;
      // Corners eat a fixed few pixels off every side (the gradient turns
      // diagonal there and leaves the orientation band), so grant a fixed
      // allowance on top of the proportional one or small plates starve.
      const double side_len = std::min(left.len, right.len);
      if (overlap < std::max(0.5 * side_len, 0.85 * side_len - 4.0)) continue;
      const double y_top = 0.5 * (left.lo + right.lo);
      const double y_bottom = 0.5 * (left.hi + right.hi);
      const double height = y_bottom - y_top;
      if (height < cfg.rect_min_side || height > cfg.rect_max_side) continue;

      // Best-aligned top and bottom sides for this vertical pair.
      const auto pick_horizontal = [&](const std::vector<EdgeSegment>& pool,
                                       double target_y) -> const EdgeSegment* {
        const EdgeSegment* best = nullptr;
        double best_key = -1.0;
        for (const EdgeSegment& s : pool) {
          if (std::abs(s.center - target_y) > 0.15 * height) continue;
          if (std::abs(s.len - width) > 0.3 * width) continue;
          const double xov = std::min<double>(s.hi, right.center) -
                             std::max<double>(s.lo, left.center) + 1.0;
          if (xov < std::max(0.5 * width, 0.85 * width - 5.0)) continue;
          const double key = xov - std::abs(s.center - target_y);
          if (key > best_key) {
            best_key = key;
            best = &s;
          }
        }
        return best;
      };
      const EdgeSegment* top = pick_horizontal(tops, y_top);
      if (!top) continue;
      const EdgeSegment* bottom = pick_horizontal(bottoms, y_bottom);
      if (!bottom) continue;

      RectCandidate rc;
      rc.x = static_cast<int>(std::lround(left.center));
      rc.y = static_cast<int>(std::lround(top->center));
      rc.w = static_cast<int>(std::lround(right.center - left.center)) + 1;
      rc.h = static_cast<int>(std::lround(bottom->center - top->center)) + 1;

      // Sub-pixel corners: each vertical side is the line x = a + b*y and
      // each horizontal side y = a + b*x, fitted through the segment's
      // per-end centroids.  Intersecting adjacent sides recovers the tilt
      // the upright box discards.
      const auto line_of = [](const EdgeSegment& s) {
        const double slope = (s.c1 - s.c0) / std::max(1.0, s.hi - s.lo + 0.0);
        return std::pair<double, double>{s.c0 - slope * s.lo, slope};
      };
      const auto [al, bl] = line_of(left);
      const auto [ar, br] = line_of(right);
      const auto [at, bt] = line_of(*top);
      const auto [ab, bb] = line_of(*bottom);
      const auto meet = [](double av, double bv, double ah, double bh) {
        // x = av + bv*y with y = ah + bh*x; slopes are small (tilt band).
        const double x = (av + bv * ah) / (1.0 - bv * bh);
        return std::array<double, 2>{x, ah + bh * x};
      };
      rc.corners[0] = meet(al, bl, at, bt);
      rc.corners[1] = meet(ar, br, at, bt);
      rc.corners[2] = meet(ar, br, ab, bb);
      rc.corners[3] = meet(al, bl, ab, bb);
      if (rc.w < cfg.rect_min_side || rc.w > cfg.rect_max_side) continue;
      if (rc.h < cfg.rect_min_side || rc.h > cfg.rect_max_side) continue;
      const double aspect = static_cast<double>(rc.w) / rc.h;
      if (aspect < cfg.aspect_min || aspect > cfg.aspect_max) continue;
      if (!Rect{rc.x, rc.y, rc.w, rc.h}.inside(w, h)) continue;

      // Score the four sides along the detected (possibly tilted) segment
      // lines, not the assembled upright box — at 7° of tilt the box line
      // drifts several pixels from the actual edge on long sides.
      const double score_left =
          side_support(grad, left.c0, left.lo, left.c1, left.hi, 1, 0,
                       cfg.magnitude_threshold);
      const double score_right =
          side_support(grad, right.c0, right.lo, right.c1, right.hi, 1, 0,
                       cfg.magnitude_threshold);
      const double score_top =
          side_support(grad, top->lo, top->c0, top->hi, top->c1, 0, 1,
                       cfg.magnitude_threshold);
      const double score_bottom =
          side_support(grad, bottom->lo, bottom->c0, bottom->hi, bottom->c1, 0,
                       1, cfg.magnitude_threshold);
      rc.score =
          0.25 * (score_left + score_right + score_top + score_bottom);
      if (rc.score < cfg.vote_threshold) continue;
      found.push_back(rc);
      if (found.size() >= 256) break;
    }
    if (found.size() >= 256) break;
  }

  // Same-sign duplicates (e.g. two vertical pairs sharing sides): keep the
  // higher score.
  std::stable_sort(found.begin(), found.end(),
                   [](const RectCandidate& a, const RectCandidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.y != b.y) return a.y < b.y;
                     return a.x < b.x;
                   });
  std::vector<RectCandidate> kept;
  for (const RectCandidate& c : found) {
    bool dup = false;
    for (const RectCandidate& k : kept) {
      if (iou(Rect{c.x, c.y, c.w, c.h}, Rect{k.x, k.y, k.w, k.h}) > 0.6) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(c);
    if (kept.size() >= 64) break;
  }
  return kept;
}

// ============================================================================
// Non-maximum suppression and candidate geometry
// ============================================================================

std::vector<ShapeCandidate> suppress_overlaps(
    const std::vector<ShapeCandidate>& candidates, const DetectorConfig& cfg) {
  std::vector<ShapeCandidate> kept;
  for (const ShapeCandidate& c : candidates) {
    bool drop = false;
    for (const ShapeCandidate& k : kept) {
      if (iou(c.bbox, k.bbox) > cfg.nms_overlap) {
        drop = true;
        break;
      }
    }
    if (!drop) kept.push_back(c);
  }
  return kept;
}

ShapeCandidate make_shape(const CircleCandidate& c) {
  ShapeCandidate s;
  s.kind = ShapeKind::Circle;
  s.score = c.score;
  const int x0 = static_cast<int>(std::lround(c.cx - c.radius));
  const int y0 = static_cast<int>(std::lround(c.cy - c.radius));
  const int x1 = static_cast<int>(std::lround(c.cx + c.radius));
  const int y1 = static_cast<int>(std::lround(c.cy + c.radius));
  s.bbox = Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  // Digit search area: inscribed square scaled by 0.70 — large enough for
  // three digits, small enough to keep the rim band out.
  const double half = 0.5 * 0.70 * std::sqrt(2.0) * c.radius;
  const int ix0 = static_cast<int>(std::lround(c.cx - half));
  const int iy0 = static_cast<int>(std::lround(c.cy - half));
  const int ix1 = static_cast<int>(std::lround(c.cx + half));
  const int iy1 = static_cast<int>(std::lround(c.cy + half));
  s.inner = Rect{ix0, iy0, ix1 - ix0 + 1, iy1 - iy0 + 1};
  return s;
}

ShapeCandidate make_shape(const RectCandidate& r) {
  ShapeCandidate s;
  s.kind = ShapeKind::Rectangle;
  s.score = r.score;
  s.bbox = Rect{r.x, r.y, r.w, r.h};
  const int inset =
      std::max(1, static_cast<int>(std::lround(0.10 * std::min(r.w, r.h))));
  const Rect interior{r.x + inset, r.y + inset, r.w - 2 * inset,
                      r.h - 2 * inset};
  // Caption sits above the digits: upper 45% / lower 55% of the interior.
  const int header_h = static_cast<int>(std::lround(0.45 * interior.h));
  s.header = Rect{interior.x, interior.y, interior.w, header_h};
  s.inner = Rect{interior.x, interior.y + header_h, interior.w,
                 interior.h - header_h};
  return s;
}

}  // namespace tsr
