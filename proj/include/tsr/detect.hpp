#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tsr/image.hpp"
#include "tsr/types.hpp"

namespace tsr {

// ============================================================================
// Candidate types
// ============================================================================

struct CircleCandidate {
  double cx = 0.0;   ///< sub-pixel center
  double cy = 0.0;
  double radius = 0.0;
  double score = 0.0;  ///< fraction of circumference supported by edges, [0,1]
};

struct RectCandidate {
  int x = 0;  ///< top-left corner of the upright bounding box
  int y = 0;
  int w = 0;
  int h = 0;
  double score = 0.0;  ///< mean edge-support fraction of the four sides, [0,1]
  /// Sub-pixel corner estimates from intersecting the four measured side
  /// lines, in order top-left, top-right, bottom-right, bottom-left.  Unlike
  /// the upright box these follow the plate's tilt.
  std::array<std::array<double, 2>, 4> corners{};
};

/// Unified candidate handed to segmentation: where the sign is, where to look
/// for digits, and (for rectangles) where the header caption would be.
struct ShapeCandidate {
  ShapeKind kind = ShapeKind::Circle;
  Rect bbox;                    ///< full sign extent
  Rect inner;                   ///< digit search region, inner ⊆ bbox
  std::optional<Rect> header;   ///< caption region above the digits (rect only)
  double score = 0.0;
};

/// All detector tuning in one place.
struct DetectorConfig {
  int r_min = 8;
  int r_max = 60;
  float magnitude_threshold = 120.0f;  ///< Sobel magnitude (0..~1443)
  double vote_threshold = 0.5;  ///< min edge-support fraction of the outline
  double aspect_min = 0.55;     ///< rectangle w/h band
  double aspect_max = 0.95;
  double nms_overlap = 0.6;     ///< IoU above which the weaker candidate dies
  int rect_min_side = 14;
  int rect_max_side = 160;
};

/// Throws ArgumentError on out-of-range configuration.
void validate(const DetectorConfig& cfg);

// ============================================================================
// Detection
// ============================================================================

/// Gradient-direction circular Hough transform.  Each strong-gradient pixel
/// votes along its gradient line (both senses) for centers at distance
/// r in [r_min, r_max]; accumulator peaks are refined to sub-pixel by a 3x3x3
/// centroid and re-scored by walking the circumference and counting samples
/// backed by a radially-oriented edge.  Candidates below vote_threshold or
/// poking outside the frame are dropped.  Result is sorted by descending
/// score, ties by (cy, cx).
std::vector<CircleCandidate> detect_circles(const GradientField& grad,
                                            const DetectorConfig& cfg);

/// Segment-pairing rectangle detector for axis-aligned (up to ~±10° tilt)
/// dark-on-light rectangular outlines.  Strong-gradient pixels are binned by
/// orientation into left/right/top/bottom edge masks, connected runs become
/// line segments, vertical pairs and horizontal pairs of matching length are
/// assembled into rectangles, and each rectangle is scored by re-walking its
/// four sides against the gradient field.  Result sorted by descending score,
/// ties by (y, x).
std::vector<RectCandidate> detect_rectangles(const GradientField& grad,
                                             const DetectorConfig& cfg);

/// Greedy non-maximum suppression over bounding-box IoU.  Input must be
/// sorted by descending score; the first of any overlapping group survives.
std::vector<ShapeCandidate> suppress_overlaps(
    const std::vector<ShapeCandidate>& candidates, const DetectorConfig& cfg);

// ============================================================================
// Candidate geometry
// ============================================================================

/// Circle -> ShapeCandidate.  The digit region is the inscribed square scaled
/// by 0.70 about the center, which keeps the rim band out of segmentation.
ShapeCandidate make_shape(const CircleCandidate& c);

/// Rectangle -> ShapeCandidate.  The border stroke is trimmed off, then the
/// interior splits into the caption header (upper 45%) and the digit region
/// (lower 55%).
ShapeCandidate make_shape(const RectCandidate& r);

}  // namespace tsr
