#pragma once

#include <vector>

#include "tsr/detect.hpp"
#include "tsr/image.hpp"
#include "tsr/types.hpp"

namespace tsr {

/// Side length of the normalized glyph bitmap fed to the classifier.
inline constexpr int kGlyphSize = 16;

/// One 8-connected foreground region of a binary image.
struct Component {
  int label = 0;       ///< dense, 1-based
  Rect bbox;           ///< ROI coordinates
  long long area = 0;  ///< foreground pixel count
  Plane<std::uint8_t> mask;  ///< bbox.h x bbox.w membership bitmap
};

/// A digit candidate scaled onto the fixed classifier canvas.
struct DigitGlyph {
  Plane<float> bitmap;  ///< kGlyphSize x kGlyphSize, in [0,1], 1 = ink
  Rect source_bbox;     ///< frame coordinates of the original component
  int order_index = 0;  ///< 0-based left-to-right position
};

struct SegmentConfig {
  int offset = 8;  ///< adaptive-threshold luminance offset
};

/// 8-connected component labeling (union-find).  Labels are dense from 1;
/// result sorted by bbox left edge, ties by bbox top then label order.
std::vector<Component> label_components(const BinaryImage& binary);

/// Digit plausibility filter: keeps components whose bbox height is within
/// [0.30, 0.85] x roi_height, aspect w/h within [0.15, 0.95] and fill ratio
/// >= 0.25, then keeps the best run of at most 3 mutually height-consistent
/// components (each within 25% of the run's median height), ordered
/// left-to-right by centroid.
std::vector<Component> filter_digits(const std::vector<Component>& components,
                                     int roi_height);

/// Scale the component mask onto the 16x16 canvas, preserving aspect ratio
/// (bilinear, so edges come out gray), centered with background padding.
/// source_bbox is copied from the component (still ROI coordinates; callers
/// that know the ROI origin shift it afterwards).
DigitGlyph normalize_glyph(const Component& component);

/// Full per-candidate segmentation: adaptive threshold over the candidate's
/// inner region (window = nearest odd to roi_height/2), component labeling,
/// digit filtering, glyph normalization.  Glyph source boxes come back in
/// frame coordinates.  An empty result means "no digits here" — the caller's
/// cue that the candidate is not a speed sign.
std::vector<DigitGlyph> segment_roi(const GrayFrame& frame,
                                    const ShapeCandidate& candidate,
                                    const SegmentConfig& cfg);

}  // namespace tsr
