#pragma once

#include <cstdint>
#include <optional>

#include "tsr/types.hpp"

namespace tsr {

// ============================================================================
// Raster types
// ============================================================================

/// Single grayscale frame.  Pixels are 8-bit luminance, 0 = black.
struct GrayFrame {
  Plane<std::uint8_t> pixels;
  std::int64_t frame_index = 0;
  std::optional<double> timestamp_ms;

  int width() const { return static_cast<int>(pixels.cols()); }
  int height() const { return static_cast<int>(pixels.rows()); }
};

/// Signed Sobel derivatives plus their Euclidean norm.
struct GradientField {
  Plane<int> gx;
  Plane<int> gy;
  Plane<float> magnitude;

  int width() const { return static_cast<int>(gx.cols()); }
  int height() const { return static_cast<int>(gx.rows()); }
};

/// Boolean raster; nonzero = foreground (ink).
struct BinaryImage {
  Plane<std::uint8_t> bits;

  int width() const { return static_cast<int>(bits.cols()); }
  int height() const { return static_cast<int>(bits.rows()); }
};

/// (height+1) x (width+1) cumulative-sum table.  Entry (y, x) holds the sum of
/// all pixels strictly above and left, so row 0 and column 0 are zero and any
/// axis-aligned window sum costs four lookups.
struct IntegralImage {
  Plane<std::uint64_t> table;

  int width() const { return static_cast<int>(table.cols()) - 1; }
  int height() const { return static_cast<int>(table.rows()) - 1; }

  /// Sum over the half-open pixel window [x0, x1) x [y0, y1).
  std::uint64_t window_sum(int x0, int y0, int x1, int y1) const {
    return table(y1, x1) + table(y0, x0) - table(y0, x1) - table(y1, x0);
  }
};

// ============================================================================
// Operations
// ============================================================================

/// 3x3 Sobel gradients.  The one-pixel border rim is left at zero gradient.
/// Throws DimensionError for frames smaller than 3x3.
GradientField sobel(const GrayFrame& frame);

/// Exact integer cumulative-sum table over the whole frame.
IntegralImage integral(const GrayFrame& frame);

/// Binarize `region` of `frame`: a pixel becomes foreground iff its luminance
/// is strictly below the mean of its window x window neighborhood (clamped to
/// the region, partial windows renormalized) minus `offset`.  The output has
/// the region's dimensions.  Throws BoundsError if the region leaves the
/// frame, ArgumentError if the window is even or < 3.
BinaryImage adaptive_threshold(const GrayFrame& frame, const Rect& region,
                               int window, int offset);

}  // namespace tsr
