#include "tsr/odr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsr/error.hpp"

namespace tsr {

std::optional<DigitReading> classify_glyph(const MlpParams& params,
                                           const DigitGlyph& glyph,
                                           double reject_threshold,
                                           double margin) {
  Eigen::VectorXd input(kGlyphSize * kGlyphSize);
  for (int y = 0; y < kGlyphSize; ++y) {
    for (int x = 0; x < kGlyphSize; ++x) {
      input(y * kGlyphSize + x) = glyph.bitmap(y, x);
    }
  }
  const Eigen::VectorXd out = mlp_forward(params, input);

  Eigen::Index argmax = 0;
  const double max = out.maxCoeff(&argmax);
  double second = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (i != argmax) second = std::max(second, out(i));
  }
  if (max < reject_threshold || (max - second) < margin) return std::nullopt;
  return DigitReading{static_cast<int>(argmax), max};
}

const std::vector<int>& default_values(RegionMode mode) {
  static const std::vector<int> eu = {10, 20, 30, 40,  45,  50,  60,
                                      70, 80, 90, 100, 110, 120, 130};
  static const std::vector<int> us = {10, 15, 20, 25, 30, 35, 40, 45,
                                      50, 55, 60, 65, 70, 75, 80, 85};
  return mode == RegionMode::EU ? eu : us;
}

std::optional<std::pair<int, double>> assemble_value(
    const std::vector<std::optional<DigitReading>>& readings, RegionMode mode,
    const std::vector<int>& valid_values) {
  const int n = static_cast<int>(readings.size());
  const bool count_ok = mode == RegionMode::EU ? (n == 2 || n == 3) : (n == 2);
  if (!count_ok) return std::nullopt;

  int value = 0;
  double log_sum = 0.0;
  for (const std::optional<DigitReading>& r : readings) {
    if (!r) return std::nullopt;
    value = value * 10 + r->digit;
    if (r->confidence <= 0.0) return std::nullopt;
    log_sum += std::log(r->confidence);
  }
  if (std::find(valid_values.begin(), valid_values.end(), value) ==
      valid_values.end())
    return std::nullopt;
  const double confidence = std::exp(log_sum / n);
  return std::make_pair(value, confidence);
}

// ============================================================================
// U.S. header verification
// ============================================================================

Eigen::VectorXd header_features(const GrayFrame& frame, const Rect& header) {
  if (header.empty() || !header.inside(frame.width(), frame.height()))
    throw BoundsError("header_features: region outside frame");

  // Bilinear resample of the header crop onto the fixed classifier canvas.
  Plane<double> crop(kHeaderFeatureHeight, kHeaderFeatureWidth);
  const double sx_ratio =
      static_cast<double>(header.w) / kHeaderFeatureWidth;
  const double sy_ratio =
      static_cast<double>(header.h) / kHeaderFeatureHeight;
  double lo = 255.0, hi = 0.0;
  for (int ty = 0; ty < kHeaderFeatureHeight; ++ty) {
    const double sy = (ty + 0.5) * sy_ratio - 0.5;
    const int y0 = static_cast<int>(std::floor(sy));
    const double fy = sy - y0;
    const int yc0 = header.y + std::clamp(y0, 0, header.h - 1);
    const int yc1 = header.y + std::clamp(y0 + 1, 0, header.h - 1);
    for (int tx = 0; tx < kHeaderFeatureWidth; ++tx) {
      const double sx = (tx + 0.5) * sx_ratio - 0.5;
      const int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      const int xc0 = header.x + std::clamp(x0, 0, header.w - 1);
      const int xc1 = header.x + std::clamp(x0 + 1, 0, header.w - 1);
      const double v00 = frame.pixels(yc0, xc0);
      const double v01 = frame.pixels(yc0, xc1);
      const double v10 = frame.pixels(yc1, xc0);
      const double v11 = frame.pixels(yc1, xc1);
      const double top = v00 + (v01 - v00) * fx;
      const double bot = v10 + (v11 - v10) * fx;
      const double v = top + (bot - top) * fy;
      crop(ty, tx) = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }

  // Contrast normalization with ink (dark) mapped toward 1.  A nearly flat
  // crop carries no text; map it to all zeros rather than amplifying noise.
  Eigen::VectorXd features = Eigen::VectorXd::Zero(kHeaderFeatureDim);
  const double range = hi - lo;
  if (range >= 16.0) {
    for (int ty = 0; ty < kHeaderFeatureHeight; ++ty) {
      for (int tx = 0; tx < kHeaderFeatureWidth; ++tx) {
        features(ty * kHeaderFeatureWidth + tx) = (hi - crop(ty, tx)) / range;
      }
    }
  }
  return features;
}

HeaderCheck us_header_check(const MlpParams& params, const GrayFrame& frame,
                            const Rect& header) {
  const Eigen::VectorXd out =
      mlp_forward(params, header_features(frame, header));
  if (out.size() != 2)
    throw ShapeError("us_header_check: verifier must have 2 outputs, has " +
                     std::to_string(out.size()));
  HeaderCheck check;
  check.confidence = out(0);
  check.accept = out(0) >= out(1) && out(0) >= 0.5;
  return check;
}

}  // namespace tsr
