#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tsr/image.hpp"
#include "tsr/mlp.hpp"
#include "tsr/segment.hpp"
#include "tsr/types.hpp"

namespace tsr {

// ============================================================================
// Digit reading and value assembly
// ============================================================================

struct DigitReading {
  int digit = 0;            ///< 0..9
  double confidence = 0.0;  ///< max output activation, in [0,1]
};

/// Run the digit network on a glyph.  Empty result = REJECT, which happens
/// iff the max output falls below reject_threshold or the max-to-runner-up
/// margin falls below `margin`.
std::optional<DigitReading> classify_glyph(const MlpParams& params,
                                           const DigitGlyph& glyph,
                                           double reject_threshold,
                                           double margin = 0.15);

/// Default legal speed values per region.
const std::vector<int>& default_values(RegionMode mode);

/// Concatenate per-glyph readings into a speed value.  Empty result = REJECT,
/// which happens iff any reading was REJECT, the digit count is outside
/// {2,3} (EU) / {2} (US), or the value is not in `valid_values`.  Confidence
/// is the geometric mean of the digit confidences.
std::optional<std::pair<int, double>> assemble_value(
    const std::vector<std::optional<DigitReading>>& readings, RegionMode mode,
    const std::vector<int>& valid_values);

// ============================================================================
// U.S. header verification
// ============================================================================

/// Header classifier input: the header region resampled to 48x16 and
/// contrast-normalized with ink mapped toward 1.  A region with luminance
/// range under 16 levels (blank plate, flat noise) maps to all zeros.
/// Exposed so training corpora and inference share one code path.
Eigen::VectorXd header_features(const GrayFrame& frame, const Rect& header);

inline constexpr int kHeaderFeatureWidth = 48;
inline constexpr int kHeaderFeatureHeight = 16;
inline constexpr int kHeaderFeatureDim =
    kHeaderFeatureWidth * kHeaderFeatureHeight;

struct HeaderCheck {
  bool accept = false;
  double confidence = 0.0;  ///< speed-limit-header output activation
};

/// Two-output verifier (output 0 = speed-limit header, output 1 = other).
/// Accepts iff output 0 >= output 1 and output 0 >= 0.5.  Throws BoundsError
/// when the header region leaves the frame.
HeaderCheck us_header_check(const MlpParams& params, const GrayFrame& frame,
                            const Rect& header);

// ============================================================================
// Per-frame recognition output
// ============================================================================

/// One recognized sign on one frame, before temporal validation.
struct SignHypothesis {
  std::int64_t frame_index = 0;
  Rect bbox;                ///< frame coordinates
  int value = 0;            ///< km/h (EU) or mph (US)
  double confidence = 0.0;  ///< in [0,1]
  ShapeKind kind = ShapeKind::Circle;
};

}  // namespace tsr
