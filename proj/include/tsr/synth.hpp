#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsr/image.hpp"
#include "tsr/mlp.hpp"
#include "tsr/types.hpp"

namespace tsr {

// ============================================================================
// Sign rendering
// ============================================================================

/// Which caption a U.S.-style plate carries.  TruckSpeed renders the
/// "TRUCK SPEED" variant that the header verifier must reject.
enum class UsHeader { SpeedLimit, TruckSpeed };

struct SignSpec {
  RegionMode mode = RegionMode::EU;
  int value = 50;
  int font_variant = 0;       ///< 0..2, emulating cross-country glyph styles
  double stroke_scale = 1.0;  ///< multiplier on the variant's stroke width
  double tilt_deg = 0.0;      ///< in-plane rotation, |tilt| <= 15
  double scale = 60.0;        ///< overall sign height in pixels
  int foreground = 30;        ///< ink luminance
  int background = 230;       ///< plate luminance
  double noise_sigma = 0.0;   ///< additive Gaussian luminance noise
  std::uint64_t seed = 0;     ///< drives noise only; geometry is seed-free
  UsHeader us_header = UsHeader::SpeedLimit;
};

struct RenderedSign {
  GrayFrame patch;
  /// Coverage of the sign body (disc / plate) per pixel, in [0,1]; lets a
  /// scene compositor blend the patch over arbitrary background.
  Plane<float> alpha;
  /// Tight ink bounding box per digit, patch coordinates, left-to-right.
  std::vector<Rect> glyph_boxes;
  /// What a detector should report: EU = outer-circle bounding box,
  /// US = the dark border rectangle (axis-aligned hull when tilted).
  Rect sign_bbox;
  /// Exact sub-pixel ground truth in patch coordinates.  EU fills the circle
  /// fields (outer rim); US fills the border-rectangle corner positions with
  /// tilt applied, clockwise from top-left.
  double circle_cx = 0.0;
  double circle_cy = 0.0;
  double circle_radius = 0.0;
  std::array<std::array<double, 2>, 4> rect_corners{};
};

/// Deterministic sign renderer (vector-stroke glyphs, 3x3 supersampling).
/// Throws ArgumentError for a value outside the region's legal set, |tilt|
/// over 15 degrees, or a scale too small to carry readable digits.
RenderedSign render_sign(const SignSpec& spec);

// ============================================================================
// Training corpora
// ============================================================================

struct CorpusRanges {
  double noise_max = 6.0;
  double tilt_max = 5.0;
  /// Sign heights to train on.  The floor must reach down to the smallest
  /// signs the detector reports during an approach (~26 px), or live crops
  /// from early frames fall outside the training distribution and the
  /// caption verifier in particular misfires on them.
  double scale_min = 26.0;
  double scale_max = 90.0;
};

/// Balanced digit corpus: n_per_class examples of each digit 0..9 plus an
/// equal total of NEGATIVE examples (blob scatter, partial rims, texture
/// crops).  Digit features come from running the real segmentation path on
/// rendered signs and matching components to the renderer's glyph boxes —
/// there is no separate glyph rasterizer to drift from.
DigitDataset generate_digit_corpus(int n_per_class, const CorpusRanges& ranges,
                                   std::uint64_t seed);

/// Two-class caption corpus for the U.S. header verifier: n_per_class crops
/// of rendered "SPEED LIMIT" headers (label 0) and the same count of others
/// (label 1): "TRUCK SPEED" headers, blank plate, and texture crops.
DigitDataset generate_header_corpus(int n_per_class, const CorpusRanges& ranges,
                                    std::uint64_t seed);

// ============================================================================
// Scenario generation
// ============================================================================

struct TrajectoryPoint {
  double cx = 0.0;  ///< sign center, frame coordinates
  double cy = 0.0;
  double scale = 0.0;  ///< sign height in pixels on this frame
};

struct ScenarioSpec {
  int frame_count = 12;
  int width = 640;
  int height = 480;
  std::uint64_t seed = 1;
  /// nullopt = distractor-only sequence (no sign, truth has zero entries).
  std::optional<SignSpec> sign;
  /// One point per frame when a sign is present (monotone scale growth for
  /// an approach).  Ignored without a sign.
  std::vector<TrajectoryPoint> trajectory;
  int distractor_count = 0;
  double noise_sigma = 0.0;  ///< frame-wide additive noise
};

struct GroundTruth {
  int sign_id = 0;
  int value = 0;
  /// (frame index, bbox) for every frame the sign is visible.
  std::vector<std::pair<int, Rect>> frames;
};

struct GeneratedSequence {
  int frames_written = 0;
  std::optional<GroundTruth> truth;
};

/// Linear approach trajectory helper: scale grows scale_from -> scale_to
/// while the center drifts slightly; positions keep the sign fully inside
/// the frame.
std::vector<TrajectoryPoint> make_approach(const ScenarioSpec& spec,
                                           double scale_from, double scale_to);

/// Write frame_%06d.pgm files plus (optionally) a truth JSONL file.  Returns
/// the truth also in-memory.  Deterministic given the spec.  Throws IoError
/// when the directory cannot be written.
GeneratedSequence generate_sequence(const ScenarioSpec& spec,
                                    const std::string& out_dir,
                                    const std::string& truth_path = "");

}  // namespace tsr
