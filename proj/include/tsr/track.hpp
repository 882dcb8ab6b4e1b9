#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tsr/odr.hpp"
#include "tsr/types.hpp"

namespace tsr {

struct TrackerConfig {
  int min_hits = 2;                   ///< frames a value must be seen
  double confidence_threshold = 1.2;  ///< cumulative confidence to validate
  int max_gap = 3;                    ///< unmatched frames a track survives
  double gate_scale = 0.6;   ///< association gate: dist <= gate * max(size)
  double max_growth = 1.5;   ///< max apparent size ratio per elapsed frame
};

struct Track {
  std::int64_t track_id = 0;
  Rect last_bbox;
  std::int64_t last_seen_frame = 0;
  ShapeKind kind = ShapeKind::Circle;
  /// value -> sum of hypothesis confidences / number of hits.  Ordered map:
  /// iteration order (ascending value) is what makes ties land on the lower,
  /// fail-safe speed.
  std::map<int, double> value_confidence;
  std::map<int, int> value_hits;
  bool validated = false;
  std::optional<int> validated_value;
};

/// Emitted exactly once per track, at the moment validation triggers.
struct ValidatedSign {
  int value = 0;
  std::int64_t frame_of_validation = 0;
  Rect bbox;                ///< hypothesis bbox on the validating frame
  double confidence = 0.0;  ///< cumulative confidence of the validated value
  ShapeKind kind = ShapeKind::Circle;
  std::int64_t track_id = 0;
};

struct TrackerState {
  std::vector<Track> tracks;
  std::int64_t next_track_id = 1;
  std::int64_t last_frame = -1;  ///< -1 until the first step
};

/// track index <-> hypothesis index pairs plus leftover hypothesis indices.
struct Association {
  std::vector<std::pair<int, int>> matches;
  std::vector<int> unmatched_hypotheses;
};

/// Greedy best-first matching by ascending center distance.  A pair is
/// admissible when kinds agree, the center distance is within
/// gate_scale * max(track size, hypothesis size) (size = max of width and
/// height), and the size ratio stays below max_growth per elapsed frame.
Association associate(const std::vector<Track>& tracks,
                      const std::vector<SignHypothesis>& hypotheses,
                      std::int64_t frame_index, const TrackerConfig& cfg);

/// Advance one frame: match hypotheses to tracks, accumulate per-value
/// confidence, open tracks for unmatched hypotheses, drop tracks unmatched
/// longer than max_gap, and emit a ValidatedSign for any track that first
/// reaches min_hits hits and confidence_threshold cumulative confidence on
/// some value (argmax value, ties to the lower speed).  Throws SequenceError
/// when frame_index does not increase.
std::vector<ValidatedSign> step(TrackerState& state,
                                const std::vector<SignHypothesis>& hypotheses,
                                std::int64_t frame_index,
                                const TrackerConfig& cfg);

}  // namespace tsr
