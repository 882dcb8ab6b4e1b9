#pragma once

#include <string>
#include <vector>

#include "tsr/detect.hpp"
#include "tsr/segment.hpp"
#include "tsr/track.hpp"

namespace tsr {

/// Everything tunable about a pipeline run, with working defaults.  Loaded
/// from a flat key=value text file where every key is namespaced
/// (detector.r_min=8); unknown keys are hard errors so typos cannot silently
/// revert a knob to its default.
struct PipelineParams {
  DetectorConfig detector;
  SegmentConfig segment;
  double reject_threshold = 0.6;  ///< digit max-activation floor
  double margin = 0.15;           ///< digit max-vs-runner-up floor
  /// Smallest caption crop (pixels) the U.S. header verifier will rule on.
  /// Below this the caption letters are too small to tell SPEED from TRUCK
  /// captions apart, so the plate is left unverified until it grows.
  int header_min_height = 14;
  TrackerConfig tracker;
  std::vector<int> eu_values;  ///< defaults filled by constructor
  std::vector<int> us_values;

  PipelineParams();

  const std::vector<int>& values(RegionMode mode) const {
    return mode == RegionMode::EU ? eu_values : us_values;
  }
};

/// Parse config text (one key=value per line; blank lines and lines starting
/// with '#' ignored).  Throws ConfigError on unknown keys, bad values, or
/// lines without '='.
PipelineParams parse_config(const std::string& text);

/// Load from a file; throws IoError when unreadable.
PipelineParams load_config(const std::string& path);

}  // namespace tsr
