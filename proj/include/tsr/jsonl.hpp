#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsr/synth.hpp"
#include "tsr/types.hpp"

namespace tsr {

/// One line of a detection stream.  `kind` is "candidate", "hypothesis" or
/// "validated"; `shape` is "circle" or "rect".  `value` is absent for raw
/// candidates.  `confidence` carries the shape score for candidates, the
/// per-frame reading confidence for hypotheses and the accumulated track
/// confidence for validated rows.
struct DetectionRow {
  std::int64_t frame = 0;
  std::string kind;
  std::string shape;
  Rect bbox;
  std::optional<int> value;
  double confidence = 0.0;
};

/// Serializes one detection row as a single JSON line (keys in a fixed
/// alphabetical order so output is byte-deterministic) followed by '\n'.
void append_detection(std::ostream& out, const DetectionRow& row);

/// Parses a detection stream written by append_detection.  Throws IoError if
/// the file cannot be opened and ParseError (naming the line number) on
/// malformed rows.  Blank lines are ignored.
std::vector<DetectionRow> read_detections(const std::string& path);

/// Writes ground-truth sign descriptions, one JSON object per line.
void write_truth(const std::string& path, const std::vector<GroundTruth>& signs);

/// Reads a ground-truth file written by write_truth.  An empty file yields an
/// empty vector (a sequence with no signs).
std::vector<GroundTruth> read_truth(const std::string& path);

}  // namespace tsr
