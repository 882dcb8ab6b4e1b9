#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsr/config.hpp"
#include "tsr/detect.hpp"
#include "tsr/image.hpp"
#include "tsr/mlp.hpp"
#include "tsr/odr.hpp"
#include "tsr/track.hpp"

namespace tsr {

// ============================================================================
// Per-frame processing
// ============================================================================

struct FrameReport {
  std::int64_t frame_index = 0;
  int candidates = 0;
  int hypotheses = 0;
  int events = 0;
  std::int64_t detect_us = 0;     ///< shape detection elapsed microseconds
  std::int64_t recognize_us = 0;  ///< segmentation + classification
  std::int64_t track_us = 0;      ///< tracker step
};

/// Detect -> segment -> recognize -> track, holding the models, tuning, and
/// tracker state for one sequence.  EU mode runs the circle detector only;
/// US mode runs the rectangle detector and verifies the caption header
/// before assembling a value.
class Pipeline {
 public:
  /// header_model is required in US mode (ArgumentError otherwise).
  Pipeline(RegionMode mode, PipelineParams params, MlpParams digit_model,
           std::optional<MlpParams> header_model = std::nullopt);

  struct FrameResult {
    FrameReport report;
    std::vector<ShapeCandidate> candidates;
    std::vector<SignHypothesis> hypotheses;
    std::vector<ValidatedSign> events;
  };

  /// Frames must arrive with strictly increasing frame_index
  /// (SequenceError otherwise).
  FrameResult process_frame(const GrayFrame& frame);

  RegionMode mode() const { return mode_; }
  const PipelineParams& params() const { return params_; }

 private:
  RegionMode mode_;
  PipelineParams params_;
  MlpParams digit_model_;
  std::optional<MlpParams> header_model_;
  TrackerState tracker_;
};

// ============================================================================
// Sequence driving and output
// ============================================================================

struct RunSummary {
  int frames = 0;
  long long candidates = 0;
  long long hypotheses = 0;
  long long events = 0;
  double wall_seconds = 0.0;
  double fps = 0.0;
  std::vector<FrameReport> reports;
};

/// Process every PGM in input_dir (lexicographic order, frame_index by
/// ordinal) and append detection rows to out_jsonl: one row per candidate,
/// hypothesis, and validated event.  When annotate_dir is non-empty, frames
/// with boxes burned in are written there.  Unreadable frames halt with the
/// file named in the error.
RunSummary run_sequence(const std::string& input_dir, Pipeline& pipeline,
                        const std::string& out_jsonl,
                        const std::string& annotate_dir = "");

// ============================================================================
// Evaluation
// ============================================================================

struct EvalReport {
  int total = 0;
  int correct = 0;
  int missed = 0;
  int misclassified = 0;
  int false_alarms = 0;
  double scdr = 0.0;
  double misclassification_rate = 0.0;
  bool empty_truth = false;  ///< SCDR forced to 1.0 by the total==0 convention
};

/// Score validated events against ground truth.  A truth sign is correct
/// when some validated event carries its value, overlaps one of its boxes at
/// IoU >= iou_tol, and fires no later than the sign's last visible frame;
/// validated with the wrong value = misclassified; otherwise missed.  Events
/// matching no truth sign count as false alarms.
EvalReport evaluate(const std::string& detections_path,
                    const std::string& truth_path, double iou_tol = 0.3);

/// Command-line entry point (subcommands detect / train-odr / synth / eval).
/// Returns 0 on success, 1 on usage errors, 2 on runtime failures.
int cli_main(const std::vector<std::string>& args);

}  // namespace tsr
