#include "tsr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <utility>

#include "tsr/error.hpp"
#include "tsr/jsonl.hpp"
#include "tsr/pgm.hpp"
#include "tsr/segment.hpp"

namespace tsr {

namespace {

const char* shape_name(ShapeKind kind) {
  return kind == ShapeKind::Circle ? "circle" : "rect";
}

std::int64_t elapsed_us(std::chrono::steady_clock::time_point a,
                        std::chrono::steady_clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::microseconds>(b - a).count();
}

void check_model_shape(const MlpParams& model, int inputs, int outputs,
                       const char* which) {
  if (model.layer_sizes.size() < 2 || model.layer_sizes.front() != inputs ||
      model.layer_sizes.back() != outputs)
    throw ArgumentError(std::string("Pipeline: ") + which + " model must map " +
                        std::to_string(inputs) + " inputs to " +
                        std::to_string(outputs) + " outputs");
}

}  // namespace

// ============================================================================
// Pipeline
// ============================================================================

Pipeline::Pipeline(RegionMode mode, PipelineParams params, MlpParams digit_model,
                   std::optional<MlpParams> header_model)
    : mode_(mode),
      params_(std::move(params)),
      digit_model_(std::move(digit_model)),
      header_model_(std::move(header_model)) {
  validate(params_.detector);
  check_model_shape(digit_model_, kGlyphSize * kGlyphSize, 10, "digit");
  if (mode_ == RegionMode::US) {
    if (!header_model_.has_value())
      throw ArgumentError("Pipeline: US mode requires a header model");
    check_model_shape(*header_model_, kHeaderFeatureDim, 2, "header");
  }
}

Pipeline::FrameResult Pipeline::process_frame(const GrayFrame& frame) {
  using Clock = std::chrono::steady_clock;
  FrameResult result;

  const auto t0 = Clock::now();
  const GradientField grad = sobel(frame);
  std::vector<ShapeCandidate> shapes;
  if (mode_ == RegionMode::EU) {
    for (const auto& c : detect_circles(grad, params_.detector))
      shapes.push_back(make_shape(c));
  } else {
    for (const auto& r : detect_rectangles(grad, params_.detector))
      shapes.push_back(make_shape(r));
  }
  result.candidates = suppress_overlaps(shapes, params_.detector);
  const auto t1 = Clock::now();

  for (const auto& cand : result.candidates) {
    const auto glyphs = segment_roi(frame, cand, params_.segment);
    if (glyphs.empty()) continue;  // no digits here: not a speed sign
    if (mode_ == RegionMode::US) {
      if (!cand.header.has_value()) continue;
      // A caption too small to read cannot vouch for the plate; wait for a
      // closer frame instead of ruling on an illegible crop.
      if (cand.header->h < params_.header_min_height) continue;
      const HeaderCheck check =
          us_header_check(*header_model_, frame, *cand.header);
      if (!check.accept) continue;
    }
    std::vector<std::optional<DigitReading>> readings;
    readings.reserve(glyphs.size());
    for (const auto& glyph : glyphs)
      readings.push_back(classify_glyph(digit_model_, glyph,
                                        params_.reject_threshold, params_.margin));
    const auto assembled =
        assemble_value(readings, mode_, params_.values(mode_));
    if (!assembled.has_value()) continue;
    SignHypothesis hyp;
    hyp.frame_index = frame.frame_index;
    hyp.bbox = cand.bbox;
    hyp.value = assembled->first;
    hyp.confidence = assembled->second;
    hyp.kind = cand.kind;
    result.hypotheses.push_back(hyp);
  }
  const auto t2 = Clock::now();

  result.events = step(tracker_, result.hypotheses, frame.frame_index,
                       params_.tracker);
  const auto t3 = Clock::now();

  result.report.frame_index = frame.frame_index;
  result.report.candidates = static_cast<int>(result.candidates.size());
  result.report.hypotheses = static_cast<int>(result.hypotheses.size());
  result.report.events = static_cast<int>(result.events.size());
  result.report.detect_us = elapsed_us(t0, t1);
  result.report.recognize_us = elapsed_us(t1, t2);
  result.report.track_us = elapsed_us(t2, t3);
  return result;
}

// ============================================================================
// Sequence driving
// ============================================================================

namespace {

void burn_box(Plane<std::uint8_t>& pixels, const Rect& r, std::uint8_t value,
              int thickness) {
  const int w = static_cast<int>(pixels.cols());
  const int h = static_cast<int>(pixels.rows());
  for (int t = 0; t < thickness; ++t) {
    const int x0 = r.x - t;
    const int y0 = r.y - t;
    const int x1 = r.right() - 1 + t;
    const int y1 = r.bottom() - 1 + t;
    for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x) {
      if (y0 >= 0 && y0 < h) pixels(y0, x) = value;
      if (y1 >= 0 && y1 < h) pixels(y1, x) = value;
    }
    for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y) {
      if (x0 >= 0 && x0 < w) pixels(y, x0) = value;
      if (x1 >= 0 && x1 < w) pixels(y, x1) = value;
    }
  }
}

}  // namespace

RunSummary run_sequence(const std::string& input_dir, Pipeline& pipeline,
                        const std::string& out_jsonl,
                        const std::string& annotate_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(input_dir))
    throw IoError("run_sequence: input directory not found: " + input_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });

  {
    const fs::path parent = fs::path(out_jsonl).parent_path();
    if (!parent.empty()) {
      std::error_code ec;
      fs::create_directories(parent, ec);
      if (ec)
        throw IoError("run_sequence: cannot create " + parent.string() + ": " +
                      ec.message());
    }
  }
  std::ofstream out(out_jsonl, std::ios::trunc);
  if (!out) throw IoError("run_sequence: cannot open output: " + out_jsonl);

  if (!annotate_dir.empty()) {
    std::error_code ec;
    fs::create_directories(annotate_dir, ec);
    if (ec)
      throw IoError("run_sequence: cannot create " + annotate_dir + ": " +
                    ec.message());
  }

  RunSummary summary;
  const auto wall0 = std::chrono::steady_clock::now();
  int ordinal = 0;
  for (const auto& path : files) {
    GrayFrame frame = load_frame(path.string());
    frame.frame_index = ordinal;
    const auto result = pipeline.process_frame(frame);

    for (const auto& cand : result.candidates) {
      DetectionRow row;
      row.frame = ordinal;
      row.kind = "candidate";
      row.shape = shape_name(cand.kind);
      row.bbox = cand.bbox;
      row.confidence = cand.score;
      append_detection(out, row);
    }
    for (const auto& hyp : result.hypotheses) {
      DetectionRow row;
      row.frame = ordinal;
      row.kind = "hypothesis";
      row.shape = shape_name(hyp.kind);
      row.bbox = hyp.bbox;
      row.value = hyp.value;
      row.confidence = hyp.confidence;
      append_detection(out, row);
    }
    for (const auto& event : result.events) {
      DetectionRow row;
      row.frame = ordinal;
      row.kind = "validated";
      row.shape = shape_name(event.kind);
      row.bbox = event.bbox;
      row.value = event.value;
      row.confidence = event.confidence;
      append_detection(out, row);
    }

    if (!annotate_dir.empty()) {
      GrayFrame annotated = frame;
      for (const auto& cand : result.candidates)
        burn_box(annotated.pixels, cand.bbox, 230, 1);
      for (const auto& hyp : result.hypotheses)
        burn_box(annotated.pixels, hyp.bbox, 255, 1);
      for (const auto& event : result.events)
        burn_box(annotated.pixels, event.bbox, 255, 2);
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%06d.pgm", ordinal);
      save_frame(annotated, (fs::path(annotate_dir) / name).string());
    }

    summary.candidates += result.report.candidates;
    summary.hypotheses += result.report.hypotheses;
    summary.events += result.report.events;
    summary.reports.push_back(result.report);
    ++ordinal;
  }
  const auto wall1 = std::chrono::steady_clock::now();

  summary.frames = ordinal;
  summary.wall_seconds =
      std::chrono::duration<double>(wall1 - wall0).count();
  summary.fps =
      summary.wall_seconds > 0.0 ? summary.frames / summary.wall_seconds : 0.0;

  if (!out.flush())
    throw IoError("run_sequence: failed writing output: " + out_jsonl);
  return summary;
}

// ============================================================================
// Evaluation
// ============================================================================

EvalReport evaluate(const std::string& detections_path,
                    const std::string& truth_path, double iou_tol) {
  if (iou_tol <= 0.0 || iou_tol > 1.0)
    throw ArgumentError("evaluate: iou_tol must be in (0, 1]");
  const auto rows = read_detections(detections_path);
  const auto signs = read_truth(truth_path);

  std::vector<std::int64_t> last_visible(signs.size(), -1);
  for (std::size_t i = 0; i < signs.size(); ++i)
    for (const auto& [frame, bbox] : signs[i].frames)
      last_visible[i] = std::max<std::int64_t>(last_visible[i], frame);

  std::vector<bool> has_correct(signs.size(), false);
  std::vector<bool> has_wrong(signs.size(), false);

  EvalReport report;
  report.total = static_cast<int>(signs.size());

  for (const auto& row : rows) {
    if (row.kind != "validated") continue;
    // Attach the event to the truth sign it overlaps best.
    double best_iou = 0.0;
    std::size_t best_sign = signs.size();
    for (std::size_t i = 0; i < signs.size(); ++i) {
      for (const auto& [frame, bbox] : signs[i].frames) {
        const double overlap = iou(row.bbox, bbox);
        if (overlap > best_iou) {
          best_iou = overlap;
          best_sign = i;
        }
      }
    }
    if (best_sign == signs.size() || best_iou < iou_tol) {
      ++report.false_alarms;
      continue;
    }
    if (row.frame > last_visible[best_sign]) continue;  // validated too late
    const int value = row.value.value_or(INT_MIN);
    if (value == signs[best_sign].value)
      has_correct[best_sign] = true;
    else
      has_wrong[best_sign] = true;
  }

  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (has_correct[i])
      ++report.correct;
    else if (has_wrong[i])
      ++report.misclassified;
    else
      ++report.missed;
  }

  if (report.total == 0) {
    report.scdr = 1.0;
    report.misclassification_rate = 0.0;
    report.empty_truth = true;
  } else {
    report.scdr = static_cast<double>(report.correct) / report.total;
    report.misclassification_rate =
        static_cast<double>(report.misclassified) / report.total;
  }
  return report;
}

}  // namespace tsr
