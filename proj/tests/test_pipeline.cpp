#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tsr/config.hpp"
#include "tsr/error.hpp"
#include "tsr/jsonl.hpp"
#include "tsr/mlp.hpp"
#include "tsr/pgm.hpp"
#include "tsr/pipeline.hpp"
#include "tsr/rng.hpp"
#include "tsr/synth.hpp"
#include "tsr/types.hpp"

namespace {

// Lay out one truth sign per frame on a fixed grid and emit validated rows
// for a chosen number of them: `correct` with the true value, `wrong` with
// another value, and the rest with no row at all.
void write_eval_fixture(const std::string& det_path,
                        const std::string& truth_path, int total, int correct,
                        int wrong) {
  std::vector<tsr::GroundTruth> truth(total);
  std::ofstream det(det_path);
  for (int i = 0; i < total; ++i) {
    truth[i].sign_id = i;
    truth[i].value = 50;
    // Each sign gets its own grid cell so detection rows attach to exactly
    // one sign by overlap.
    const tsr::Rect box{8 + (i % 16) * 40, 8 + (i / 16) * 40, 32, 32};
    truth[i].frames.emplace_back(i, box);  // frame i holds sign i

    if (i < correct || i >= correct + wrong) {
      if (i >= correct) continue;  // missed: no detection row
      tsr::DetectionRow row;
      row.frame = i;
      row.kind = "validated";
      row.shape = "circle";
      row.bbox = box;
      row.value = 50;
      row.confidence = 1.6;
      tsr::append_detection(det, row);
    } else {
      tsr::DetectionRow row;  // misclassified: wrong value, right place
      row.frame = i;
      row.kind = "validated";
      row.shape = "circle";
      row.bbox = box;
      row.value = 70;
      row.confidence = 1.6;
      tsr::append_detection(det, row);
    }
  }
  det.close();
  tsr::write_truth(truth_path, truth);
}

tsr::MlpParams tiny_model(const std::vector<int>& layers, std::uint64_t seed) {
  tsr::Rng rng(seed);
  return tsr::init_mlp(layers, rng);
}

}  // namespace

TEST_CASE("evaluation reproduces the reference operating point") {
  const std::string det = "/tmp/tsr_eval_fixture_det.jsonl";
  const std::string truth = "/tmp/tsr_eval_fixture_truth.jsonl";
  write_eval_fixture(det, truth, 281, 250, 2);

  const tsr::EvalReport report = tsr::evaluate(det, truth, 0.3);
  REQUIRE(report.total == 281);
  REQUIRE(report.correct == 250);
  REQUIRE(report.missed == 29);
  REQUIRE(report.misclassified == 2);
  REQUIRE(report.false_alarms == 0);
  REQUIRE(std::abs(report.scdr - 0.8897) <= 1e-4);
  REQUIRE(std::abs(report.misclassification_rate - 0.0071) <= 1e-4);

  std::remove(det.c_str());
  std::remove(truth.c_str());
}

TEST_CASE("evaluation counts false alarms and late validations") {
  const std::string det = "/tmp/tsr_eval_late_det.jsonl";
  const std::string truth_path = "/tmp/tsr_eval_late_truth.jsonl";

  std::vector<tsr::GroundTruth> truth(1);
  truth[0].sign_id = 0;
  truth[0].value = 50;
  truth[0].frames.emplace_back(0, tsr::Rect{40, 60, 32, 32});
  truth[0].frames.emplace_back(1, tsr::Rect{42, 60, 34, 34});
  tsr::write_truth(truth_path, truth);

  {
    std::ofstream out(det);
    tsr::DetectionRow row;
    row.kind = "validated";
    row.shape = "circle";
    row.value = 50;
    row.confidence = 1.5;
    // Validation after the sign is gone: ignored, neither hit nor alarm.
    row.frame = 5;
    row.bbox = tsr::Rect{42, 60, 34, 34};
    tsr::append_detection(out, row);
    // Validation somewhere else entirely: a false alarm.
    row.frame = 1;
    row.bbox = tsr::Rect{400, 300, 30, 30};
    tsr::append_detection(out, row);
    // Candidate and hypothesis rows never count.
    row.kind = "candidate";
    row.value.reset();
    row.frame = 0;
    row.bbox = tsr::Rect{400, 300, 30, 30};
    tsr::append_detection(out, row);
  }

  const tsr::EvalReport report = tsr::evaluate(det, truth_path, 0.3);
  REQUIRE(report.total == 1);
  REQUIRE(report.correct == 0);
  REQUIRE(report.missed == 1);
  REQUIRE(report.false_alarms == 1);

  REQUIRE_THROWS_AS(tsr::evaluate(det, truth_path, 0.0), tsr::ArgumentError);
  REQUIRE_THROWS_AS(tsr::evaluate(det, truth_path, 1.5), tsr::ArgumentError);

  std::remove(det.c_str());
  std::remove(truth_path.c_str());
}

TEST_CASE("evaluation of an empty truth file follows the no-sign convention") {
  const std::string det = "/tmp/tsr_eval_empty_det.jsonl";
  const std::string truth_path = "/tmp/tsr_eval_empty_truth.jsonl";
  {
    std::ofstream d(det);
    std::ofstream t(truth_path);
  }
  const tsr::EvalReport report = tsr::evaluate(det, truth_path, 0.3);
  REQUIRE(report.total == 0);
  REQUIRE(report.empty_truth);
  REQUIRE(report.scdr == doctest::Approx(1.0));
  REQUIRE(report.false_alarms == 0);
  std::remove(det.c_str());
  std::remove(truth_path.c_str());
}

TEST_CASE("detection rows serialize deterministically and round-trip") {
  tsr::DetectionRow row;
  row.frame = 3;
  row.kind = "hypothesis";
  row.shape = "rect";
  row.bbox = tsr::Rect{10, 20, 30, 40};
  row.value = 55;
  row.confidence = 0.75;

  std::ostringstream out;
  tsr::append_detection(out, row);
  REQUIRE(out.str() ==
          "{\"bbox\":[10,20,30,40],\"confidence\":0.75,\"frame\":3,"
          "\"kind\":\"hypothesis\",\"shape\":\"rect\",\"value\":55}\n");

  tsr::DetectionRow cand = row;
  cand.kind = "candidate";
  cand.value.reset();
  std::ostringstream out2;
  tsr::append_detection(out2, cand);
  REQUIRE(out2.str().find("\"value\":null") != std::string::npos);

  const std::string path = "/tmp/tsr_rows.jsonl";
  {
    std::ofstream f(path);
    f << out.str() << "\n" << out2.str();  // blank line in between
  }
  const std::vector<tsr::DetectionRow> rows = tsr::read_detections(path);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].frame == 3);
  REQUIRE(rows[0].value == 55);
  REQUIRE(rows[0].bbox == row.bbox);
  REQUIRE(!rows[1].value.has_value());
  std::remove(path.c_str());
}

TEST_CASE("malformed detection streams name the offending line") {
  const std::string path = "/tmp/tsr_rows_bad.jsonl";
  {
    std::ofstream f(path);
    f << "{\"bbox\":[1,2,3,4],\"confidence\":0.5,\"frame\":0,"
         "\"kind\":\"candidate\",\"shape\":\"circle\",\"value\":null}\n";
    f << "not json at all\n";
  }
  try {
    tsr::read_detections(path);
    REQUIRE(false);
  } catch (const tsr::ParseError& e) {
    REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::remove(path.c_str());
  REQUIRE_THROWS_AS(tsr::read_detections("/tmp/does_not_exist.jsonl"),
                    tsr::IoError);
}

TEST_CASE("pgm frames round-trip and reject foreign formats") {
  tsr::Rng rng(3);
  tsr::GrayFrame frame;
  frame.pixels = tsr::Plane<std::uint8_t>::Zero(17, 23);
  for (int y = 0; y < 17; ++y)
    for (int x = 0; x < 23; ++x)
      frame.pixels(y, x) = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  const std::string path = "/tmp/tsr_roundtrip.pgm";
  tsr::save_frame(frame, path);
  const tsr::GrayFrame back = tsr::load_frame(path);
  REQUIRE((back.pixels == frame.pixels).all());
  std::remove(path.c_str());

  const std::string bad = "/tmp/tsr_bad.pgm";
  {
    std::ofstream f(bad);
    f << "P6\n2 2\n255\nxxxxxxxxxxxx";
  }
  REQUIRE_THROWS_AS(tsr::load_frame(bad), tsr::FormatError);
  std::remove(bad.c_str());
  REQUIRE_THROWS_AS(tsr::load_frame("/tmp/absent.pgm"), tsr::IoError);
}

TEST_CASE("config text overrides knobs and rejects unknown keys") {
  const std::string text =
      "# tuning\n"
      "\n"
      "detector.r_min = 12\n"
      "detector.vote_threshold = 0.62\n"
      "segment.offset = 11\n"
      "odr.reject_threshold = 0.7\n"
      "tracker.min_hits = 4\n"
      "values.eu = 30,50,70\n";
  const tsr::PipelineParams params = tsr::parse_config(text);
  REQUIRE(params.detector.r_min == 12);
  REQUIRE(params.detector.vote_threshold == doctest::Approx(0.62));
  REQUIRE(params.segment.offset == 11);
  REQUIRE(params.reject_threshold == doctest::Approx(0.7));
  REQUIRE(params.tracker.min_hits == 4);
  REQUIRE(params.eu_values == std::vector<int>{30, 50, 70});
  // Untouched knobs keep their defaults.
  REQUIRE(params.detector.r_max == tsr::DetectorConfig{}.r_max);
  REQUIRE(params.tracker.max_gap == tsr::TrackerConfig{}.max_gap);

  try {
    tsr::parse_config("detector.r_min = 8\ndetector.r_mni = 9\n");
    REQUIRE(false);
  } catch (const tsr::ConfigError& e) {
    REQUIRE(std::string(e.what()).find("r_mni") != std::string::npos);
  }
  REQUIRE_THROWS_AS(tsr::parse_config("detector.r_min 8\n"),
                    tsr::ConfigError);
  REQUIRE_THROWS_AS(tsr::parse_config("detector.r_min = eight\n"),
                    tsr::ConfigError);
  REQUIRE_THROWS_AS(tsr::load_config("/tmp/absent.cfg"), tsr::IoError);
}

TEST_CASE("pipeline construction validates model shapes") {
  const tsr::PipelineParams params;
  REQUIRE_THROWS_AS(tsr::Pipeline(tsr::RegionMode::EU, params,
                                  tiny_model({100, 8, 10}, 1)),
                    tsr::ArgumentError);
  REQUIRE_THROWS_AS(tsr::Pipeline(tsr::RegionMode::EU, params,
                                  tiny_model({256, 8, 9}, 1)),
                    tsr::ArgumentError);
  // US mode demands a caption model of the right shape.
  REQUIRE_THROWS_AS(tsr::Pipeline(tsr::RegionMode::US, params,
                                  tiny_model({256, 8, 10}, 1)),
                    tsr::ArgumentError);
  REQUIRE_THROWS_AS(tsr::Pipeline(tsr::RegionMode::US, params,
                                  tiny_model({256, 8, 10}, 1),
                                  tiny_model({700, 6, 2}, 2)),
                    tsr::ArgumentError);
  REQUIRE_NOTHROW(tsr::Pipeline(tsr::RegionMode::EU, params,
                                tiny_model({256, 8, 10}, 1)));
  REQUIRE_NOTHROW(tsr::Pipeline(tsr::RegionMode::US, params,
                                tiny_model({256, 8, 10}, 1),
                                tiny_model({768, 6, 2}, 2)));
}

TEST_CASE("pipeline frames must arrive in order") {
  tsr::Pipeline pipeline(tsr::RegionMode::EU, tsr::PipelineParams{},
                         tiny_model({256, 8, 10}, 1));
  tsr::GrayFrame frame;
  frame.pixels = tsr::Plane<std::uint8_t>::Constant(60, 80, 160);
  frame.frame_index = 2;
  pipeline.process_frame(frame);
  REQUIRE_THROWS_AS(pipeline.process_frame(frame), tsr::SequenceError);
  frame.frame_index = 3;
  REQUIRE_NOTHROW(pipeline.process_frame(frame));
}

TEST_CASE("run_sequence writes rows for a directory of frames") {
  const std::string dir = "/tmp/tsr_run_seq";
  const std::string out = "/tmp/tsr_run_seq_rows.jsonl";
  std::filesystem::remove_all(dir);
  std::remove(out.c_str());

  tsr::ScenarioSpec spec;
  spec.frame_count = 4;
  spec.width = 320;
  spec.height = 240;
  spec.seed = 8;
  tsr::SignSpec sign;
  sign.mode = tsr::RegionMode::EU;
  sign.value = 50;
  spec.sign = sign;
  spec.trajectory = tsr::make_approach(spec, 40, 60);
  tsr::generate_sequence(spec, dir, "");

  // Use a real trained model so hypotheses can appear: train quickly on a
  // small corpus.
  const tsr::DigitDataset corpus =
      tsr::generate_digit_corpus(12, tsr::CorpusRanges{}, 99);
  tsr::TrainHyper hyper;
  hyper.epochs = 14;
  const tsr::TrainResult trained = tsr::mlp_train(corpus, hyper);

  tsr::Pipeline pipeline(tsr::RegionMode::EU, tsr::PipelineParams{},
                         trained.params);
  const tsr::RunSummary summary = tsr::run_sequence(dir, pipeline, out);
  REQUIRE(summary.frames == 4);
  REQUIRE(summary.reports.size() == 4);
  REQUIRE(summary.fps > 0.0);
  REQUIRE(summary.candidates > 0);

  const std::vector<tsr::DetectionRow> rows = tsr::read_detections(out);
  REQUIRE(!rows.empty());
  int candidates = 0;
  for (const auto& row : rows) {
    REQUIRE((row.kind == "candidate" || row.kind == "hypothesis" ||
             row.kind == "validated"));
    if (row.kind == "candidate") {
      ++candidates;
      REQUIRE(!row.value.has_value());
    }
    REQUIRE(row.frame >= 0);
    REQUIRE(row.frame < 4);
  }
  REQUIRE(candidates == summary.candidates);

  REQUIRE_THROWS_AS(tsr::run_sequence("/tmp/absent_dir_xyz", pipeline, out),
                    tsr::IoError);

  std::filesystem::remove_all(dir);
  std::remove(out.c_str());
}

TEST_CASE("command line reports usage and runtime failures distinctly") {
  // Unknown subcommand and missing required options are usage errors.
  REQUIRE(tsr::cli_main({"frobnicate"}) == 1);
  REQUIRE(tsr::cli_main({"detect", "--mode", "eu"}) == 1);
  REQUIRE(tsr::cli_main({"detect", "--mode", "xx", "--input", "/tmp/a",
                         "--digit-model", "/tmp/b", "--out", "/tmp/c"}) == 1);
  REQUIRE(tsr::cli_main({"--help"}) == 0);
  // Structurally valid options whose combination is impossible fail like
  // any other post-parse error.
  REQUIRE(tsr::cli_main({"synth", "sequence", "--out", "/tmp/tsr_cli_seq",
                         "--seed", "1", "--mode", "eu", "--truck"}) == 2);

  // A well-formed invocation that hits a missing file is a runtime failure.
  REQUIRE(tsr::cli_main({"detect", "--mode", "eu", "--input",
                         "/tmp/absent_dir_xyz", "--digit-model",
                         "/tmp/absent_model.bin", "--out",
                         "/tmp/tsr_cli_out.jsonl"}) == 2);
  REQUIRE(tsr::cli_main({"eval", "--detections", "/tmp/absent.jsonl",
                         "--truth", "/tmp/absent2.jsonl"}) == 2);
}

TEST_CASE("end-to-end: a rendered approach is validated with its value") {
  const std::string dir = "/tmp/tsr_e2e_seq";
  const std::string out = "/tmp/tsr_e2e_rows.jsonl";
  const std::string truth_path = "/tmp/tsr_e2e_truth.jsonl";
  std::filesystem::remove_all(dir);

  tsr::ScenarioSpec spec;
  spec.frame_count = 10;
  spec.width = 480;
  spec.height = 360;
  spec.seed = 31;
  tsr::SignSpec sign;
  sign.mode = tsr::RegionMode::EU;
  sign.value = 70;
  sign.noise_sigma = 2.0;
  spec.sign = sign;
  spec.trajectory = tsr::make_approach(spec, 32, 64);
  spec.distractor_count = 2;
  spec.noise_sigma = 2.0;
  tsr::generate_sequence(spec, dir, truth_path);

  const tsr::DigitDataset corpus =
      tsr::generate_digit_corpus(40, tsr::CorpusRanges{}, 1234);
  tsr::TrainHyper hyper;
  hyper.epochs = 25;
  const tsr::TrainResult trained = tsr::mlp_train(corpus, hyper);

  tsr::Pipeline pipeline(tsr::RegionMode::EU, tsr::PipelineParams{},
                         trained.params);
  tsr::run_sequence(dir, pipeline, out);

  const tsr::EvalReport report = tsr::evaluate(out, truth_path, 0.3);
  REQUIRE(report.total == 1);
  REQUIRE(report.correct == 1);
  REQUIRE(report.false_alarms == 0);

  std::filesystem::remove_all(dir);
  std::remove(out.c_str());
  std::remove(truth_path.c_str());
}
