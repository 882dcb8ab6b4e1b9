#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "tsr/error.hpp"
#include "tsr/jsonl.hpp"
#include "tsr/mlp.hpp"
#include "tsr/pgm.hpp"
#include "tsr/synth.hpp"
#include "tsr/types.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

tsr::SignSpec eu_spec(int value, double scale) {
  tsr::SignSpec s;
  s.mode = tsr::RegionMode::EU;
  s.value = value;
  s.scale = scale;
  return s;
}

tsr::SignSpec us_spec(int value, double scale, double tilt = 0.0) {
  tsr::SignSpec s;
  s.mode = tsr::RegionMode::US;
  s.value = value;
  s.scale = scale;
  s.tilt_deg = tilt;
  return s;
}

}  // namespace

TEST_CASE("rendering is deterministic and noise is seed-driven") {
  tsr::SignSpec spec = eu_spec(50, 60);
  spec.noise_sigma = 4.0;
  spec.seed = 9;
  const tsr::RenderedSign a = tsr::render_sign(spec);
  const tsr::RenderedSign b = tsr::render_sign(spec);
  REQUIRE((a.patch.pixels == b.patch.pixels).all());
  REQUIRE(a.glyph_boxes == b.glyph_boxes);

  spec.seed = 10;
  const tsr::RenderedSign c = tsr::render_sign(spec);
  REQUIRE((a.patch.pixels != c.patch.pixels).any());  // different noise
  REQUIRE(a.glyph_boxes == c.glyph_boxes);            // same geometry
}

TEST_CASE("sign specs are validated") {
  REQUIRE_THROWS_AS(tsr::render_sign(eu_spec(53, 60)), tsr::ArgumentError);
  REQUIRE_THROWS_AS(tsr::render_sign(us_spec(53, 60)), tsr::ArgumentError);
  REQUIRE_THROWS_AS(tsr::render_sign(eu_spec(50, 8)), tsr::ArgumentError);
  REQUIRE_THROWS_AS(tsr::render_sign(eu_spec(50, 800)), tsr::ArgumentError);
  REQUIRE_THROWS_AS(tsr::render_sign(us_spec(55, 60, 20.0)),
                    tsr::ArgumentError);
  tsr::SignSpec low_contrast = eu_spec(50, 60);
  low_contrast.foreground = 200;
  low_contrast.background = 220;
  REQUIRE_THROWS_AS(tsr::render_sign(low_contrast), tsr::ArgumentError);
  tsr::SignSpec bad_variant = eu_spec(50, 60);
  bad_variant.font_variant = 3;
  REQUIRE_THROWS_AS(tsr::render_sign(bad_variant), tsr::ArgumentError);
  // US-only speeds are rejected for EU plates and vice versa.
  REQUIRE_THROWS_AS(tsr::render_sign(eu_spec(55, 60)), tsr::ArgumentError);
  REQUIRE_THROWS_AS(tsr::render_sign(us_spec(110, 60)), tsr::ArgumentError);
}

TEST_CASE("disc ground truth matches the requested geometry") {
  for (const double scale : {20.0, 40.0, 70.0}) {
    const tsr::RenderedSign sign = tsr::render_sign(eu_spec(50, scale));
    REQUIRE(sign.circle_radius == doctest::Approx(scale / 2.0));
    // The advertised bbox hugs the circle.
    REQUIRE(sign.sign_bbox.x ==
            static_cast<int>(std::lround(sign.circle_cx - sign.circle_radius)));
    REQUIRE(sign.sign_bbox.y ==
            static_cast<int>(std::lround(sign.circle_cy - sign.circle_radius)));
    // Patch coverage: opaque at the center, transparent at the patch corner.
    const int cy = static_cast<int>(sign.circle_cy);
    const int cx = static_cast<int>(sign.circle_cx);
    REQUIRE(sign.alpha(cy, cx) == doctest::Approx(1.0));
    REQUIRE(sign.alpha(0, 0) == doctest::Approx(0.0));
    // Plate interior is bright.  Sample below the digit block but inside
    // the rim's inner edge -- the exact center sits on digit ink.
    const int plate_y = cy + static_cast<int>(std::lround(0.62 * sign.circle_radius));
    REQUIRE(sign.patch.pixels(plate_y, cx) >= 200);
  }
}

TEST_CASE("plate corner truth preserves side lengths and tilt") {
  for (const double tilt : {0.0, 3.0, -5.0}) {
    const double scale = 64.0;
    const tsr::RenderedSign sign = tsr::render_sign(us_spec(55, scale, tilt));
    const auto& c = sign.rect_corners;
    const double top = std::hypot(c[1][0] - c[0][0], c[1][1] - c[0][1]);
    const double right = std::hypot(c[2][0] - c[1][0], c[2][1] - c[1][1]);
    const double bottom = std::hypot(c[3][0] - c[2][0], c[3][1] - c[2][1]);
    const double left = std::hypot(c[0][0] - c[3][0], c[0][1] - c[3][1]);
    REQUIRE(top == doctest::Approx(0.70 * scale).epsilon(1e-9));
    REQUIRE(bottom == doctest::Approx(0.70 * scale).epsilon(1e-9));
    REQUIRE(right == doctest::Approx(0.90 * scale).epsilon(1e-9));
    REQUIRE(left == doctest::Approx(0.90 * scale).epsilon(1e-9));
    // The top edge runs at the requested tilt.  Positive tilt rotates the
    // plate so its top edge slopes downward to the right; with y growing
    // downward atan2 reports that slope as +tilt.
    const double angle =
        std::atan2(c[1][1] - c[0][1], c[1][0] - c[0][0]) * 180.0 / kPi;
    REQUIRE(angle == doctest::Approx(tilt).epsilon(1e-6));
    // The advertised bbox is the axis-aligned hull of the corners, rounded
    // to the nearest pixel.
    const double min_x = std::min({c[0][0], c[1][0], c[2][0], c[3][0]});
    const double max_x = std::max({c[0][0], c[1][0], c[2][0], c[3][0]});
    REQUIRE(sign.sign_bbox.x == static_cast<int>(std::lround(min_x)));
    REQUIRE(sign.sign_bbox.right() == static_cast<int>(std::lround(max_x)));
  }
}

TEST_CASE("glyph truth boxes are tight, ordered, and counted per value") {
  const tsr::RenderedSign two = tsr::render_sign(eu_spec(50, 64));
  REQUIRE(two.glyph_boxes.size() == 2);
  const tsr::RenderedSign three = tsr::render_sign(eu_spec(110, 64));
  REQUIRE(three.glyph_boxes.size() == 3);
  const tsr::RenderedSign us = tsr::render_sign(us_spec(55, 64));
  REQUIRE(us.glyph_boxes.size() == 2);

  for (const auto* sign : {&two, &three, &us}) {
    int last_right = -1;
    for (const tsr::Rect& box : sign->glyph_boxes) {
      REQUIRE(!box.empty());
      REQUIRE(box.inside(sign->patch.width(), sign->patch.height()));
      REQUIRE(box.x > last_right);  // disjoint, left to right
      last_right = box.right();
      // Each truth box really contains ink darker than the plate.
      int dark = 0;
      for (int y = box.y; y < box.bottom(); ++y)
        for (int x = box.x; x < box.right(); ++x)
          if (sign->patch.pixels(y, x) < 128) ++dark;
      REQUIRE(dark > 0);
    }
  }
}

TEST_CASE("digit corpus is balanced, bounded, and reproducible") {
  tsr::CorpusRanges ranges;
  const tsr::DigitDataset a = tsr::generate_digit_corpus(6, ranges, 77);
  const tsr::DigitDataset b = tsr::generate_digit_corpus(6, ranges, 77);
  const tsr::DigitDataset c = tsr::generate_digit_corpus(6, ranges, 78);

  REQUIRE(a.feature_dim == 256);
  REQUIRE(a.num_classes == 10);
  REQUIRE(a.size() == 120);  // 10 digits x 6 + 60 negatives

  int per_digit[10] = {};
  int negatives = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int label = a.labels[i];
    if (label == tsr::kNegativeLabel) {
      ++negatives;
    } else {
      REQUIRE(label >= 0);
      REQUIRE(label <= 9);
      ++per_digit[label];
    }
    REQUIRE(a.features[i].size() == 256);
    REQUIRE(a.features[i].minCoeff() >= 0.0);
    REQUIRE(a.features[i].maxCoeff() <= 1.0);
    REQUIRE(a.features[i].maxCoeff() > 0.0);  // never a blank glyph
  }
  for (int d = 0; d < 10; ++d) REQUIRE(per_digit[d] == 6);
  REQUIRE(negatives == 60);

  REQUIRE(a.labels == b.labels);
  bool identical = true;
  for (std::size_t i = 0; i < a.size() && identical; ++i)
    identical = a.features[i] == b.features[i];
  REQUIRE(identical);

  bool differs = a.labels != c.labels;
  for (std::size_t i = 0; i < a.size() && !differs; ++i)
    differs = a.features[i] != c.features[i];
  REQUIRE(differs);
}

TEST_CASE("header corpus covers both caption classes") {
  tsr::CorpusRanges ranges;
  const tsr::DigitDataset d = tsr::generate_header_corpus(8, ranges, 5);
  REQUIRE(d.feature_dim == 768);
  REQUIRE(d.num_classes == 2);
  REQUIRE(d.size() == 16);
  REQUIRE(std::count(d.labels.begin(), d.labels.end(), 0) == 8);
  REQUIRE(std::count(d.labels.begin(), d.labels.end(), 1) == 8);
}

TEST_CASE("approach trajectories grow monotonically and stay in frame") {
  tsr::ScenarioSpec spec;
  spec.frame_count = 10;
  spec.width = 640;
  spec.height = 480;
  spec.seed = 3;
  spec.sign = eu_spec(50, 60);
  const auto traj = tsr::make_approach(spec, 24.0, 72.0);
  REQUIRE(traj.size() == 10);
  REQUIRE(traj.front().scale == doctest::Approx(24.0));
  REQUIRE(traj.back().scale == doctest::Approx(72.0));
  for (std::size_t i = 1; i < traj.size(); ++i)
    REQUIRE(traj[i].scale > traj[i - 1].scale);
  for (const auto& p : traj) {
    const double half = 0.75 * p.scale;
    REQUIRE(p.cx - half >= 0.0);
    REQUIRE(p.cx + half <= 640.0);
    REQUIRE(p.cy - half >= 0.0);
    REQUIRE(p.cy + half <= 480.0);
  }
}

TEST_CASE("sequence generation writes frames and coherent truth") {
  const std::string dir = "/tmp/tsr_test_seq";
  const std::string truth_path = "/tmp/tsr_test_seq_truth.jsonl";
  std::filesystem::remove_all(dir);
  std::filesystem::remove(truth_path);

  tsr::ScenarioSpec spec;
  spec.frame_count = 6;
  spec.width = 320;
  spec.height = 240;
  spec.seed = 21;
  spec.sign = eu_spec(80, 48);
  spec.trajectory = tsr::make_approach(spec, 30, 48);
  spec.distractor_count = 2;
  spec.noise_sigma = 3.0;

  const tsr::GeneratedSequence seq = tsr::generate_sequence(spec, dir,
                                                            truth_path);
  REQUIRE(seq.frames_written == 6);
  for (int i = 0; i < 6; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.pgm", i);
    REQUIRE(std::filesystem::exists(dir + "/" + name));
  }

  REQUIRE(seq.truth.has_value());
  REQUIRE(seq.truth->value == 80);
  REQUIRE(seq.truth->frames.size() == 6);
  int last_frame = -1;
  for (const auto& [frame, bbox] : seq.truth->frames) {
    REQUIRE(frame == last_frame + 1);
    last_frame = frame;
    REQUIRE(!bbox.empty());
    REQUIRE(bbox.inside(320, 240));
  }
  // Approach: boxes grow over the sequence.
  REQUIRE(seq.truth->frames.back().second.w >
          seq.truth->frames.front().second.w);

  // The truth file round-trips to the same content.
  const std::vector<tsr::GroundTruth> loaded = tsr::read_truth(truth_path);
  REQUIRE(loaded.size() == 1);
  REQUIRE(loaded[0].value == 80);
  REQUIRE(loaded[0].frames.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    REQUIRE(loaded[0].frames[i].first == seq.truth->frames[i].first);
    REQUIRE(loaded[0].frames[i].second == seq.truth->frames[i].second);
  }

  // Deterministic regeneration: identical bytes per frame.
  const std::string dir2 = "/tmp/tsr_test_seq2";
  std::filesystem::remove_all(dir2);
  tsr::generate_sequence(spec, dir2, "");
  for (int i = 0; i < 6; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "/frame_%06d.pgm", i);
    const auto f1 = tsr::load_frame(dir + name);
    const auto f2 = tsr::load_frame(dir2 + name);
    REQUIRE((f1.pixels == f2.pixels).all());
  }

  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
  std::filesystem::remove(truth_path);
}

TEST_CASE("sign-free and truck sequences carry no truth entries") {
  const std::string dir = "/tmp/tsr_test_seq_empty";
  std::filesystem::remove_all(dir);

  tsr::ScenarioSpec spec;
  spec.frame_count = 3;
  spec.width = 320;
  spec.height = 240;
  spec.seed = 4;
  spec.distractor_count = 4;
  const tsr::GeneratedSequence seq = tsr::generate_sequence(spec, dir, "");
  REQUIRE(seq.frames_written == 3);
  REQUIRE(!seq.truth.has_value());

  tsr::ScenarioSpec truck = spec;
  truck.sign = us_spec(55, 48);
  truck.sign->us_header = tsr::UsHeader::TruckSpeed;
  truck.trajectory = tsr::make_approach(truck, 30, 48);
  std::filesystem::remove_all(dir);
  const tsr::GeneratedSequence seq2 = tsr::generate_sequence(truck, dir, "");
  REQUIRE(!seq2.truth.has_value());

  std::filesystem::remove_all(dir);
}
