#include "tsr/track.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsr/error.hpp"

namespace tsr {

namespace {

double size_of(const Rect& r) { return std::max(r.w, r.h); }

double center_distance(const Rect& a, const Rect& b) {
  return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

}  // namespace

Association associate(const std::vector<Track>& tracks,
                      const std::vector<SignHypothesis>& hypotheses,
                      std::int64_t frame_index, const TrackerConfig& cfg) {
  struct Pair {
    double dist;
    int track, hyp;
  };
  std::vector<Pair> pairs;
  for (int t = 0; t < static_cast<int>(tracks.size()); ++t) {
    const Track& track = tracks[t];
    const std::int64_t dt = std::max<std::int64_t>(
        1, frame_index - track.last_seen_frame);
    for (int j = 0; j < static_cast<int>(hypotheses.size()); ++j) {
      const SignHypothesis& hyp = hypotheses[j];
      if (hyp.kind != track.kind) continue;
      const double dist = center_distance(track.last_bbox, hyp.bbox);
      const double gate =
          cfg.gate_scale * std::max(size_of(track.last_bbox),
                                    size_of(hyp.bbox));
      if (dist > gate) continue;
      const double ratio =
          std::max(size_of(track.last_bbox), size_of(hyp.bbox)) /
          std::max(1.0, std::min(size_of(track.last_bbox),
                                 size_of(hyp.bbox)));
      if (ratio > std::pow(cfg.max_growth, static_cast<double>(dt))) continue;
      pairs.push_back(Pair{dist, t, j});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.track != b.track) return a.track < b.track;
    return a.hyp < b.hyp;
  });

  Association out;
  std::vector<char> track_used(tracks.size(), 0);
  std::vector<char> hyp_used(hypotheses.size(), 0);
  for (const Pair& p : pairs) {
    if (track_used[p.track] || hyp_used[p.hyp]) continue;
    track_used[p.track] = 1;
    hyp_used[p.hyp] = 1;
    out.matches.emplace_back(p.track, p.hyp);
  }
  for (int j = 0; j < static_cast<int>(hypotheses.size()); ++j) {
    if (!hyp_used[j]) out.unmatched_hypotheses.push_back(j);
  }
  return out;
}

namespace {

/// Emits the validation event for a track that just gained a hit, if the
/// once-only rule and both thresholds allow it.
void maybe_validate(Track& track, std::int64_t frame_index, const Rect& bbox,
                    const TrackerConfig& cfg,
                    std::vector<ValidatedSign>& events) {
  if (track.validated) return;
  int best_value = 0;
  double best_conf = -1.0;
  bool found = false;
  // Ascending-value iteration + strict improvement = ties land on the lower,
  // fail-safe speed.
  for (const auto& [value, conf] : track.value_confidence) {
    if (track.value_hits.at(value) < cfg.min_hits) continue;
    if (conf < cfg.confidence_threshold) continue;
    if (conf > best_conf) {
      best_conf = conf;
      best_value = value;
      found = true;
    }
  }
  if (!found) return;
  track.validated = true;
  track.validated_value = best_value;
  events.push_back(ValidatedSign{best_value, frame_index, bbox, best_conf,
                                 track.kind, track.track_id});
}

}  // namespace

std::vector<ValidatedSign> step(TrackerState& state,
                                const std::vector<SignHypothesis>& hypotheses,
                                std::int64_t frame_index,
                                const TrackerConfig& cfg) {
  if (frame_index <= state.last_frame)
    throw SequenceError("tracker: frame " + std::to_string(frame_index) +
                        " not after " + std::to_string(state.last_frame));
  state.last_frame = frame_index;

  std::vector<ValidatedSign> events;
  const Association assoc =
      associate(state.tracks, hypotheses, frame_index, cfg);

  for (const auto& [t, j] : assoc.matches) {
    Track& track = state.tracks[t];
    const SignHypothesis& hyp = hypotheses[j];
    track.last_bbox = hyp.bbox;
    track.last_seen_frame = frame_index;
    track.value_confidence[hyp.value] += hyp.confidence;
    track.value_hits[hyp.value] += 1;
    maybe_validate(track, frame_index, hyp.bbox, cfg, events);
  }

  for (int j : assoc.unmatched_hypotheses) {
    const SignHypothesis& hyp = hypotheses[j];
    Track track;
    track.track_id = state.next_track_id++;
    track.last_bbox = hyp.bbox;
    track.last_seen_frame = frame_index;
    track.kind = hyp.kind;
    track.value_confidence[hyp.value] = hyp.confidence;
    track.value_hits[hyp.value] = 1;
    maybe_validate(track, frame_index, hyp.bbox, cfg, events);
    state.tracks.push_back(std::move(track));
  }

  // Tracks out-waited by occlusion die here; matched ones were just
  // refreshed, so only stale unmatched tracks go.
  std::erase_if(state.tracks, [&](const Track& t) {
    return frame_index - t.last_seen_frame > cfg.max_gap;
  });

  return events;
}

}  // namespace tsr
