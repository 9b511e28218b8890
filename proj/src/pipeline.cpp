#include "ptrack/pipeline.hpp"

#include <algorithm>
#include <string>

#include "ptrack/error.hpp"

namespace ptrack {

void TrackerConfig::validate() const {
  motion.validate();
  gating.validate();
  lifecycle.validate();
  ransac.validate();
  dcf.validate();
}

Tracker::Tracker(TrackerConfig config, std::shared_ptr<const TrajectoryValidator> validator)
    : config_(std::move(config)), validator_(std::move(validator)) {
  config_.lifecycle.classify = config_.enable.classification && validator_ != nullptr;
  config_.validate();
}

std::optional<double> Tracker::classify(const Track* track, int next_hits, const FrameInput& input,
                                        const Detection& det) const {
  if (!config_.lifecycle.classify) return std::nullopt;
  if (track != nullptr && track->state == TrackState::Confirmed) return std::nullopt;
  if (!classification_gate_active(next_hits, config_.lifecycle)) return std::nullopt;
  ValidationContext ctx;
  ctx.frame = input.frame_index;
  ctx.position = det.position;
  ctx.detection_score = det.score;
  ctx.features = input.features.get();
  return validate(*validator_, ctx);
}

void Tracker::refresh_filter(Track& track, const FeatureMap& features) const {
  const FeaturePatch patch = extract_patch(features, track.last_position, config_.dcf.patch_cells);
  try {
    track.filter = track.filter ? update_filter(*track.filter, patch) : train_filter(patch, config_.dcf);
  } catch (const Error& e) {
    if (e.code() != Errc::DegeneratePatch) throw;
  }
}

FrameOutput Tracker::process_frame(const FrameInput& input) {
  if (last_frame_ && input.frame_index != *last_frame_ + 1) {
    throw Error(Errc::Sequencing, "expected frame " + std::to_string(*last_frame_ + 1) + ", got " +
                                      std::to_string(input.frame_index));
  }
  for (const Detection& d : input.detections) {
    if (!is_finite(d.position)) throw Error(Errc::InvalidInput, "non-finite detection");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      throw Error(Errc::InvalidInput, "detection confidence outside [0, 1]");
    }
  }
  if (input.features) input.features->validate();

  FrameOutput out;
  out.frame_index = input.frame_index;
  FrameDiagnostics& diag = out.diagnostics;
  const LifecycleConfig& life = config_.lifecycle;
  const bool ddcf_on = config_.enable.ddcf && input.features != nullptr;

  // (1) altitude-aware gate
  diag.gate = (config_.enable.altitude && input.altitude)
                  ? dynamic_threshold(*input.altitude, config_.gating)
                  : config_.gating.base_radius;

  // (2) camera motion
  if (config_.enable.cmc && !input.correspondences.empty()) {
    RansacConfig rc = config_.ransac;
    rc.seed += static_cast<std::uint64_t>(input.frame_index);
    try {
      diag.affine = estimate_affine(input.correspondences, rc).transform;
      diag.affine_estimated = true;
    } catch (const Error& e) {
      if (e.code() != Errc::NoMotionEstimate) throw;
      diag.affine = AffineTransform::identity();
      diag.cmc_fallback = true;
    }
  }

  // (3) predict and compensate
  std::vector<Point> predicted;
  predicted.reserve(tracks_.size());
  for (Track& t : tracks_) {
    t.kalman = predict(t.kalman, config_.motion);
    if (diag.affine_estimated) t.kalman = apply_affine(t.kalman, diag.affine);
    predicted.push_back(t.kalman.position());
  }

  // (4) gated assignment
  std::vector<Point> det_points;
  det_points.reserve(input.detections.size());
  for (const Detection& d : input.detections) det_points.push_back(d.position);
  const AssignmentResult assignment =
      solve_assignment(build_cost_matrix(predicted, det_points), diag.gate);

  std::vector<char> keep(tracks_.size(), 1);
  std::vector<OutputRecord> records;

  // (5) matched tracks
  for (const Match& m : assignment.matches) {
    Track& t = tracks_[m.track];
    const Detection& det = input.detections[m.detection];
    diag.matched_distance_sum += m.distance;
    ++diag.matches;
    const std::optional<double> prob = classify(&t, t.hits + 1, input, det);
    if (on_match(t, det.position, det.confidence, prob, life, config_.motion) ==
        MatchOutcome::Terminated) {
      keep[m.track] = 0;
      ++diag.deaths;
      continue;
    }
    if (t.state != TrackState::Confirmed) continue;
    if (ddcf_on && !config_.dcf.init_on_miss) refresh_filter(t, *input.features);
    records.push_back({t.id, det.position, det.confidence, PositionSource::Detection});
  }

  // (6) + (8) unmatched tracks: miss bookkeeping, then recovery for survivors
  for (std::size_t idx : assignment.unmatched_tracks) {
    Track& t = tracks_[idx];
    if (on_miss(t, life) == MissOutcome::Delete) {
      keep[idx] = 0;
      ++diag.deaths;
      continue;
    }
    if (t.state != TrackState::Confirmed) continue;

    bool recovered = false;
    if (ddcf_on) {
      if (!t.filter && config_.dcf.init_on_miss && prev_features_) refresh_filter(t, *prev_features_);
      if (t.filter) {
        const FeaturePatch patch =
            extract_patch(*input.features, t.kalman.position(), config_.dcf.patch_cells);
        const Localization loc = localize(*t.filter, patch);
        if (loc.psr >= config_.dcf.psr_min) {
          const Point p{patch.origin.x + loc.offset.x, patch.origin.y + loc.offset.y};
          t.kalman = update(t.kalman, p, config_.motion);
          t.last_position = p;
          t.last_source = PositionSource::Ddcf;
          records.push_back({t.id, p, t.last_confidence, PositionSource::Ddcf});
          ++diag.recoveries;
          recovered = true;
        }
      }
    }
    if (!recovered && config_.emit_coasted) {
      records.push_back({t.id, t.kalman.position(), t.last_confidence, PositionSource::Kalman});
    }
  }

  std::vector<Track> survivors;
  survivors.reserve(tracks_.size() + assignment.unmatched_detections.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (keep[i]) survivors.push_back(std::move(tracks_[i]));
  }

  // (7) births
  for (std::size_t j : assignment.unmatched_detections) {
    const Detection& det = input.detections[j];
    const std::optional<double> prob = classify(nullptr, 1, input, det);
    Spawned s = spawn_track(next_id_++, det.position, det.confidence, prob, life, config_.motion);
    ++diag.births;
    if (s.outcome == MatchOutcome::Terminated) {
      ++diag.deaths;
      continue;
    }
    if (s.track.state == TrackState::Confirmed) {
      if (ddcf_on && !config_.dcf.init_on_miss) refresh_filter(s.track, *input.features);
      records.push_back({s.track.id, det.position, det.confidence, PositionSource::Detection});
    }
    survivors.push_back(std::move(s.track));
  }
  tracks_ = std::move(survivors);

  // (9) emit
  std::sort(records.begin(), records.end(),
            [](const OutputRecord& a, const OutputRecord& b) { return a.track_id < b.track_id; });
  out.records = std::move(records);
  prev_features_ = input.features;
  last_frame_ = input.frame_index;
  return out;
}

namespace {

void accumulate(SequenceSummary& s, const FrameOutput& f) {
  s.births += f.diagnostics.births;
  s.deaths += f.diagnostics.deaths;
  s.recoveries += f.diagnostics.recoveries;
  s.cmc_fallbacks += f.diagnostics.cmc_fallback ? 1 : 0;
  s.matches += f.diagnostics.matches;
  s.matched_distance_sum += f.diagnostics.matched_distance_sum;
  for (const OutputRecord& r : f.records) {
    if (r.source == PositionSource::Kalman) continue;
    s.confirmed_ids.insert(r.track_id);
    auto [it, inserted] = s.spans.try_emplace(r.track_id);
    TrackSpan& span = it->second;
    if (inserted) span.first_frame = f.frame_index;
    span.last_frame = f.frame_index;
    ++span.records;
    if (r.source == PositionSource::Ddcf) ++span.ddcf_records;
  }
}

}  // namespace

SequenceResult run_sequence(std::size_t frame_count, const FrameSource& source,
                            const TrackerConfig& config,
                            std::shared_ptr<const TrajectoryValidator> validator) {
  if (frame_count == 0) throw Error(Errc::InvalidInput, "sequence has no frames");
  Tracker tracker(config, std::move(validator));
  SequenceResult result;
  result.frames.reserve(frame_count);
  for (std::size_t i = 0; i < frame_count; ++i) {
    const FrameInput input = source(i);
    try {
      result.frames.push_back(tracker.process_frame(input));
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(input.frame_index) + ": " + e.what());
    }
    accumulate(result.summary, result.frames.back());
  }
  return result;
}

SequenceResult run_sequence(std::span<const FrameInput> inputs, const TrackerConfig& config,
                            std::shared_ptr<const TrajectoryValidator> validator) {
  return run_sequence(
      inputs.size(), [&](std::size_t i) { return inputs[i]; }, config, std::move(validator));
}

}  // namespace ptrack
