#include "ptrack/lifecycle.hpp"

#include <cmath>
#include <numeric>

#include "ptrack/error.hpp"

namespace ptrack {

namespace {

void check_probability(std::optional<double> p) {
  if (p && (!(*p >= 0.0) || *p > 1.0)) {
    throw Error(Errc::InvalidScore, "validator probability outside [0, 1]");
  }
}

MatchOutcome advance(Track& track, std::optional<double> prob, const LifecycleConfig& config) {
  if (track.state == TrackState::Confirmed) return MatchOutcome::Active;
  if (!classification_gate_active(track.hits, config)) return MatchOutcome::Active;

  if (!config.classify) {
    if (track.hits >= config.min_hits) track.state = TrackState::Confirmed;
    return MatchOutcome::Active;
  }
  if (!prob) return MatchOutcome::Active;

  track.cls_scores.push_back(*prob);
  track.state = TrackState::PendingClassification;
  switch (confirm_decision(track, config)) {
    case ConfirmDecision::Confirm:
      track.state = TrackState::Confirmed;
      return MatchOutcome::Active;
    case ConfirmDecision::Terminate:
      return MatchOutcome::Terminated;
    case ConfirmDecision::KeepPending:
      if (track.hits >= config.min_hits) ++track.failed_evaluations;
      return MatchOutcome::Active;
  }
  return MatchOutcome::Active;
}

}  // namespace

const char* to_string(TrackState s) noexcept {
  switch (s) {
    case TrackState::Tentative: return "tentative";
    case TrackState::PendingClassification: return "pending";
    case TrackState::Confirmed: return "confirmed";
  }
  return "?";
}

const char* to_string(PositionSource s) noexcept {
  switch (s) {
    case PositionSource::Detection: return "detection";
    case PositionSource::Ddcf: return "ddcf";
    case PositionSource::Kalman: return "kalman";
  }
  return "?";
}

void LifecycleConfig::validate() const {
  if (cls_lead < 0 || min_hits <= cls_lead) {
    throw Error(Errc::Config, "require min_hits > cls_lead >= 0");
  }
  if (max_age <= 0) throw Error(Errc::Config, "max_age must be > 0");
  if (!(cls_confirm_threshold > 0.0 && cls_confirm_threshold < 1.0)) {
    throw Error(Errc::Config, "cls_confirm_threshold must be in (0, 1)");
  }
  if (tentative_miss_tolerance < 0) throw Error(Errc::Config, "tentative_miss_tolerance must be >= 0");
  if (pending_fail_patience < 1) throw Error(Errc::Config, "pending_fail_patience must be >= 1");
}

bool classification_gate_active(int hits, const LifecycleConfig& config) {
  return hits >= config.min_hits - config.cls_lead;
}

ConfirmDecision confirm_decision(const Track& track, const LifecycleConfig& config) {
  if (track.state != TrackState::PendingClassification) {
    throw Error(Errc::Internal, "confirm_decision on a track that is not pending");
  }
  if (track.cls_scores.empty()) {
    throw Error(Errc::Internal, "pending track without classification scores");
  }
  const double mean = std::accumulate(track.cls_scores.begin(), track.cls_scores.end(), 0.0) /
                      static_cast<double>(track.cls_scores.size());
  if (track.hits >= config.min_hits) {
    if (mean > config.cls_confirm_threshold) return ConfirmDecision::Confirm;
    if (track.failed_evaluations + 1 >= config.pending_fail_patience) return ConfirmDecision::Terminate;
  }
  return ConfirmDecision::KeepPending;
}

Spawned spawn_track(std::uint64_t id, const Point& measurement, double confidence,
                  std::optional<double> validator_prob, const LifecycleConfig& config,
                  const MotionConfig& motion) {
  check_probability(validator_prob);
  Spawned s;
  Track& t = s.track;
  t.id = id;
  t.kalman = init_state(measurement, motion);
  t.hits = 1;
  t.last_position = measurement;
  t.last_confidence = confidence;
  s.outcome = advance(t, validator_prob, config);
  return s;
}

MatchOutcome on_match(Track& track, const Point& measurement, double confidence,
                      std::optional<double> validator_prob, const LifecycleConfig& config,
                      const MotionConfig& motion) {
  check_probability(validator_prob);
  track.kalman = update(track.kalman, measurement, motion);
  ++track.hits;
  track.consecutive_misses = 0;
  track.last_position = measurement;
  track.last_source = PositionSource::Detection;
  track.last_confidence = confidence;
  return advance(track, validator_prob, config);
}

MissOutcome on_miss(Track& track, const LifecycleConfig& config) {
  ++track.consecutive_misses;
  const bool confirmed = track.state == TrackState::Confirmed;
  if ((!confirmed && track.consecutive_misses > config.tentative_miss_tolerance) ||
      track.consecutive_misses > config.max_age) {
    return MissOutcome::Delete;
  }
  return MissOutcome::Keep;
}

}  // namespace ptrack
