#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ptrack/ddcf.hpp"
#include "ptrack/geometry.hpp"
#include "ptrack/motion.hpp"

namespace ptrack {

enum class TrackState { Tentative, PendingClassification, Confirmed };

enum class PositionSource { Detection, Ddcf, Kalman };

const char* to_string(TrackState s) noexcept;
const char* to_string(PositionSource s) noexcept;

struct LifecycleConfig {
  int min_hits = 30;                   // N_thresh
  int max_age = 60;                    // frames a missed track is kept
  int cls_lead = 3;                    // classification starts at min_hits - cls_lead
  double cls_confirm_threshold = 0.8;  // required mean validator probability
  int tentative_miss_tolerance = 3;
  int pending_fail_patience = 10;
  /// False when no validator is attached: confirmation then depends on
  /// min_hits alone.
  bool classify = true;

  void validate() const;
};

struct Track {
  std::uint64_t id = 0;
  TrackState state = TrackState::Tentative;
  KalmanState kalman;
  int hits = 0;  // matched frames since birth (N_active)
  int consecutive_misses = 0;
  std::vector<double> cls_scores;
  int failed_evaluations = 0;  // consecutive failed confirmations after min_hits
  Point last_position;
  PositionSource last_source = PositionSource::Detection;
  double last_confidence = 1.0;
  std::optional<CorrelationFilter> filter;
};

enum class ConfirmDecision { Confirm, KeepPending, Terminate };
enum class MatchOutcome { Active, Terminated };
enum class MissOutcome { Keep, Delete };

/// Tentative-to-pending gate: hits >= min_hits - cls_lead.
bool classification_gate_active(int hits, const LifecycleConfig& config);

ConfirmDecision confirm_decision(const Track& track, const LifecycleConfig& config);

struct Spawned {
  Track track;
  MatchOutcome outcome = MatchOutcome::Active;
};

/// New Tentative track with one hit, advanced through the state machine in
/// case the thresholds are already met at birth.
Spawned spawn_track(std::uint64_t id, const Point& measurement, double confidence,
                  std::optional<double> validator_prob, const LifecycleConfig& config,
                  const MotionConfig& motion);

/// Bookkeeping for a track that received a gated detection. `validator_prob`
/// is ignored while the classification gate is inactive.
MatchOutcome on_match(Track& track, const Point& measurement, double confidence,
                      std::optional<double> validator_prob, const LifecycleConfig& config,
                      const MotionConfig& motion);

MissOutcome on_miss(Track& track, const LifecycleConfig& config);

}  // namespace ptrack
