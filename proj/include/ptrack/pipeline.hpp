#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "ptrack/assignment.hpp"
#include "ptrack/cmc.hpp"
#include "ptrack/ddcf.hpp"
#include "ptrack/lifecycle.hpp"
#include "ptrack/motion.hpp"
#include "ptrack/validators.hpp"

namespace ptrack {

struct Detection {
  Point position;
  double confidence = 1.0;
  std::optional<double> score;  // external validator probability, if any
};

struct FrameInput {
  std::int64_t frame_index = 0;
  std::vector<Detection> detections;
  std::optional<double> altitude;  // m
  std::vector<Correspondence> correspondences;
  std::shared_ptr<const FeatureMap> features;
};

struct OutputRecord {
  std::uint64_t track_id = 0;
  Point position;
  double confidence = 0.0;
  PositionSource source = PositionSource::Detection;
};

struct FrameDiagnostics {
  double gate = 0.0;
  AffineTransform affine;
  bool affine_estimated = false;
  bool cmc_fallback = false;  // correspondences present but no estimate
  std::size_t births = 0;
  std::size_t deaths = 0;
  std::size_t recoveries = 0;
  std::size_t matches = 0;
  double matched_distance_sum = 0.0;  // predicted-to-detection px over matches
};

struct FrameOutput {
  std::int64_t frame_index = 0;
  std::vector<OutputRecord> records;  // ascending track id
  FrameDiagnostics diagnostics;
};

/// Individually switchable tracker enhancements; all off is point-SORT.
struct Enhancements {
  bool cmc = true;
  bool altitude = true;
  bool classification = true;
  bool ddcf = true;
};

struct TrackerConfig {
  MotionConfig motion;
  GatingPolicy gating;
  LifecycleConfig lifecycle;
  RansacConfig ransac;
  DcfConfig dcf;
  Enhancements enable;
  bool emit_coasted = false;

  void validate() const;
};

/// Online tracker for one sequence. Frames must arrive with consecutive
/// indices; nothing beyond the current frame is ever read.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config, std::shared_ptr<const TrajectoryValidator> validator = nullptr);

  FrameOutput process_frame(const FrameInput& input);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return config_; }

 private:
  std::optional<double> classify(const Track* track, int next_hits, const FrameInput& input,
                                 const Detection& det) const;
  void refresh_filter(Track& track, const FeatureMap& features) const;

  TrackerConfig config_;
  std::shared_ptr<const TrajectoryValidator> validator_;
  std::vector<Track> tracks_;
  std::uint64_t next_id_ = 1;
  std::optional<std::int64_t> last_frame_;
  std::shared_ptr<const FeatureMap> prev_features_;
};

struct TrackSpan {
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  std::size_t records = 0;
  std::size_t ddcf_records = 0;
};

struct SequenceSummary {
  std::set<std::uint64_t> confirmed_ids;
  std::map<std::uint64_t, TrackSpan> spans;
  std::size_t births = 0;
  std::size_t deaths = 0;
  std::size_t recoveries = 0;
  std::size_t cmc_fallbacks = 0;
  std::size_t matches = 0;
  double matched_distance_sum = 0.0;

  /// Estimated trajectory count (y-hat).
  std::size_t predicted_count() const { return confirmed_ids.size(); }
  double mean_matched_distance() const {
    return matches == 0 ? 0.0 : matched_distance_sum / static_cast<double>(matches);
  }
};

struct SequenceResult {
  std::vector<FrameOutput> frames;
  SequenceSummary summary;
};

using FrameSource = std::function<FrameInput(std::size_t)>;

/// Streams `frame_count` frames produced on demand by `source`.
SequenceResult run_sequence(std::size_t frame_count, const FrameSource& source,
                            const TrackerConfig& config,
                            std::shared_ptr<const TrajectoryValidator> validator = nullptr);

SequenceResult run_sequence(std::span<const FrameInput> inputs, const TrackerConfig& config,
                            std::shared_ptr<const TrajectoryValidator> validator = nullptr);

}  // namespace ptrack
