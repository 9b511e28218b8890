#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ptrack/cmc.hpp"
#include "ptrack/ddcf.hpp"
#include "ptrack/metrics.hpp"
#include "ptrack/pipeline.hpp"

namespace ptrack {

enum class AltitudeShape { Constant, Linear, Sine };

/// Detection dropout window for one agent, inclusive frame range.
struct OcclusionWindow {
  std::size_t agent = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct ScenarioConfig {
  std::size_t n_agents = 10;
  std::size_t frames = 300;
  double arena_width = 640.0;
  double arena_height = 480.0;
  double agent_speed_sigma = 1.0;  // px/frame, stationary per-axis velocity spread
  double altitude_start = 100.0;
  double altitude_end = 100.0;
  AltitudeShape altitude_shape = AltitudeShape::Constant;
  double camera_rotation_deg = 0.0;  // per frame, about the arena centre
  double camera_tx = 0.0;            // px/frame
  double camera_ty = 0.0;
  double fn_rate = 0.0;
  double fp_clutter_rate = 0.0;  // expected clutter detections per frame
  std::size_t persistent_fp_count = 0;
  double jitter_sigma = 0.0;
  std::vector<OcclusionWindow> occlusion_windows;
  std::size_t feature_channels = 8;
  double feature_stride = 4.0;
  bool write_features = true;
  std::size_t background_points = 50;
  double correspondence_noise = 0.2;  // px
  std::uint64_t seed = 1;

  void validate() const;
};

/// Generated sequence. Frames are numbered 1..frames.
struct Scenario {
  ScenarioConfig config;
  TrajectorySet gt;
  std::vector<FrameInput> frames;  // features left empty; see feature_map()
  std::vector<AffineTransform> camera;  // world -> image for each frame
  /// Per detection of each frame: agent index, or -1 clutter, -2 ghost.
  std::vector<std::vector<int>> detection_labels;
  std::vector<std::vector<double>> signatures;  // unit-norm, per agent

  /// Synthesizes the feature map of frame index `i` (0-based position in
  /// `frames`); deterministic per seed and frame.
  FeatureMap feature_map(std::size_t i) const;
  /// frames[i], with the synthetic feature map attached when requested.
  FrameInput frame_input(std::size_t i, bool with_features) const;
};

Scenario generate(const ScenarioConfig& config);

/// Writes detections, metadata, correspondences, gt, camera, manifest and
/// (when enabled) per-frame feature maps.
void write_bundle(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace ptrack
