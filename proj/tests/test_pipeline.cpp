#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "ptrack/error.hpp"
#include "ptrack/io.hpp"
#include "ptrack/pipeline.hpp"
#include "ptrack/simulate.hpp"
#include "support/oracles.hpp"

using namespace ptrack;

namespace {

FrameInput single(std::int64_t frame, std::vector<Point> points) {
  FrameInput f;
  f.frame_index = frame;
  for (const Point& p : points) f.detections.push_back({p, 0.9, std::nullopt});
  return f;
}

SequenceResult run(const Scenario& s, const TrackerConfig& config, bool features,
                   std::shared_ptr<const TrajectoryValidator> validator = nullptr) {
  return run_sequence(
      s.frames.size(), [&](std::size_t i) { return s.frame_input(i, features); }, config, std::move(validator));
}

TrackerConfig baseline_config() {
  TrackerConfig c;
  c.enable = {false, false, false, false};
  return c;
}

// Predicted id nearest to `agent`'s ground-truth position at `frame`, if within 5 px.
std::optional<std::uint64_t> id_near(const Scenario& s, const SequenceResult& r, std::size_t agent,
                                     std::int64_t frame) {
  const auto& gt = s.gt.tracks.at(agent + 1);
  auto it = std::find_if(gt.begin(), gt.end(), [&](const TrajectoryPoint& p) { return p.frame == frame; });
  if (it == gt.end()) return std::nullopt;
  for (const FrameOutput& out : r.frames) {
    if (out.frame_index != frame) continue;
    for (const OutputRecord& rec : out.records) {
      if (distance(rec.position, it->position) < 5.0) return rec.track_id;
    }
  }
  return std::nullopt;
}

}  // namespace

TEST(Pipeline, EmptyFrameCoastsSilentlyByDefault) {
  for (bool coast : {false, true}) {
    TrackerConfig c = baseline_config();
    c.emit_coasted = coast;
    Tracker tracker(c);
    for (std::int64_t f = 1; f <= 30; ++f) tracker.process_frame(single(f, {{100.0 + f, 50.0}}));
    ASSERT_EQ(tracker.tracks().size(), 1u);
    ASSERT_EQ(tracker.tracks()[0].state, TrackState::Confirmed);

    const FrameOutput out = tracker.process_frame(single(31, {}));
    EXPECT_EQ(tracker.tracks()[0].consecutive_misses, 1);
    if (!coast) {
      EXPECT_TRUE(out.records.empty());
    } else {
      ASSERT_EQ(out.records.size(), 1u);
      EXPECT_EQ(out.records[0].source, PositionSource::Kalman);
      EXPECT_NEAR(out.records[0].position.x, 131.0, 0.5);
    }
  }
}

TEST(Pipeline, SingleCleanObjectReportsFromFrame30) {
  std::vector<FrameInput> frames;
  for (std::int64_t f = 1; f <= 100; ++f) frames.push_back(single(f, {{20.0 + 1.5 * f, 300.0 - 0.5 * f}}));
  const SequenceResult r = run_sequence(frames, TrackerConfig{});
  EXPECT_EQ(r.summary.predicted_count(), 1u);
  for (const FrameOutput& out : r.frames) {
    if (out.frame_index < 30) {
      EXPECT_TRUE(out.records.empty()) << out.frame_index;
    } else {
      ASSERT_EQ(out.records.size(), 1u) << out.frame_index;
      EXPECT_EQ(out.records[0].track_id, 1u);
      EXPECT_EQ(out.records[0].source, PositionSource::Detection);
    }
  }
}

TEST(Pipeline, OcclusionBridgedByDdcf) {
  ScenarioConfig sc;
  sc.n_agents = 3;
  sc.frames = 150;
  sc.seed = 5;
  sc.occlusion_windows = {{0, 50, 70}};
  const Scenario s = generate(sc);
  const SequenceResult r = run(s, TrackerConfig{}, true);

  const auto before = id_near(s, r, 0, 49);
  const auto after = id_near(s, r, 0, 71);
  ASSERT_TRUE(before.has_value());
  ASSERT_TRUE(after.has_value());
  EXPECT_EQ(*before, *after);

  std::size_t ddcf = 0;
  for (const FrameOutput& out : r.frames) {
    if (out.frame_index < 50 || out.frame_index > 70) continue;
    for (const OutputRecord& rec : out.records) {
      if (rec.track_id != *before) continue;
      EXPECT_EQ(rec.source, PositionSource::Ddcf) << out.frame_index;
      ++ddcf;
    }
  }
  EXPECT_EQ(ddcf, 21u);
}

TEST(Pipeline, OcclusionWithoutFeaturesChangesIdentity) {
  ScenarioConfig sc;
  sc.n_agents = 3;
  sc.frames = 150;
  sc.seed = 5;
  sc.occlusion_windows = {{0, 50, 70}};
  const Scenario s = generate(sc);
  TrackerConfig c;
  c.lifecycle.max_age = 5;
  const SequenceResult r = run(s, c, false);
  const auto before = id_near(s, r, 0, 49);
  ASSERT_TRUE(before.has_value());
  EXPECT_NE(id_near(s, r, 0, 71), before);
}

TEST(Pipeline, AllEmptyFramesPredictNothing) {
  std::vector<FrameInput> frames;
  for (std::int64_t f = 1; f <= 40; ++f) frames.push_back(single(f, {}));
  EXPECT_EQ(run_sequence(frames, TrackerConfig{}).summary.predicted_count(), 0u);
}

TEST(Pipeline, CleanFiveAgents) {
  ScenarioConfig sc;
  sc.n_agents = 5;
  sc.frames = 200;
  sc.seed = 17;
  const Scenario s = generate(sc);
  const SequenceResult r = run(s, TrackerConfig{}, false);
  EXPECT_EQ(r.summary.predicted_count(), 5u);
}

TEST(Pipeline, OracleValidatorRejectsGhosts) {
  ScenarioConfig sc;
  sc.n_agents = 6;
  sc.frames = 200;
  sc.persistent_fp_count = 4;
  sc.seed = 23;
  const Scenario s = generate(sc);
  auto oracle_validator = std::make_shared<oracle::OracleValidator>(s.gt, 3.0);
  EXPECT_EQ(run(s, TrackerConfig{}, false, oracle_validator).summary.predicted_count(), 6u);
  EXPECT_EQ(run(s, TrackerConfig{}, false).summary.predicted_count(), 10u);
}

TEST(Pipeline, AllEnhancementsOffIsPointSort) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    ScenarioConfig sc;
    sc.n_agents = 12;
    sc.frames = 250;
    sc.fn_rate = 0.1;
    sc.fp_clutter_rate = 2.0;
    sc.jitter_sigma = 0.7;
    sc.altitude_start = 50.0;
    sc.altitude_end = 120.0;
    sc.altitude_shape = AltitudeShape::Linear;
    sc.seed = seed;
    const Scenario s = generate(sc);
    const TrackerConfig c = baseline_config();

    std::vector<FrameInput> inputs;
    for (std::size_t i = 0; i < s.frames.size(); ++i) inputs.push_back(s.frame_input(i, false));
    const SequenceResult r = run_sequence(inputs, c);
    const std::vector<oracle::BaselineRecord> expected = oracle::point_sort(inputs, c);

    std::vector<oracle::BaselineRecord> got;
    for (const FrameOutput& out : r.frames) {
      for (const OutputRecord& rec : out.records) got.push_back({out.frame_index, rec.track_id, rec.position});
    }
    ASSERT_GT(expected.size(), 1000u);
    ASSERT_EQ(got.size(), expected.size()) << "seed " << seed;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].frame, expected[i].frame);
      EXPECT_EQ(got[i].id, expected[i].id);
      EXPECT_NEAR(got[i].position.x, expected[i].position.x, 1e-9);
      EXPECT_NEAR(got[i].position.y, expected[i].position.y, 1e-9);
    }
  }
}

TEST(Pipeline, TrackIdsNeverReused) {
  ScenarioConfig sc;
  sc.n_agents = 10;
  sc.frames = 300;
  sc.fn_rate = 0.2;
  sc.fp_clutter_rate = 3.0;
  sc.seed = 31;
  const Scenario s = generate(sc);
  Tracker tracker(TrackerConfig{});
  std::set<std::uint64_t> retired;
  std::set<std::uint64_t> alive;
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    tracker.process_frame(s.frame_input(i, true));
    std::set<std::uint64_t> now;
    for (const Track& t : tracker.tracks()) {
      EXPECT_TRUE(now.insert(t.id).second) << "duplicate id " << t.id;
      EXPECT_FALSE(retired.count(t.id)) << "reused id " << t.id;
    }
    for (std::uint64_t id : alive) {
      if (!now.count(id)) retired.insert(id);
    }
    alive = std::move(now);
  }
  EXPECT_GT(retired.size(), 0u);
}

TEST(Pipeline, DdcfNeverOutlivesMaxAge) {
  ScenarioConfig sc;
  sc.n_agents = 4;
  sc.frames = 260;
  sc.seed = 41;
  sc.occlusion_windows = {{0, 100, 260}, {2, 120, 260}};
  const Scenario s = generate(sc);
  TrackerConfig c;
  c.lifecycle.max_age = 40;
  const SequenceResult r = run(s, c, true);
  for (auto [agent, last_seen] : {std::pair<std::size_t, std::int64_t>{0, 99}, {2, 119}}) {
    const auto id = id_near(s, r, agent, last_seen);
    ASSERT_TRUE(id.has_value());
    const TrackSpan& span = r.summary.spans.at(*id);
    EXPECT_LE(span.last_frame, last_seen + c.lifecycle.max_age);
    EXPECT_GT(span.ddcf_records, 0u);
  }
}

TEST(Pipeline, DeterministicOutput) {
  ScenarioConfig sc;
  sc.n_agents = 8;
  sc.frames = 150;
  sc.fn_rate = 0.15;
  sc.fp_clutter_rate = 1.0;
  sc.jitter_sigma = 0.5;
  sc.camera_rotation_deg = 0.1;
  sc.camera_tx = 1.0;
  sc.seed = 3;
  const Scenario s = generate(sc);
  const std::string a = write_tracks(track_rows(run(s, TrackerConfig{}, true).frames));
  const std::string b = write_tracks(track_rows(run(s, TrackerConfig{}, true).frames));
  EXPECT_EQ(a, b);
  EXPECT_GT(a.size(), 1000u);
}

TEST(Pipeline, PrefixOutputsIgnoreLaterFrames) {
  ScenarioConfig sc;
  sc.n_agents = 6;
  sc.frames = 120;
  sc.fn_rate = 0.2;
  sc.seed = 12;
  const Scenario s = generate(sc);
  const SequenceResult full = run(s, TrackerConfig{}, true);
  const std::size_t k = 70;
  const SequenceResult prefix = run_sequence(
      k, [&](std::size_t i) { return s.frame_input(i, true); }, TrackerConfig{});
  for (std::size_t i = 0; i < k; ++i) {
    ASSERT_EQ(prefix.frames[i].records.size(), full.frames[i].records.size());
    for (std::size_t j = 0; j < prefix.frames[i].records.size(); ++j) {
      EXPECT_EQ(prefix.frames[i].records[j].track_id, full.frames[i].records[j].track_id);
      EXPECT_EQ(prefix.frames[i].records[j].position, full.frames[i].records[j].position);
    }
  }
}

TEST(Pipeline, FrameGapIsSequencingError) {
  Tracker tracker(TrackerConfig{});
  tracker.process_frame(single(1, {{10, 10}}));
  for (std::int64_t bad : {1, 3, 0}) {
    try {
      tracker.process_frame(single(bad, {}));
      FAIL() << "frame " << bad << " accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::Sequencing);
    }
  }
  EXPECT_NO_THROW(tracker.process_frame(single(2, {})));
}

TEST(Pipeline, SequenceErrorNamesFrame) {
  std::vector<FrameInput> frames{single(1, {}), single(2, {}), single(2, {})};
  try {
    run_sequence(frames, TrackerConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Sequencing);
    EXPECT_NE(std::string(e.what()).find("frame 2"), std::string::npos);
  }
  EXPECT_THROW(run_sequence(std::span<const FrameInput>{}, TrackerConfig{}), Error);
}

TEST(Pipeline, InvalidAltitudePropagates) {
  Tracker tracker(TrackerConfig{});
  FrameInput f = single(1, {{10, 10}});
  f.altitude = -5.0;
  EXPECT_THROW(tracker.process_frame(f), Error);
}
