#include "ptrack/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ptrack/config.hpp"
#include "ptrack/error.hpp"
#include "ptrack/io.hpp"
#include "ptrack/rng.hpp"

namespace ptrack {

namespace {

constexpr double kBlobSigmaCells = 2.0;
constexpr double kFeatureNoise = 0.05;
// Velocity follows a stationary AR(1) process so speeds stay near
// agent_speed_sigma over long sequences.
constexpr double kVelocityPersistence = 0.99;

// Stream keys for Rng::stream.
constexpr std::uint64_t kFeatureNoiseKey = 0x46450000;
constexpr std::uint64_t kSignatureKey = 0x53470000;

void reflect(double& pos, double& vel, double limit) {
  if (pos < 0.0) {
    pos = -pos;
    vel = -vel;
  } else if (pos > limit) {
    pos = 2.0 * limit - pos;
    vel = -vel;
  }
  pos = std::clamp(pos, 0.0, limit);
}

double altitude_at(const ScenarioConfig& c, std::size_t t) {
  const double s = c.frames > 1 ? static_cast<double>(t) / static_cast<double>(c.frames - 1) : 0.0;
  switch (c.altitude_shape) {
    case AltitudeShape::Constant: return c.altitude_start;
    case AltitudeShape::Linear: return c.altitude_start + (c.altitude_end - c.altitude_start) * s;
    case AltitudeShape::Sine:
      return c.altitude_start +
             (c.altitude_end - c.altitude_start) * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * s));
  }
  return c.altitude_start;
}

bool occluded(const ScenarioConfig& c, std::size_t agent, std::int64_t frame) {
  return std::any_of(c.occlusion_windows.begin(), c.occlusion_windows.end(), [&](const OcclusionWindow& w) {
    return w.agent == agent && frame >= w.start && frame <= w.end;
  });
}

}  // namespace

void ScenarioConfig::validate() const {
  if (frames < 1) throw Error(Errc::Config, "frames must be >= 1");
  if (!(arena_width > 0.0) || !(arena_height > 0.0)) throw Error(Errc::Config, "arena must be positive");
  if (!(fn_rate >= 0.0 && fn_rate <= 1.0)) throw Error(Errc::Config, "fn_rate must be in [0, 1]");
  if (!(fp_clutter_rate >= 0.0) || !std::isfinite(fp_clutter_rate)) {
    throw Error(Errc::Config, "fp_clutter_rate must be >= 0");
  }
  if (!(agent_speed_sigma >= 0.0) || !(jitter_sigma >= 0.0) || !(correspondence_noise >= 0.0)) {
    throw Error(Errc::Config, "noise levels must be >= 0");
  }
  if (!(altitude_start > 0.0) || !(altitude_end > 0.0)) throw Error(Errc::Config, "altitudes must be > 0");
  if (!std::isfinite(camera_rotation_deg) || !std::isfinite(camera_tx) || !std::isfinite(camera_ty)) {
    throw Error(Errc::Config, "camera motion must be finite");
  }
  if (feature_channels < 1) throw Error(Errc::Config, "feature_channels must be >= 1");
  if (!(feature_stride > 0.0)) throw Error(Errc::Config, "feature_stride must be > 0");
  for (const OcclusionWindow& w : occlusion_windows) {
    if (w.agent >= n_agents) throw Error(Errc::Config, "occlusion window names a missing agent");
    if (w.end < w.start) throw Error(Errc::Config, "occlusion window ends before it starts");
  }
}

Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Scenario sc;
  sc.config = config;
  Rng rng(config.seed);
  const double w = config.arena_width;
  const double h = config.arena_height;
  const double margin = std::min(20.0, 0.25 * std::min(w, h));

  struct Agent {
    Point pos;
    Point vel;
  };
  std::vector<Agent> agents(config.n_agents);
  for (Agent& a : agents) {
    a.pos = {rng.uniform(margin, w - margin), rng.uniform(margin, h - margin)};
    a.vel = {rng.normal(0.0, config.agent_speed_sigma), rng.normal(0.0, config.agent_speed_sigma)};
  }
  std::vector<Point> ghosts(config.persistent_fp_count);
  for (Point& g : ghosts) g = {rng.uniform(margin, w - margin), rng.uniform(margin, h - margin)};
  std::vector<Point> background(config.background_points);
  for (Point& b : background) b = {rng.uniform(0.0, w), rng.uniform(0.0, h)};

  Rng sig_rng = Rng::stream(config.seed, kSignatureKey);
  sc.signatures.resize(config.n_agents);
  for (auto& s : sc.signatures) {
    double norm = 0.0;
    do {
      s.assign(config.feature_channels, 0.0);
      norm = 0.0;
      for (double& v : s) {
        v = sig_rng.normal();
        norm += v * v;
      }
    } while (norm < 1e-12);
    for (double& v : s) v /= std::sqrt(norm);
  }

  const AffineTransform step = AffineTransform::rotation(
      config.camera_rotation_deg * std::numbers::pi / 180.0, {0.5 * w, 0.5 * h}, config.camera_tx,
      config.camera_ty);
  const double accel =
      std::sqrt(1.0 - kVelocityPersistence * kVelocityPersistence) * config.agent_speed_sigma;

  AffineTransform camera = AffineTransform::identity();
  for (std::size_t t = 0; t < config.frames; ++t) {
    const auto frame = static_cast<std::int64_t>(t + 1);
    if (t > 0) {
      camera = camera.then(step);
      for (Agent& a : agents) {
        a.vel.x = kVelocityPersistence * a.vel.x + rng.normal(0.0, accel);
        a.vel.y = kVelocityPersistence * a.vel.y + rng.normal(0.0, accel);
        a.pos.x += a.vel.x;
        a.pos.y += a.vel.y;
        reflect(a.pos.x, a.vel.x, w);
        reflect(a.pos.y, a.vel.y, h);
      }
    }
    sc.camera.push_back(camera);

    FrameInput in;
    in.frame_index = frame;
    in.altitude = altitude_at(config, t);
    std::vector<int> labels;
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const Point proj = warp_point(camera, agents[k].pos);
      sc.gt.add(k + 1, {frame, proj, 1.0});
      const bool dropped = rng.bernoulli(config.fn_rate);
      const double jx = rng.normal(0.0, config.jitter_sigma);
      const double jy = rng.normal(0.0, config.jitter_sigma);
      const double conf = rng.uniform(0.6, 0.95);
      if (dropped || occluded(config, k, frame)) continue;
      in.detections.push_back({{proj.x + jx, proj.y + jy}, conf, std::nullopt});
      labels.push_back(static_cast<int>(k));
    }
    for (const Point& g : ghosts) {
      const Point proj = warp_point(camera, g);
      const double jx = rng.normal(0.0, config.jitter_sigma);
      const double jy = rng.normal(0.0, config.jitter_sigma);
      in.detections.push_back({{proj.x + jx, proj.y + jy}, rng.uniform(0.5, 0.9), std::nullopt});
      labels.push_back(-2);
    }
    const std::uint64_t clutter = rng.poisson(config.fp_clutter_rate);
    for (std::uint64_t c = 0; c < clutter; ++c) {
      const Point p{rng.uniform(0.0, w), rng.uniform(0.0, h)};
      in.detections.push_back({p, rng.uniform(0.3, 0.7), std::nullopt});
      labels.push_back(-1);
    }
    if (t > 0) {
      const AffineTransform& prev = sc.camera[t - 1];
      for (const Point& b : background) {
        const Point p = warp_point(prev, b);
        const Point c = warp_point(camera, b);
        in.correspondences.push_back({p, {c.x + rng.normal(0.0, config.correspondence_noise),
                                          c.y + rng.normal(0.0, config.correspondence_noise)}});
      }
    }
    sc.frames.push_back(std::move(in));
    sc.detection_labels.push_back(std::move(labels));
  }
  return sc;
}

FeatureMap Scenario::feature_map(std::size_t i) const {
  const ScenarioConfig& c = config;
  const auto rows = static_cast<std::size_t>(std::ceil(c.arena_height / c.feature_stride));
  const auto cols = static_cast<std::size_t>(std::ceil(c.arena_width / c.feature_stride));
  FeatureMap map(rows, cols, c.feature_channels, c.feature_stride);
  Rng noise = Rng::stream(c.seed, kFeatureNoiseKey + i);
  for (float& v : map.data) v = static_cast<float>(noise.normal(0.0, kFeatureNoise));

  const std::int64_t frame = frames.at(i).frame_index;
  const double reach = 4.0 * kBlobSigmaCells;
  for (const auto& [id, pts] : gt.tracks) {
    // gt ids are 1-based agent indices with one point per frame.
    const Point p = pts.at(static_cast<std::size_t>(frame - 1)).position;
    const std::vector<double>& sig = signatures.at(id - 1);
    const double cx = p.x / c.feature_stride;
    const double cy = p.y / c.feature_stride;
    const auto r0 = static_cast<std::ptrdiff_t>(std::floor(cy - reach));
    const auto r1 = static_cast<std::ptrdiff_t>(std::ceil(cy + reach));
    const auto c0 = static_cast<std::ptrdiff_t>(std::floor(cx - reach));
    const auto c1 = static_cast<std::ptrdiff_t>(std::ceil(cx + reach));
    for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(r0, 0);
         r <= std::min<std::ptrdiff_t>(r1, static_cast<std::ptrdiff_t>(rows) - 1); ++r) {
      for (std::ptrdiff_t q = std::max<std::ptrdiff_t>(c0, 0);
           q <= std::min<std::ptrdiff_t>(c1, static_cast<std::ptrdiff_t>(cols) - 1); ++q) {
        const double dr = static_cast<double>(r) - cy;
        const double dq = static_cast<double>(q) - cx;
        const double g = std::exp(-(dr * dr + dq * dq) / (2.0 * kBlobSigmaCells * kBlobSigmaCells));
        for (std::size_t ch = 0; ch < c.feature_channels; ++ch) {
          map.at(static_cast<std::size_t>(r), static_cast<std::size_t>(q), ch) +=
              static_cast<float>(g * sig[ch]);
        }
      }
    }
  }
  return map;
}

FrameInput Scenario::frame_input(std::size_t i, bool with_features) const {
  FrameInput in = frames.at(i);
  if (with_features) in.features = std::make_shared<const FeatureMap>(feature_map(i));
  return in;
}

void write_bundle(const Scenario& sc, const std::filesystem::path& dir) {
  const SequenceBundlePaths paths{dir};
  std::filesystem::create_directories(dir);

  std::vector<DetectionRow> dets;
  std::vector<MetadataRow> meta;
  std::vector<CorrespondenceRow> corr;
  for (const FrameInput& f : sc.frames) {
    for (const Detection& d : f.detections) {
      dets.push_back({f.frame_index, quantize(d.position.x), quantize(d.position.y), quantize(d.confidence),
                      std::nullopt});
    }
    meta.push_back({f.frame_index, quantize(*f.altitude)});
    for (const Correspondence& c : f.correspondences) corr.push_back({f.frame_index, c});
  }
  std::vector<GtRow> gt;
  for (std::size_t t = 0; t < sc.frames.size(); ++t) {
    for (const auto& [id, pts] : sc.gt.tracks) {
      gt.push_back({pts[t].frame, id, pts[t].position.x, pts[t].position.y});
    }
  }
  write_file(paths.detections(), write_detections(dets));
  write_file(paths.metadata(), write_metadata(meta));
  write_file(paths.correspondences(), write_correspondences(corr));
  write_file(paths.gt(), write_gt(gt));

  std::string camera = "frame,m11,m12,m21,m22,t1,t2\n";
  for (std::size_t t = 0; t < sc.camera.size(); ++t) {
    const AffineTransform& a = sc.camera[t];
    camera += std::to_string(sc.frames[t].frame_index) + ',' + format_number(a.m11) + ',' +
              format_number(a.m12) + ',' + format_number(a.m21) + ',' + format_number(a.m22) + ',' +
              format_number(a.t1) + ',' + format_number(a.t2) + '\n';
  }
  write_file(paths.camera(), camera);

  std::string manifest = scenario_to_text(sc.config);
  manifest += "file.detections = detections.csv\n";
  manifest += "file.metadata = metadata.csv\n";
  manifest += "file.correspondences = correspondences.csv\n";
  manifest += "file.gt = gt.csv\n";
  manifest += "file.camera = camera.csv\n";
  if (sc.config.write_features) {
    manifest += "file.features = features/frame_NNNNNN.fmap\n";
    for (std::size_t t = 0; t < sc.frames.size(); ++t) {
      write_feature_map(paths.feature_file(sc.frames[t].frame_index), sc.feature_map(t));
    }
  }
  write_file(paths.manifest(), manifest);
}

}  // namespace ptrack
