#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptrack/cmc.hpp"
#include "ptrack/ddcf.hpp"
#include "ptrack/lifecycle.hpp"
#include "ptrack/metrics.hpp"
#include "ptrack/pipeline.hpp"

namespace ptrack {

// ---------------------------------------------------------------------------
// Number text form shared by every writer: fixed notation, at most six
// decimals, trailing zeros dropped.

std::string format_number(double value);
/// Rounds to the six-decimal grid that format_number writes.
double quantize(double value);

// ---------------------------------------------------------------------------
// Generic header-checked CSV. Line numbers are 1-based (header = line 1).

class CsvRow {
 public:
  CsvRow(std::size_t line, std::vector<std::string_view> fields) : line_(line), fields_(std::move(fields)) {}

  std::size_t line() const { return line_; }
  std::size_t size() const { return fields_.size(); }
  std::string_view field(std::size_t i) const { return fields_.at(i); }

  double number(std::size_t i) const;
  std::optional<double> optional_number(std::size_t i) const;
  /// Non-negative frame index.
  std::int64_t frame(std::size_t i) const;
  std::uint64_t id(std::size_t i) const;

 private:
  std::size_t line_;
  std::vector<std::string_view> fields_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

/// Parses `text` (views stay valid while `text` lives). The first line must
/// equal one of `headers` exactly; every row must have as many fields.
CsvTable parse_csv(std::string_view text, std::initializer_list<std::vector<std::string>> headers);
CsvTable parse_csv(std::string_view text, const std::vector<std::string>& header);

// ---------------------------------------------------------------------------
// Record types of the five text formats.

struct DetectionRow {
  std::int64_t frame = 0;
  double x = 0.0, y = 0.0;
  double conf = 1.0;
  std::optional<double> score;
  friend bool operator==(const DetectionRow&, const DetectionRow&) = default;
};

struct MetadataRow {
  std::int64_t frame = 0;
  double altitude = 0.0;
  friend bool operator==(const MetadataRow&, const MetadataRow&) = default;
};

struct CorrespondenceRow {
  std::int64_t frame = 0;
  Correspondence pair;
  friend bool operator==(const CorrespondenceRow& a, const CorrespondenceRow& b) {
    return a.frame == b.frame && a.pair.prev == b.pair.prev && a.pair.cur == b.pair.cur;
  }
};

struct GtRow {
  std::int64_t frame = 0;
  std::uint64_t id = 0;
  double x = 0.0, y = 0.0;
  friend bool operator==(const GtRow&, const GtRow&) = default;
};

struct TrackRow {
  std::int64_t frame = 0;
  std::uint64_t id = 0;
  double x = 0.0, y = 0.0;
  double conf = 0.0;
  PositionSource source = PositionSource::Detection;
  friend bool operator==(const TrackRow&, const TrackRow&) = default;
};

std::vector<DetectionRow> parse_detections(std::string_view text);
std::vector<MetadataRow> parse_metadata(std::string_view text);
std::vector<CorrespondenceRow> parse_correspondences(std::string_view text);
std::vector<GtRow> parse_gt(std::string_view text);
std::vector<TrackRow> parse_tracks(std::string_view text);

std::string write_detections(std::span<const DetectionRow> rows);
std::string write_metadata(std::span<const MetadataRow> rows);
std::string write_correspondences(std::span<const CorrespondenceRow> rows);
std::string write_gt(std::span<const GtRow> rows);
std::string write_tracks(std::span<const TrackRow> rows);

TrajectorySet gt_trajectories(std::span<const GtRow> rows);
TrajectorySet track_trajectories(std::span<const TrackRow> rows);
std::vector<TrackRow> track_rows(std::span<const FrameOutput> frames);

// ---------------------------------------------------------------------------
// Binary feature maps: "FMAP", u32 version = 1, u32 height, u32 width,
// u32 channels, f32 stride, then f32 values channel-last row-major; all
// little-endian.

std::string encode_feature_map(const FeatureMap& map);
FeatureMap decode_feature_map(std::string_view bytes);

// ---------------------------------------------------------------------------
// Files.

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

FeatureMap read_feature_map(const std::filesystem::path& path);
void write_feature_map(const std::filesystem::path& path, const FeatureMap& map);

/// Standard file names inside a sequence bundle directory.
struct SequenceBundlePaths {
  std::filesystem::path dir;

  std::filesystem::path detections() const { return dir / "detections.csv"; }
  std::filesystem::path metadata() const { return dir / "metadata.csv"; }
  std::filesystem::path correspondences() const { return dir / "correspondences.csv"; }
  std::filesystem::path features_dir() const { return dir / "features"; }
  std::filesystem::path feature_file(std::int64_t frame) const;
  std::filesystem::path gt() const { return dir / "gt.csv"; }
  std::filesystem::path camera() const { return dir / "camera.csv"; }
  std::filesystem::path manifest() const { return dir / "manifest.txt"; }
};

/// A bundle's per-frame inputs; feature maps are read lazily per frame.
struct SequenceBundle {
  SequenceBundlePaths paths;
  std::vector<std::int64_t> frames;  // contiguous, ascending
  std::map<std::int64_t, std::vector<Detection>> detections;
  std::map<std::int64_t, double> altitude;
  std::map<std::int64_t, std::vector<Correspondence>> correspondences;
  bool has_features = false;

  FrameInput frame_input(std::size_t index, bool with_features) const;
};

/// Throws Errc::InvalidInput when the directory or its detections file is missing.
SequenceBundle load_bundle(const std::filesystem::path& dir);

}  // namespace ptrack
