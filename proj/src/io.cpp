#include "ptrack/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "ptrack/error.hpp"

namespace fs = std::filesystem;

namespace ptrack {

namespace {

const std::vector<std::string> kDetectionHeader = {"frame", "x", "y", "conf"};
const std::vector<std::string> kDetectionScoreHeader = {"frame", "x", "y", "conf", "score"};
const std::vector<std::string> kMetadataHeader = {"frame", "altitude"};
const std::vector<std::string> kCorrespondenceHeader = {"frame", "prev_x", "prev_y", "cur_x", "cur_y"};
const std::vector<std::string> kGtHeader = {"frame", "id", "x", "y"};
const std::vector<std::string> kTrackHeader = {"frame", "id", "x", "y", "conf", "source"};

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
bool parse_integer(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

PositionSource parse_source(const CsvRow& row, std::size_t i) {
  const std::string_view s = row.field(i);
  if (s == "detection") return PositionSource::Detection;
  if (s == "ddcf") return PositionSource::Ddcf;
  if (s == "kalman") return PositionSource::Kalman;
  throw ParseError(row.line(), "unknown source '" + std::string(s) + "'");
}

std::string checked(double v) {
  if (!std::isfinite(v)) throw Error(Errc::InvalidInput, "cannot serialize a non-finite value");
  return format_number(v);
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 6);
  std::string s(buf, res.ptr);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

double quantize(double value) {
  const std::string s = format_number(value);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

double CsvRow::number(std::size_t i) const {
  double v = 0.0;
  if (!parse_double(field(i), v)) {
    throw ParseError(line_, "field " + std::to_string(i + 1) + " is not a finite number: '" +
                                std::string(field(i)) + "'");
  }
  return v;
}

std::optional<double> CsvRow::optional_number(std::size_t i) const {
  if (field(i).empty()) return std::nullopt;
  return number(i);
}

std::int64_t CsvRow::frame(std::size_t i) const {
  std::int64_t v = 0;
  if (!parse_integer(field(i), v)) {
    throw ParseError(line_, "frame is not an integer: '" + std::string(field(i)) + "'");
  }
  if (v < 0) throw ParseError(line_, "negative frame index");
  return v;
}

std::uint64_t CsvRow::id(std::size_t i) const {
  std::uint64_t v = 0;
  if (!parse_integer(field(i), v)) {
    throw ParseError(line_, "id is not a non-negative integer: '" + std::string(field(i)) + "'");
  }
  return v;
}

CsvTable parse_csv(std::string_view text, std::initializer_list<std::vector<std::string>> headers) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!have_header) {
      for (const auto& h : headers) {
        if (line == join(h)) {
          table.header = h;
          have_header = true;
          break;
        }
      }
      if (!have_header) {
        throw ParseError(line_no, "expected header '" + join(*headers.begin()) + "', got '" +
                                      std::string(line) + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields = split(line);
    if (fields.size() != table.header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    table.rows.emplace_back(line_no, std::move(fields));
  }
  return table;
}

CsvTable parse_csv(std::string_view text, const std::vector<std::string>& header) {
  return parse_csv(text, {header});
}

std::vector<DetectionRow> parse_detections(std::string_view text) {
  const CsvTable t = parse_csv(text, {kDetectionHeader, kDetectionScoreHeader});
  const bool has_score = t.header.size() == 5;
  std::vector<DetectionRow> out;
  out.reserve(t.rows.size());
  for (const CsvRow& r : t.rows) {
    DetectionRow d{r.frame(0), r.number(1), r.number(2), r.number(3), std::nullopt};
    if (d.conf < 0.0 || d.conf > 1.0) throw ParseError(r.line(), "conf outside [0, 1]");
    if (has_score) {
      d.score = r.optional_number(4);
      if (d.score && (*d.score < 0.0 || *d.score > 1.0)) throw ParseError(r.line(), "score outside [0, 1]");
    }
    out.push_back(d);
  }
  return out;
}

std::vector<MetadataRow> parse_metadata(std::string_view text) {
  const CsvTable t = parse_csv(text, kMetadataHeader);
  std::vector<MetadataRow> out;
  for (const CsvRow& r : t.rows) out.push_back({r.frame(0), r.number(1)});
  return out;
}

std::vector<CorrespondenceRow> parse_correspondences(std::string_view text) {
  const CsvTable t = parse_csv(text, kCorrespondenceHeader);
  std::vector<CorrespondenceRow> out;
  for (const CsvRow& r : t.rows) {
    out.push_back({r.frame(0), {{r.number(1), r.number(2)}, {r.number(3), r.number(4)}}});
  }
  return out;
}

std::vector<GtRow> parse_gt(std::string_view text) {
  const CsvTable t = parse_csv(text, kGtHeader);
  std::vector<GtRow> out;
  for (const CsvRow& r : t.rows) out.push_back({r.frame(0), r.id(1), r.number(2), r.number(3)});
  return out;
}

std::vector<TrackRow> parse_tracks(std::string_view text) {
  const CsvTable t = parse_csv(text, kTrackHeader);
  std::vector<TrackRow> out;
  for (const CsvRow& r : t.rows) {
    TrackRow row{r.frame(0), r.id(1), r.number(2), r.number(3), r.number(4), parse_source(r, 5)};
    if (row.conf < 0.0 || row.conf > 1.0) throw ParseError(r.line(), "conf outside [0, 1]");
    out.push_back(row);
  }
  return out;
}

std::string write_detections(std::span<const DetectionRow> rows) {
  const bool has_score = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.score.has_value(); });
  std::string out = join(has_score ? kDetectionScoreHeader : kDetectionHeader) + '\n';
  for (const DetectionRow& r : rows) {
    out += std::to_string(r.frame) + ',' + checked(r.x) + ',' + checked(r.y) + ',' + checked(r.conf);
    if (has_score) out += ',' + (r.score ? checked(*r.score) : std::string());
    out += '\n';
  }
  return out;
}

std::string write_metadata(std::span<const MetadataRow> rows) {
  std::string out = join(kMetadataHeader) + '\n';
  for (const MetadataRow& r : rows) out += std::to_string(r.frame) + ',' + checked(r.altitude) + '\n';
  return out;
}

std::string write_correspondences(std::span<const CorrespondenceRow> rows) {
  std::string out = join(kCorrespondenceHeader) + '\n';
  for (const CorrespondenceRow& r : rows) {
    out += std::to_string(r.frame) + ',' + checked(r.pair.prev.x) + ',' + checked(r.pair.prev.y) + ',' +
           checked(r.pair.cur.x) + ',' + checked(r.pair.cur.y) + '\n';
  }
  return out;
}

std::string write_gt(std::span<const GtRow> rows) {
  std::string out = join(kGtHeader) + '\n';
  for (const GtRow& r : rows) {
    out += std::to_string(r.frame) + ',' + std::to_string(r.id) + ',' + checked(r.x) + ',' + checked(r.y) + '\n';
  }
  return out;
}

std::string write_tracks(std::span<const TrackRow> rows) {
  std::string out = join(kTrackHeader) + '\n';
  for (const TrackRow& r : rows) {
    out += std::to_string(r.frame) + ',' + std::to_string(r.id) + ',' + checked(r.x) + ',' + checked(r.y) +
           ',' + checked(r.conf) + ',' + to_string(r.source) + '\n';
  }
  return out;
}

TrajectorySet gt_trajectories(std::span<const GtRow> rows) {
  std::vector<GtRow> sorted(rows.begin(), rows.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const GtRow& a, const GtRow& b) {
    return a.id != b.id ? a.id < b.id : a.frame < b.frame;
  });
  TrajectorySet set;
  for (const GtRow& r : sorted) set.add(r.id, {r.frame, {r.x, r.y}, std::nullopt});
  return set;
}

TrajectorySet track_trajectories(std::span<const TrackRow> rows) {
  std::vector<TrackRow> sorted;
  for (const TrackRow& r : rows) {
    if (r.source != PositionSource::Kalman) sorted.push_back(r);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const TrackRow& a, const TrackRow& b) {
    return a.id != b.id ? a.id < b.id : a.frame < b.frame;
  });
  TrajectorySet set;
  for (const TrackRow& r : sorted) set.add(r.id, {r.frame, {r.x, r.y}, r.conf});
  return set;
}

std::vector<TrackRow> track_rows(std::span<const FrameOutput> frames) {
  std::vector<TrackRow> rows;
  for (const FrameOutput& f : frames) {
    for (const OutputRecord& r : f.records) {
      rows.push_back({f.frame_index, r.track_id, r.position.x, r.position.y, r.confidence, r.source});
    }
  }
  return rows;
}

std::string encode_feature_map(const FeatureMap& map) {
  map.validate();
  const auto limit = std::numeric_limits<std::uint32_t>::max();
  if (map.height > limit || map.width > limit || map.channels > limit) {
    throw Error(Errc::Format, "feature map dimensions exceed u32");
  }
  std::string out = "FMAP";
  out.reserve(24 + map.data.size() * 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(map.height));
  put_u32(out, static_cast<std::uint32_t>(map.width));
  put_u32(out, static_cast<std::uint32_t>(map.channels));
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(map.stride)));
  for (float v : map.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureMap decode_feature_map(std::string_view bytes) {
  if (bytes.size() < 24) throw Error(Errc::Format, "feature map header truncated");
  if (bytes.substr(0, 4) != "FMAP") throw Error(Errc::Format, "bad feature map magic");
  if (get_u32(bytes, 4) != 1) throw Error(Errc::Format, "unsupported feature map version");
  const std::uint64_t h = get_u32(bytes, 8);
  const std::uint64_t w = get_u32(bytes, 12);
  const std::uint64_t c = get_u32(bytes, 16);
  const float stride = std::bit_cast<float>(get_u32(bytes, 20));
  if (h == 0 || w == 0 || c == 0) throw Error(Errc::Format, "feature map has a zero dimension");
  if (!(stride > 0.0f) || !std::isfinite(stride)) throw Error(Errc::Format, "feature map stride must be > 0");
  // h * w fits in 64 bits; the channel factor is checked before multiplying.
  const std::uint64_t payload = bytes.size() - 24;
  const std::uint64_t hw = h * w;
  const bool too_big = hw > std::numeric_limits<std::uint64_t>::max() / (c * 4);
  if (too_big || hw * c * 4 != payload) {
    throw Error(Errc::Format, too_big || hw * c * 4 > payload ? "feature map payload truncated"
                                                              : "feature map payload longer than its header");
  }
  const std::uint64_t count = h * w * c;
  FeatureMap map(h, w, c, stride);
  for (std::uint64_t i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(get_u32(bytes, 24 + 4 * i));
    if (!std::isfinite(v)) throw Error(Errc::Format, "non-finite feature value");
    map.data[i] = v;
  }
  return map;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidInput, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidInput, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::InvalidInput, "write failed for " + path.string());
}

FeatureMap read_feature_map(const fs::path& path) {
  try {
    return decode_feature_map(read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_feature_map(const fs::path& path, const FeatureMap& map) {
  write_file(path, encode_feature_map(map));
}

fs::path SequenceBundlePaths::feature_file(std::int64_t frame) const {
  char name[48];
  std::snprintf(name, sizeof name, "frame_%06lld.fmap", static_cast<long long>(frame));
  return features_dir() / name;
}

FrameInput SequenceBundle::frame_input(std::size_t index, bool with_features) const {
  FrameInput in;
  in.frame_index = frames.at(index);
  if (auto it = detections.find(in.frame_index); it != detections.end()) in.detections = it->second;
  if (auto it = altitude.find(in.frame_index); it != altitude.end()) in.altitude = it->second;
  if (auto it = correspondences.find(in.frame_index); it != correspondences.end()) {
    in.correspondences = it->second;
  }
  if (with_features && has_features) {
    const fs::path file = paths.feature_file(in.frame_index);
    if (fs::exists(file)) in.features = std::make_shared<const FeatureMap>(read_feature_map(file));
  }
  return in;
}

SequenceBundle load_bundle(const fs::path& dir) {
  SequenceBundle b;
  b.paths.dir = dir;
  if (!fs::is_directory(dir)) throw Error(Errc::InvalidInput, "bundle directory not found: " + dir.string());
  if (!fs::exists(b.paths.detections())) {
    throw Error(Errc::InvalidInput, "bundle has no detections.csv: " + dir.string());
  }
  const auto wrap = [](const fs::path& p, auto&& parse) {
    const std::string text = read_file(p);
    try {
      return parse(text);
    } catch (const Error& e) {
      throw Error(e.code(), p.string() + ": " + e.what());
    }
  };

  std::set<std::int64_t> seen;
  for (const DetectionRow& r : wrap(b.paths.detections(), parse_detections)) {
    b.detections[r.frame].push_back({{r.x, r.y}, r.conf, r.score});
    seen.insert(r.frame);
  }
  if (fs::exists(b.paths.correspondences())) {
    for (const CorrespondenceRow& r : wrap(b.paths.correspondences(), parse_correspondences)) {
      b.correspondences[r.frame].push_back(r.pair);
      seen.insert(r.frame);
    }
  }
  if (fs::exists(b.paths.metadata())) {
    for (const MetadataRow& r : wrap(b.paths.metadata(), parse_metadata)) {
      if (!b.altitude.emplace(r.frame, r.altitude).second) {
        throw Error(Errc::InvalidInput, "duplicate metadata frame " + std::to_string(r.frame));
      }
      seen.insert(r.frame);
    }
  }
  b.has_features = fs::is_directory(b.paths.features_dir());
  if (!seen.empty()) {
    for (std::int64_t f = *seen.begin(); f <= *seen.rbegin(); ++f) b.frames.push_back(f);
  }
  return b;
}

}  // namespace ptrack
