#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptrack/geometry.hpp"

namespace ptrack {

struct TrajectoryPoint {
  std::int64_t frame = 0;
  Point position;
  std::optional<double> confidence;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Per-identity ordered point lists. The number of identities is the
/// trajectory count (y for ground truth, y-hat for predictions).
struct TrajectorySet {
  std::map<std::uint64_t, std::vector<TrajectoryPoint>> tracks;

  /// Appends a point; frames must be strictly increasing within an id.
  void add(std::uint64_t id, const TrajectoryPoint& point);
  std::size_t count() const { return tracks.size(); }
  bool empty() const { return tracks.empty(); }

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;
};

double tr_mae(std::span<const double> gt_counts, std::span<const double> pred_counts);
double tr_nmae(std::span<const double> gt_counts, std::span<const double> pred_counts);

/// Identity switches of ground-truth objects under per-frame gated optimal
/// matching of GT points to predicted points.
std::size_t id_switches(const TrajectorySet& gt, const TrajectorySet& pred, double gate = 10.0);

/// Tracklet average precision at distance threshold `tau` px.
double t_ap(const TrajectorySet& gt, const TrajectorySet& pred, double tau);

/// T-AP at each threshold in `taus`, sharing the pairwise distance work.
std::vector<double> t_ap_curve(const TrajectorySet& gt, const TrajectorySet& pred,
                               std::span<const double> taus);

/// Thresholds 1, 2, ..., 25 px.
std::vector<double> t_map_thresholds();
double t_map(const TrajectorySet& gt, const TrajectorySet& pred);

/// Sample Pearson correlation coefficient.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct SequenceMetrics {
  std::string name;
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
  double tr_ae = 0.0;
  double tr_nae = 0.0;
  std::size_t id_sw = 0;
  std::vector<double> t_ap;  // at t_map_thresholds()

  double t_ap_at10() const { return t_ap.at(9); }
  double t_map() const;
};

struct MetricsReport {
  std::vector<SequenceMetrics> sequences;
  double tr_mae = 0.0;
  double tr_nmae = 0.0;
  double tr_nmae_std = 0.0;
  std::size_t id_sw_total = 0;
  double id_sw_mean = 0.0;
  double t_map = 0.0;
  double t_ap10 = 0.0;
};

SequenceMetrics evaluate_sequence(std::string name, const TrajectorySet& gt, const TrajectorySet& pred,
                                  double idsw_gate = 10.0);
MetricsReport aggregate(std::vector<SequenceMetrics> sequences);

/// Machine-readable `key = value` lines.
std::string to_key_value(const MetricsReport& report);
/// Fixed-width table for terminals.
std::string to_table(const MetricsReport& report);

/// Box-style rows `frame,id,bb_left,bb_top,bb_width,bb_height,conf` with
/// fixed 20 px boxes centred on each point, frame-major.
std::string export_interchange(const TrajectorySet& pred);
TrajectorySet parse_interchange(std::string_view text);

}  // namespace ptrack
