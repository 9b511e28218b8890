#pragma once

// Independent reference implementations used only by tests. None of these
// call the library routine they are compared against.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ptrack/ddcf.hpp"
#include "ptrack/gog.hpp"
#include "ptrack/metrics.hpp"
#include "ptrack/pipeline.hpp"
#include "ptrack/validators.hpp"

namespace ptrack::oracle {

// ---------------------------------------------------------------- validators

/// 1.0 within `radius` px of a ground-truth point of the same frame, else 0.
class OracleValidator final : public TrajectoryValidator {
 public:
  OracleValidator(const TrajectorySet& gt, double radius);
  std::optional<double> probability(const ValidationContext& context) const override;

 private:
  std::map<std::int64_t, std::vector<Point>> by_frame_;
  double radius_;
};

class ConstantValidator final : public TrajectoryValidator {
 public:
  explicit ConstantValidator(double value) : value_(value) {}
  std::optional<double> probability(const ValidationContext&) const override { return value_; }

 private:
  double value_;
};

// ---------------------------------------------------------------- assignment

struct BruteAssignment {
  std::size_t cardinality = 0;
  double cost = 0.0;
};

/// Exhaustive search over partial injections rows -> cols using only cells
/// with cost < gate; best = maximum cardinality, then minimum cost.
BruteAssignment brute_force_assignment(const std::vector<std::vector<double>>& costs, double gate);

// ---------------------------------------------------------------- kalman

/// Plain-array constant-velocity Kalman recursion (textbook form).
struct TextbookKalman {
  std::array<double, 4> x{};
  std::array<std::array<double, 4>, 4> P{};

  void predict(double q_pos, double q_vel);
  /// Standard gain form: K = P H' S^-1, P = (I - K H) P.
  void update(double zx, double zy, double r);
};

// ---------------------------------------------------------------- correlation

/// Integer shift (dx, dy) in [-max_shift, max_shift]^2 maximizing the
/// spatial cross-correlation sum_p t(p) z(p + s), with the template cropped
/// to a square of `template_radius` cells around the patch centre.
std::pair<int, int> best_spatial_shift(const FeaturePatch& templ, const FeaturePatch& search, int max_shift,
                                      int template_radius = 6);

// ---------------------------------------------------------------- gog

struct GogOracleResult {
  double best_cost = 0.0;
  std::size_t best_paths = 0;      // paths in the (first) optimal family
  bool optimum_unique_size = true;  // every optimal family has the same path count
};

/// Enumerates every vertex-disjoint, time-monotonic path family over the raw
/// detections with costs recomputed from their definitions.
GogOracleResult gog_exhaustive(const std::vector<GogFrame>& frames, const GogConfig& config);

// ---------------------------------------------------------------- baseline

struct BaselineRecord {
  std::int64_t frame = 0;
  std::uint64_t id = 0;
  Point position;
};

/// Point-SORT: constant-velocity Kalman per track, fixed-radius gated optimal
/// assignment, confirm at min_hits, delete after tolerated misses.
std::vector<BaselineRecord> point_sort(const std::vector<FrameInput>& frames, const TrackerConfig& config);

// ---------------------------------------------------------------- helpers

/// Occlusion windows of random length [min_len, max_len] for every agent.
std::vector<std::array<std::int64_t, 3>> random_occlusions(std::size_t agents, std::int64_t frames,
                                                           std::size_t per_agent, std::int64_t min_len,
                                                           std::int64_t max_len, std::uint64_t seed);

}  // namespace ptrack::oracle
