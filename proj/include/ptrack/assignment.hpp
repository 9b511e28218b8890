#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ptrack/geometry.hpp"

namespace ptrack {

/// Altitude-aware gate parameters: Tr = max(base, reference / altitude * base).
struct GatingPolicy {
  double base_radius = 10.0;          // px
  double reference_altitude = 100.0;  // m

  void validate() const;
};

struct Match {
  std::size_t track = 0;
  std::size_t detection = 0;
  double distance = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

struct AssignmentResult {
  std::vector<Match> matches;  // ascending by track index
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;

  double total_cost() const;
};

/// Assignment gate in px for the given flight altitude in metres.
double dynamic_threshold(double altitude, const GatingPolicy& policy = {});

/// Pairwise Euclidean distances, rows = predictions, columns = detections.
Eigen::MatrixXd build_cost_matrix(std::span<const Point> predicted, std::span<const Point> detections);

/// Optimal one-to-one assignment restricted to cells with cost < gate. Among
/// gate-feasible assignments, maximum cardinality is preferred first, then
/// minimum total cost. Cells may hold +inf to forbid a pair outright.
AssignmentResult solve_assignment(const Eigen::MatrixXd& costs, double gate);

}  // namespace ptrack
