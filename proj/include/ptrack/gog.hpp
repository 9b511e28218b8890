#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ptrack/assignment.hpp"
#include "ptrack/metrics.hpp"
#include "ptrack/pipeline.hpp"

namespace ptrack {

struct GogConfig {
  double entry_cost = 10.0;
  double exit_cost = 10.0;
  double gap_penalty = 0.2;  // per skipped frame
  int max_gap = 60;          // frames
  GatingPolicy gating;       // per-frame gate from altitude when known

  void validate() const;
};

struct GogFrame {
  std::int64_t frame = 0;
  std::vector<Detection> detections;
  std::optional<double> altitude;
};

/// Min-cost-flow DAG over all detections. Every detection i contributes an
/// entry->exit arc of cost `detection_cost[i]`; source->entry and exit->sink
/// arcs are implicit with the uniform entry/exit costs.
struct FlowGraph {
  struct Node {
    std::int64_t frame = 0;
    Point position;
    double confidence = 0.0;
    double gate = 0.0;
  };
  struct Arc {
    std::size_t from = 0;  // exit node of an earlier detection
    double cost = 0.0;
  };

  std::vector<Node> nodes;                 // ascending frame order
  std::vector<double> detection_cost;      // log((1 - c) / c)
  std::vector<std::vector<Arc>> incoming;  // transition arcs into each node
  double entry_cost = 0.0;
  double exit_cost = 0.0;

  std::size_t transition_count() const;
  /// Cost of one source->sink path through `path` (ascending node indices);
  /// nullopt when a required transition arc is absent.
  std::optional<double> path_cost(std::span<const std::size_t> path) const;
};

struct GogPath {
  std::vector<std::size_t> nodes;
  double cost = 0.0;
};

struct GogSolution {
  std::vector<GogPath> paths;  // in extraction order
  double total_cost() const;
};

FlowGraph build_graph(std::span<const GogFrame> frames, const GogConfig& config);

/// Repeated shortest-path extraction by dynamic programming in frame order;
/// each accepted path (cost < 0) removes its detections.
GogSolution solve(const FlowGraph& graph);

/// Trajectory ids follow extraction order starting from 1.
TrajectorySet to_trajectories(const FlowGraph& graph, const GogSolution& solution);

}  // namespace ptrack
