#include "ptrack/gog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ptrack/error.hpp"

namespace ptrack {

void GogConfig::validate() const {
  if (max_gap < 1) throw Error(Errc::Config, "gog_max_gap must be >= 1");
  if (!std::isfinite(entry_cost) || !std::isfinite(exit_cost) || !std::isfinite(gap_penalty)) {
    throw Error(Errc::Config, "gog costs must be finite");
  }
  gating.validate();
}

std::size_t FlowGraph::transition_count() const {
  std::size_t n = 0;
  for (const auto& in : incoming) n += in.size();
  return n;
}

std::optional<double> FlowGraph::path_cost(std::span<const std::size_t> path) const {
  if (path.empty()) return std::nullopt;
  double cost = entry_cost + exit_cost;
  for (std::size_t k = 0; k < path.size(); ++k) {
    cost += detection_cost.at(path[k]);
    if (k == 0) continue;
    const auto& in = incoming.at(path[k]);
    const auto it = std::find_if(in.begin(), in.end(), [&](const Arc& a) { return a.from == path[k - 1]; });
    if (it == in.end()) return std::nullopt;
    cost += it->cost;
  }
  return cost;
}

double GogSolution::total_cost() const {
  double sum = 0.0;
  for (const GogPath& p : paths) sum += p.cost;
  return sum;
}

FlowGraph build_graph(std::span<const GogFrame> frames, const GogConfig& config) {
  config.validate();
  FlowGraph g;
  g.entry_cost = config.entry_cost;
  g.exit_cost = config.exit_cost;

  std::vector<const GogFrame*> ordered;
  for (const GogFrame& f : frames) ordered.push_back(&f);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const GogFrame* a, const GogFrame* b) { return a->frame < b->frame; });

  for (const GogFrame* f : ordered) {
    const double gate = f->altitude ? dynamic_threshold(*f->altitude, config.gating)
                                    : config.gating.base_radius;
    for (const Detection& d : f->detections) {
      if (!(d.confidence > 0.0 && d.confidence < 1.0)) {
        throw Error(Errc::CostDomain, "detection confidence must lie in (0, 1) for flow costs");
      }
      if (!is_finite(d.position)) throw Error(Errc::InvalidInput, "non-finite detection");
      g.nodes.push_back({f->frame, d.position, d.confidence, gate});
      g.detection_cost.push_back(std::log((1.0 - d.confidence) / d.confidence));
    }
  }

  g.incoming.resize(g.nodes.size());
  // Nodes are frame-sorted, so candidates for j are a contiguous range before it.
  std::size_t window_start = 0;
  for (std::size_t j = 0; j < g.nodes.size(); ++j) {
    const FlowGraph::Node& nj = g.nodes[j];
    while (g.nodes[window_start].frame < nj.frame - config.max_gap) ++window_start;
    for (std::size_t i = window_start; i < j; ++i) {
      const FlowGraph::Node& ni = g.nodes[i];
      const std::int64_t gap = nj.frame - ni.frame;
      if (gap <= 0) break;
      const double dist = distance(ni.position, nj.position);
      if (dist > ni.gate * static_cast<double>(gap)) continue;
      g.incoming[j].push_back(
          {i, dist / ni.gate + config.gap_penalty * static_cast<double>(gap - 1)});
    }
  }
  return g;
}

GogSolution solve(const FlowGraph& graph) {
  const std::size_t n = graph.nodes.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<char> alive(n, 1);
  std::vector<double> best(n);
  std::vector<std::size_t> parent(n);
  GogSolution solution;

  while (true) {
    double best_total = 0.0;
    std::size_t best_end = kNone;
    for (std::size_t j = 0; j < n; ++j) {
      if (!alive[j]) continue;
      double cost = graph.entry_cost;
      std::size_t from = kNone;
      for (const FlowGraph::Arc& a : graph.incoming[j]) {
        if (!alive[a.from]) continue;
        const double c = best[a.from] + a.cost;
        if (c < cost) {
          cost = c;
          from = a.from;
        }
      }
      best[j] = cost + graph.detection_cost[j];
      parent[j] = from;
      const double total = best[j] + graph.exit_cost;
      if (total < best_total) {
        best_total = total;
        best_end = j;
      }
    }
    if (best_end == kNone) break;

    GogPath path;
    path.cost = best_total;
    for (std::size_t v = best_end; v != kNone; v = parent[v]) path.nodes.push_back(v);
    std::reverse(path.nodes.begin(), path.nodes.end());
    for (std::size_t v : path.nodes) alive[v] = 0;
    solution.paths.push_back(std::move(path));
  }
  return solution;
}

TrajectorySet to_trajectories(const FlowGraph& graph, const GogSolution& solution) {
  TrajectorySet set;
  std::uint64_t id = 1;
  for (const GogPath& p : solution.paths) {
    for (std::size_t v : p.nodes) {
      const FlowGraph::Node& node = graph.nodes[v];
      set.add(id, {node.frame, node.position, node.confidence});
    }
    ++id;
  }
  return set;
}

}  // namespace ptrack
