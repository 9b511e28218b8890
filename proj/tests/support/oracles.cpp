#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "ptrack/assignment.hpp"

namespace ptrack::oracle {

OracleValidator::OracleValidator(const TrajectorySet& gt, double radius) : radius_(radius) {
  for (const auto& [id, points] : gt.tracks) {
    for (const TrajectoryPoint& p : points) by_frame_[p.frame].push_back(p.position);
  }
}

std::optional<double> OracleValidator::probability(const ValidationContext& context) const {
  const auto it = by_frame_.find(context.frame);
  if (it == by_frame_.end()) return 0.0;
  for (const Point& p : it->second) {
    if (std::hypot(p.x - context.position.x, p.y - context.position.y) <= radius_) return 1.0;
  }
  return 0.0;
}

BruteAssignment brute_force_assignment(const std::vector<std::vector<double>>& costs, double gate) {
  const std::size_t rows = costs.size();
  const std::size_t cols = rows == 0 ? 0 : costs[0].size();
  BruteAssignment best;
  std::vector<char> used(cols, 0);
  std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t r, std::size_t card, double cost) {
    if (r == rows) {
      if (card > best.cardinality || (card == best.cardinality && cost < best.cost)) best = {card, cost};
      return;
    }
    rec(r + 1, card, cost);
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c] || !(costs[r][c] < gate)) continue;
      used[c] = 1;
      rec(r + 1, card + 1, cost + costs[r][c]);
      used[c] = 0;
    }
  };
  best.cost = 0.0;
  rec(0, 0, 0.0);
  return best;
}

void TextbookKalman::predict(double q_pos, double q_vel) {
  // F = [[1,0,1,0],[0,1,0,1],[0,0,1,0],[0,0,0,1]]
  const double F[4][4] = {{1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  std::array<double, 4> nx{};
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) nx[i] += F[i][k] * x[k];
  }
  double FP[4][4] = {};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 4; ++k) FP[i][j] += F[i][k] * P[k][j];
    }
  }
  std::array<std::array<double, 4>, 4> nP{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 4; ++k) nP[i][j] += FP[i][k] * F[j][k];
    }
  }
  nP[0][0] += q_pos;
  nP[1][1] += q_pos;
  nP[2][2] += q_vel;
  nP[3][3] += q_vel;
  x = nx;
  P = nP;
}

void TextbookKalman::update(double zx, double zy, double r) {
  // H selects rows 0 and 1, so S = P[0:2,0:2] + r I and P H' = P[:,0:2].
  const double s00 = P[0][0] + r, s01 = P[0][1], s10 = P[1][0], s11 = P[1][1] + r;
  const double det = s00 * s11 - s01 * s10;
  const double i00 = s11 / det, i01 = -s01 / det, i10 = -s10 / det, i11 = s00 / det;
  double K[4][2];
  for (int i = 0; i < 4; ++i) {
    K[i][0] = P[i][0] * i00 + P[i][1] * i10;
    K[i][1] = P[i][0] * i01 + P[i][1] * i11;
  }
  const double yx = zx - x[0], yy = zy - x[1];
  for (int i = 0; i < 4; ++i) x[i] += K[i][0] * yx + K[i][1] * yy;
  std::array<std::array<double, 4>, 4> nP{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) nP[i][j] = P[i][j] - (K[i][0] * P[0][j] + K[i][1] * P[1][j]);
  }
  P = nP;
}

std::pair<int, int> best_spatial_shift(const FeaturePatch& templ, const FeaturePatch& search, int max_shift,
                                      int template_radius) {
  const int S = static_cast<int>(templ.size);
  const int c0 = S / 2;
  double best = -std::numeric_limits<double>::infinity();
  std::pair<int, int> arg{0, 0};
  for (int dy = -max_shift; dy <= max_shift; ++dy) {
    for (int dx = -max_shift; dx <= max_shift; ++dx) {
      double sum = 0.0;
      for (int r = c0 - template_radius; r <= c0 + template_radius; ++r) {
        const int rr = r + dy;
        if (r < 0 || r >= S || rr < 0 || rr >= S) continue;
        for (int c = c0 - template_radius; c <= c0 + template_radius; ++c) {
          const int cc = c + dx;
          if (c < 0 || c >= S || cc < 0 || cc >= S) continue;
          for (std::size_t ch = 0; ch < templ.channels; ++ch) {
            sum += templ.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) *
                   search.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc), ch);
          }
        }
      }
      if (sum > best) {
        best = sum;
        arg = {dx, dy};
      }
    }
  }
  return arg;
}

GogOracleResult gog_exhaustive(const std::vector<GogFrame>& frames, const GogConfig& config) {
  struct Node {
    std::int64_t frame;
    Point p;
    double det;
    double gate;
  };
  std::vector<Node> nodes;
  for (const GogFrame& f : frames) {
    double gate = config.gating.base_radius;
    if (f.altitude) gate = std::max(gate, config.gating.reference_altitude / *f.altitude * config.gating.base_radius);
    for (const Detection& d : f.detections) {
      nodes.push_back({f.frame, d.position, std::log((1.0 - d.confidence) / d.confidence), gate});
    }
  }
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.frame < b.frame; });

  auto arc = [&](std::size_t i, std::size_t j) -> std::optional<double> {
    const std::int64_t df = nodes[j].frame - nodes[i].frame;
    if (df < 1 || df > config.max_gap) return std::nullopt;
    const double d = std::hypot(nodes[j].p.x - nodes[i].p.x, nodes[j].p.y - nodes[i].p.y);
    if (d > nodes[i].gate * static_cast<double>(df)) return std::nullopt;
    return d / nodes[i].gate + config.gap_penalty * static_cast<double>(df - 1);
  };

  GogOracleResult result;
  result.best_cost = 0.0;
  result.best_paths = 0;
  bool have_zero_family = true;  // the empty family
  std::vector<std::size_t> best_sizes = {0};
  (void)have_zero_family;

  struct OpenPath {
    std::size_t last;
    double cost;
  };
  std::vector<OpenPath> open;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == nodes.size()) {
      double total = 0.0;
      for (const OpenPath& p : open) total += p.cost + config.exit_cost;
      if (total < result.best_cost - 1e-12) {
        result.best_cost = total;
        result.best_paths = open.size();
        best_sizes = {open.size()};
      } else if (std::abs(total - result.best_cost) <= 1e-12) {
        best_sizes.push_back(open.size());
      }
      return;
    }
    rec(k + 1);  // node unused
    open.push_back({k, config.entry_cost + nodes[k].det});
    rec(k + 1);
    open.pop_back();
    for (std::size_t p = 0; p < open.size(); ++p) {
      const auto a = arc(open[p].last, k);
      if (!a) continue;
      const OpenPath saved = open[p];
      open[p] = {k, saved.cost + *a + nodes[k].det};
      rec(k + 1);
      open[p] = saved;
    }
  };
  rec(0);
  result.optimum_unique_size =
      std::all_of(best_sizes.begin(), best_sizes.end(), [&](std::size_t s) { return s == best_sizes.front(); });
  return result;
}

std::vector<BaselineRecord> point_sort(const std::vector<FrameInput>& frames, const TrackerConfig& config) {
  struct T {
    std::uint64_t id;
    TextbookKalman kf;
    int hits;
    int misses;
    bool confirmed;
  };
  const MotionConfig& m = config.motion;
  const LifecycleConfig& l = config.lifecycle;
  std::vector<T> tracks;
  std::vector<BaselineRecord> out;
  std::uint64_t next_id = 1;
  for (const FrameInput& f : frames) {
    std::vector<Point> pred;
    for (T& t : tracks) {
      t.kf.predict(m.process_noise_pos, m.process_noise_vel);
      pred.push_back({t.kf.x[0], t.kf.x[1]});
    }
    Eigen::MatrixXd costs(static_cast<Eigen::Index>(pred.size()), static_cast<Eigen::Index>(f.detections.size()));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      for (std::size_t j = 0; j < f.detections.size(); ++j) {
        const Point& d = f.detections[j].position;
        costs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::hypot(pred[i].x - d.x, pred[i].y - d.y);
      }
    }
    const AssignmentResult a = solve_assignment(costs, config.gating.base_radius);
    std::vector<char> keep(tracks.size(), 1);
    std::vector<BaselineRecord> frame_records;
    for (const Match& mt : a.matches) {
      T& t = tracks[mt.track];
      const Point& d = f.detections[mt.detection].position;
      t.kf.update(d.x, d.y, m.measurement_noise);
      ++t.hits;
      t.misses = 0;
      if (t.hits >= l.min_hits) t.confirmed = true;
      if (t.confirmed) frame_records.push_back({f.frame_index, t.id, d});
    }
    for (std::size_t i : a.unmatched_tracks) {
      T& t = tracks[i];
      ++t.misses;
      if ((!t.confirmed && t.misses > l.tentative_miss_tolerance) || t.misses > l.max_age) keep[i] = 0;
    }
    std::vector<T> next;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      if (keep[i]) next.push_back(tracks[i]);
    }
    for (std::size_t j : a.unmatched_detections) {
      T t{next_id++, {}, 1, 0, false};
      const Point& d = f.detections[j].position;
      t.kf.x = {d.x, d.y, 0.0, 0.0};
      t.kf.P = {};
      t.kf.P[0][0] = t.kf.P[1][1] = m.initial_pos_var;
      t.kf.P[2][2] = t.kf.P[3][3] = m.initial_vel_var;
      if (t.hits >= l.min_hits) {
        t.confirmed = true;
        frame_records.push_back({f.frame_index, t.id, d});
      }
      next.push_back(t);
    }
    tracks = std::move(next);
    std::sort(frame_records.begin(), frame_records.end(),
              [](const BaselineRecord& x, const BaselineRecord& y) { return x.id < y.id; });
    out.insert(out.end(), frame_records.begin(), frame_records.end());
  }
  return out;
}

std::vector<std::array<std::int64_t, 3>> random_occlusions(std::size_t agents, std::int64_t frames,
                                                           std::size_t per_agent, std::int64_t min_len,
                                                           std::int64_t max_len, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::array<std::int64_t, 3>> out;
  const std::int64_t slot = frames / static_cast<std::int64_t>(per_agent);
  for (std::size_t a = 0; a < agents; ++a) {
    for (std::size_t k = 0; k < per_agent; ++k) {
      const std::int64_t len = min_len + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(max_len - min_len + 1));
      const std::int64_t lo = static_cast<std::int64_t>(k) * slot + 40;  // leave time to confirm first
      const std::int64_t hi = std::max(lo, (static_cast<std::int64_t>(k) + 1) * slot - len - 1);
      const std::int64_t start = lo + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
      out.push_back({static_cast<std::int64_t>(a), start, start + len - 1});
    }
  }
  return out;
}

}  // namespace ptrack::oracle
