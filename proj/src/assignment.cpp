#include "ptrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ptrack/error.hpp"

namespace ptrack {

namespace {

/// Shortest-augmenting-path Hungarian method with potentials for a dense
/// rows x cols matrix with rows <= cols. Returns the column of every row.
std::vector<std::size_t> hungarian(const Eigen::MatrixXd& a) {
  const std::size_t n = static_cast<std::size_t>(a.rows());
  const std::size_t m = static_cast<std::size_t>(a.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based internally; index 0 is the virtual column.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

void GatingPolicy::validate() const {
  if (!(base_radius > 0.0)) throw Error(Errc::Config, "base_radius_px must be > 0");
  if (!(reference_altitude > 0.0)) throw Error(Errc::Config, "reference_altitude_m must be > 0");
}

double AssignmentResult::total_cost() const {
  double sum = 0.0;
  for (const Match& m : matches) sum += m.distance;
  return sum;
}

double dynamic_threshold(double altitude, const GatingPolicy& policy) {
  if (!(altitude > 0.0) || !std::isfinite(altitude)) {
    throw Error(Errc::InvalidAltitude, "altitude must be positive and finite");
  }
  return std::max(policy.base_radius, policy.reference_altitude / altitude * policy.base_radius);
}

Eigen::MatrixXd build_cost_matrix(std::span<const Point> predicted, std::span<const Point> detections) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(predicted.size()),
                    static_cast<Eigen::Index>(detections.size()));
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!is_finite(predicted[i])) throw Error(Errc::InvalidInput, "non-finite predicted point");
    for (std::size_t j = 0; j < detections.size(); ++j) {
      if (!is_finite(detections[j])) throw Error(Errc::InvalidInput, "non-finite detection");
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          distance(predicted[i], detections[j]);
    }
  }
  return c;
}

AssignmentResult solve_assignment(const Eigen::MatrixXd& costs, double gate) {
  if (!(gate > 0.0)) throw Error(Errc::InvalidInput, "gate must be > 0");
  const auto rows = static_cast<std::size_t>(costs.rows());
  const auto cols = static_cast<std::size_t>(costs.cols());

  double max_feasible = 0.0;
  bool any_feasible = false;
  for (Eigen::Index i = 0; i < costs.rows(); ++i) {
    for (Eigen::Index j = 0; j < costs.cols(); ++j) {
      const double c = costs(i, j);
      if (std::isnan(c) || c < 0.0) throw Error(Errc::InvalidInput, "costs must be non-negative");
      if (c < gate) {
        any_feasible = true;
        max_feasible = std::max(max_feasible, c);
      }
    }
  }

  AssignmentResult result;
  std::vector<char> row_used(rows, 0), col_used(cols, 0);
  if (any_feasible) {
    // Feasible cells get a bonus large enough that one extra match always
    // outweighs any cost difference; forbidden cells cost 0 (= unmatched).
    const double bonus = (max_feasible + 1.0) * static_cast<double>(std::min(rows, cols) + 1);
    const bool transpose = rows > cols;
    Eigen::MatrixXd work(transpose ? costs.cols() : costs.rows(),
                         transpose ? costs.rows() : costs.cols());
    for (Eigen::Index i = 0; i < costs.rows(); ++i) {
      for (Eigen::Index j = 0; j < costs.cols(); ++j) {
        const double c = costs(i, j);
        const double w = c < gate ? c - bonus : 0.0;
        if (transpose) work(j, i) = w; else work(i, j) = w;
      }
    }
    const std::vector<std::size_t> assign = hungarian(work);
    for (std::size_t r = 0; r < assign.size(); ++r) {
      const std::size_t track = transpose ? assign[r] : r;
      const std::size_t det = transpose ? r : assign[r];
      const double c = costs(static_cast<Eigen::Index>(track), static_cast<Eigen::Index>(det));
      if (c < gate) {
        result.matches.push_back({track, det, c});
        row_used[track] = 1;
        col_used[det] = 1;
      }
    }
    std::sort(result.matches.begin(), result.matches.end(),
              [](const Match& a, const Match& b) { return a.track < b.track; });
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (!row_used[i]) result.unmatched_tracks.push_back(i);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (!col_used[j]) result.unmatched_detections.push_back(j);
  }
  return result;
}

}  // namespace ptrack
