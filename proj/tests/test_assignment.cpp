#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ptrack/assignment.hpp"
#include "ptrack/error.hpp"
#include "support/oracles.hpp"

using namespace ptrack;

namespace {

Eigen::MatrixXd matrix(const std::vector<std::vector<double>>& v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), v.empty() ? 0 : static_cast<Eigen::Index>(v[0].size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j];
  }
  return m;
}

void expect_consistent(const AssignmentResult& r, std::size_t rows, std::size_t cols, double gate) {
  std::set<std::size_t> t, d;
  for (const Match& m : r.matches) {
    EXPECT_TRUE(t.insert(m.track).second);
    EXPECT_TRUE(d.insert(m.detection).second);
    EXPECT_LT(m.distance, gate);
  }
  for (std::size_t i : r.unmatched_tracks) EXPECT_TRUE(t.insert(i).second);
  for (std::size_t j : r.unmatched_detections) EXPECT_TRUE(d.insert(j).second);
  EXPECT_EQ(t.size(), rows);
  EXPECT_EQ(d.size(), cols);
}

}  // namespace

TEST(Assignment, DynamicThresholdValues) {
  const GatingPolicy p;
  EXPECT_EQ(dynamic_threshold(100, p), 10.0);
  EXPECT_EQ(dynamic_threshold(50, p), 20.0);
  EXPECT_EQ(dynamic_threshold(200, p), 10.0);
  EXPECT_EQ(dynamic_threshold(p.reference_altitude, p), p.base_radius);
}

TEST(Assignment, DynamicThresholdMonotone) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.1, 2000);
  const GatingPolicy p{7.5, 80};
  for (int i = 0; i < 1000; ++i) {
    double a = u(gen), b = u(gen);
    if (a > b) std::swap(a, b);
    EXPECT_GE(dynamic_threshold(a, p), dynamic_threshold(b, p));
    EXPECT_GE(dynamic_threshold(b, p), p.base_radius);
  }
}

TEST(Assignment, DynamicThresholdRejectsBadAltitude) {
  for (double a : {0.0, -5.0}) {
    try {
      dynamic_threshold(a, GatingPolicy{});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidAltitude);
    }
  }
}

TEST(Assignment, CostMatrix) {
  const std::vector<Point> p = {{0, 0}};
  const std::vector<Point> d = {{3, 4}};
  EXPECT_EQ(build_cost_matrix(p, d)(0, 0), 5.0);
  EXPECT_EQ(build_cost_matrix(p, {}).cols(), 0);
  const std::vector<Point> sym = {{0, 0}, {1, 1}};
  const Eigen::MatrixXd m = build_cost_matrix(sym, sym);
  EXPECT_EQ(m, m.transpose());
  const std::vector<Point> bad = {{std::numeric_limits<double>::infinity(), 0}};
  EXPECT_THROW(build_cost_matrix(bad, d), Error);
}

TEST(Assignment, Diagonal) {
  const AssignmentResult r = solve_assignment(matrix({{0, 1}, {1, 0}}), 10);
  ASSERT_EQ(r.matches.size(), 2u);
  EXPECT_EQ(r.matches[0].track, 0u);
  EXPECT_EQ(r.matches[0].detection, 0u);
  EXPECT_EQ(r.matches[1].track, 1u);
  EXPECT_EQ(r.matches[1].detection, 1u);
}

TEST(Assignment, GatedOut) {
  const AssignmentResult r = solve_assignment(matrix({{25}}), 10);
  EXPECT_TRUE(r.matches.empty());
  EXPECT_EQ(r.unmatched_tracks, std::vector<std::size_t>{0});
  EXPECT_EQ(r.unmatched_detections, std::vector<std::size_t>{0});
}

TEST(Assignment, GateIsStrict) {
  EXPECT_TRUE(solve_assignment(matrix({{10}}), 10).matches.empty());
  EXPECT_EQ(solve_assignment(matrix({{9.999}}), 10).matches.size(), 1u);
}

TEST(Assignment, PrefersCardinalityOverCost) {
  // Matching (0,0) alone costs 1; the two-pair matching costs 18 but is larger.
  const AssignmentResult r = solve_assignment(matrix({{1, 9}, {9, 50}}), 10);
  EXPECT_EQ(r.matches.size(), 2u);
  EXPECT_DOUBLE_EQ(r.total_cost(), 18.0);
}

TEST(Assignment, EmptyInputs) {
  EXPECT_TRUE(solve_assignment(Eigen::MatrixXd(0, 0), 10).matches.empty());
  const AssignmentResult r = solve_assignment(Eigen::MatrixXd(3, 0), 10);
  EXPECT_EQ(r.unmatched_tracks.size(), 3u);
  const AssignmentResult c = solve_assignment(Eigen::MatrixXd(0, 2), 10);
  EXPECT_EQ(c.unmatched_detections.size(), 2u);
}

TEST(Assignment, RejectsNegativeCosts) {
  EXPECT_THROW(solve_assignment(matrix({{-1}}), 10), Error);
}

TEST(Assignment, InfiniteCellsAreForbidden) {
  const double inf = std::numeric_limits<double>::infinity();
  const AssignmentResult r = solve_assignment(matrix({{inf, 1}, {inf, inf}}), inf);
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.matches[0].detection, 1u);
}

TEST(Assignment, MatchesBruteForce) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = gen() % 8, cols = gen() % 8;
    std::vector<std::vector<double>> v(rows, std::vector<double>(cols));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        v[i][j] = u(gen);
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j];
      }
    }
    for (double gate : {10.0, std::numeric_limits<double>::infinity()}) {
      const AssignmentResult r = solve_assignment(m, gate);
      const auto b = oracle::brute_force_assignment(v, gate);
      expect_consistent(r, rows, cols, gate);
      EXPECT_EQ(r.matches.size(), b.cardinality);
      EXPECT_NEAR(r.total_cost(), b.cost, 1e-9);
    }
  }
}

TEST(Assignment, PermutationEquivariance) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0, 20);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + gen() % 6, cols = 1 + gen() % 6;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(gen);
    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::MatrixXd pm(m.rows(), m.cols());
    for (std::size_t j = 0; j < cols; ++j) pm.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(perm[j]));
    // continuous random costs: the optimum is unique almost surely
    const AssignmentResult a = solve_assignment(m, 10), b = solve_assignment(pm, 10);
    std::set<std::pair<std::size_t, std::size_t>> sa, sb;
    for (const Match& x : a.matches) sa.insert({x.track, x.detection});
    for (const Match& x : b.matches) sb.insert({x.track, perm[x.detection]});
    EXPECT_EQ(sa, sb);
  }
}

TEST(Assignment, Deterministic) {
  const Eigen::MatrixXd m = matrix({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  const AssignmentResult a = solve_assignment(m, 10), b = solve_assignment(m, 10);
  ASSERT_EQ(a.matches.size(), b.matches.size());
  for (std::size_t i = 0; i < a.matches.size(); ++i) {
    EXPECT_EQ(a.matches[i].track, b.matches[i].track);
    EXPECT_EQ(a.matches[i].detection, b.matches[i].detection);
  }
}
