#include "ptrack/cmc.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/QR>

#include "ptrack/error.hpp"
#include "ptrack/rng.hpp"

namespace ptrack {

namespace {

constexpr double kMinDeterminant = 1e-6;

double residual(const AffineTransform& t, const Correspondence& c) {
  return distance(warp_point(t, c.prev), c.cur);
}

/// Exact affine through three correspondences; false when the sample is collinear.
bool fit_minimal(const Correspondence& a, const Correspondence& b, const Correspondence& c,
                 AffineTransform& out) {
  Eigen::Matrix3d src;
  src << a.prev.x, a.prev.y, 1.0,
         b.prev.x, b.prev.y, 1.0,
         c.prev.x, c.prev.y, 1.0;
  const double det = src.determinant();
  const double scale = 1.0 + src.cwiseAbs().maxCoeff();
  if (std::abs(det) < 1e-9 * scale * scale) return false;
  const Eigen::Matrix3d inv = src.inverse();
  const Eigen::Vector3d px = inv * Eigen::Vector3d(a.cur.x, b.cur.x, c.cur.x);
  const Eigen::Vector3d py = inv * Eigen::Vector3d(a.cur.y, b.cur.y, c.cur.y);
  out = {px(0), px(1), py(0), py(1), px(2), py(2)};
  return out.is_valid();
}

/// Least-squares affine over the selected correspondences.
bool fit_least_squares(std::span<const Correspondence> pairs, std::span<const std::size_t> idx,
                       AffineTransform& out) {
  if (idx.size() < 3) return false;
  // Center the source points for conditioning.
  double cx = 0.0, cy = 0.0;
  for (std::size_t i : idx) {
    cx += pairs[i].prev.x;
    cy += pairs[i].prev.y;
  }
  cx /= static_cast<double>(idx.size());
  cy /= static_cast<double>(idx.size());

  Eigen::MatrixXd a(idx.size(), 3);
  Eigen::MatrixXd rhs(idx.size(), 2);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const Correspondence& c = pairs[idx[r]];
    a(r, 0) = c.prev.x - cx;
    a(r, 1) = c.prev.y - cy;
    a(r, 2) = 1.0;
    rhs(r, 0) = c.cur.x;
    rhs(r, 1) = c.cur.y;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) return false;
  const Eigen::MatrixXd sol = qr.solve(rhs);
  AffineTransform t{sol(0, 0), sol(1, 0), sol(0, 1), sol(1, 1), 0.0, 0.0};
  t.t1 = sol(2, 0) - t.m11 * cx - t.m12 * cy;
  t.t2 = sol(2, 1) - t.m21 * cx - t.m22 * cy;
  if (!t.is_valid()) return false;
  out = t;
  return true;
}

std::vector<std::size_t> collect_inliers(std::span<const Correspondence> pairs,
                                         const AffineTransform& t, double threshold) {
  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (residual(t, pairs[i]) <= threshold) inliers.push_back(i);
  }
  return inliers;
}

}  // namespace

AffineTransform AffineTransform::rotation(double radians, const Point& center, double tx,
                                          double ty) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  AffineTransform t{c, -s, s, c, 0.0, 0.0};
  t.t1 = center.x - (c * center.x - s * center.y) + tx;
  t.t2 = center.y - (s * center.x + c * center.y) + ty;
  return t;
}

bool AffineTransform::is_valid() const {
  return std::isfinite(m11) && std::isfinite(m12) && std::isfinite(m21) && std::isfinite(m22) &&
         std::isfinite(t1) && std::isfinite(t2) && std::abs(determinant()) > kMinDeterminant;
}

Eigen::Matrix2d AffineTransform::linear() const {
  Eigen::Matrix2d m;
  m << m11, m12, m21, m22;
  return m;
}

AffineTransform AffineTransform::inverse() const {
  if (!is_valid()) throw Error(Errc::DegenerateTransform, "cannot invert degenerate affine");
  const double det = determinant();
  AffineTransform inv{m22 / det, -m12 / det, -m21 / det, m11 / det, 0.0, 0.0};
  inv.t1 = -(inv.m11 * t1 + inv.m12 * t2);
  inv.t2 = -(inv.m21 * t1 + inv.m22 * t2);
  return inv;
}

AffineTransform AffineTransform::then(const AffineTransform& next) const {
  return {next.m11 * m11 + next.m12 * m21, next.m11 * m12 + next.m12 * m22,
          next.m21 * m11 + next.m22 * m21, next.m21 * m12 + next.m22 * m22,
          next.m11 * t1 + next.m12 * t2 + next.t1, next.m21 * t1 + next.m22 * t2 + next.t2};
}

void RansacConfig::validate() const {
  if (iterations < 1) throw Error(Errc::Config, "ransac_iters must be >= 1");
  if (!(inlier_threshold > 0.0)) throw Error(Errc::Config, "ransac_inlier_px must be > 0");
  if (min_inliers < 3) throw Error(Errc::Config, "ransac_min_inliers must be >= 3");
}

Point warp_point(const AffineTransform& t, const Point& p) {
  return {t.m11 * p.x + t.m12 * p.y + t.t1, t.m21 * p.x + t.m22 * p.y + t.t2};
}

AffineEstimate estimate_affine(std::span<const Correspondence> pairs, const RansacConfig& config) {
  config.validate();
  if (pairs.size() < 3) {
    throw Error(Errc::NoMotionEstimate, "fewer than 3 correspondences");
  }
  for (const Correspondence& c : pairs) {
    if (!is_finite(c.prev) || !is_finite(c.cur)) {
      throw Error(Errc::InvalidInput, "non-finite correspondence");
    }
  }

  Rng rng(config.seed);
  const std::uint64_t n = pairs.size();
  std::vector<std::size_t> best;
  for (int it = 0; it < config.iterations; ++it) {
    std::array<std::uint64_t, 3> s{};
    s[0] = rng.index(n);
    do s[1] = rng.index(n); while (s[1] == s[0]);
    do s[2] = rng.index(n); while (s[2] == s[0] || s[2] == s[1]);

    AffineTransform hypothesis;
    if (!fit_minimal(pairs[s[0]], pairs[s[1]], pairs[s[2]], hypothesis)) continue;
    std::vector<std::size_t> inliers = collect_inliers(pairs, hypothesis, config.inlier_threshold);
    if (inliers.size() > best.size()) best = std::move(inliers);
    if (best.size() == pairs.size()) break;
  }

  if (best.size() < static_cast<std::size_t>(config.min_inliers)) {
    throw Error(Errc::NoMotionEstimate, "consensus set below min_inliers");
  }

  // Refit on the consensus set, re-collect, and repeat while the set grows.
  AffineEstimate result;
  std::vector<std::size_t> current = std::move(best);
  for (int round = 0; round < 5; ++round) {
    AffineTransform fit;
    if (!fit_least_squares(pairs, current, fit)) {
      throw Error(Errc::NoMotionEstimate, "degenerate consensus set");
    }
    std::vector<std::size_t> next = collect_inliers(pairs, fit, config.inlier_threshold);
    result.transform = fit;
    if (next == current) break;
    if (next.size() < current.size()) break;
    current = std::move(next);
  }
  result.inliers = collect_inliers(pairs, result.transform, config.inlier_threshold);
  if (result.inliers.size() < static_cast<std::size_t>(config.min_inliers)) {
    throw Error(Errc::NoMotionEstimate, "consensus set below min_inliers after refit");
  }
  return result;
}

}  // namespace ptrack
