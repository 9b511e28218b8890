#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ptrack/geometry.hpp"

namespace ptrack {

/// Inter-frame camera motion p' = M p + t with M = [[m11, m12], [m21, m22]].
struct AffineTransform {
  double m11 = 1.0, m12 = 0.0;
  double m21 = 0.0, m22 = 1.0;
  double t1 = 0.0, t2 = 0.0;

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(double tx, double ty) { return {1.0, 0.0, 0.0, 1.0, tx, ty}; }
  /// Rotation by `radians` about `center`, followed by a translation.
  static AffineTransform rotation(double radians, const Point& center = {}, double tx = 0.0,
                                  double ty = 0.0);

  double determinant() const { return m11 * m22 - m12 * m21; }
  bool is_valid() const;
  Eigen::Matrix2d linear() const;
  AffineTransform inverse() const;
  /// (a.then(b))(p) == b(a(p))
  AffineTransform then(const AffineTransform& next) const;

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

/// Keypoint match between consecutive frames.
struct Correspondence {
  Point prev;
  Point cur;
};

struct RansacConfig {
  int iterations = 100;
  double inlier_threshold = 3.0;  // px
  int min_inliers = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AffineEstimate {
  AffineTransform transform;
  std::vector<std::size_t> inliers;  // indices into the input, ascending
};

Point warp_point(const AffineTransform& t, const Point& p);

/// Robust affine fit: 3-point sample consensus, then least squares on the
/// largest consensus set. Throws Errc::NoMotionEstimate on failure.
AffineEstimate estimate_affine(std::span<const Correspondence> pairs, const RansacConfig& config);

}  // namespace ptrack
