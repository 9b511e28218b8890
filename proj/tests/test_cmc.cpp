#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ptrack/cmc.hpp"
#include "ptrack/error.hpp"

using namespace ptrack;

namespace {

std::vector<Correspondence> exact_pairs(const AffineTransform& a, int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-300, 300);
  std::vector<Correspondence> pairs;
  for (int i = 0; i < n; ++i) {
    const Point p{u(gen), u(gen)};
    pairs.push_back({p, warp_point(a, p)});
  }
  return pairs;
}

void expect_params_near(const AffineTransform& a, const AffineTransform& b, double tol) {
  EXPECT_NEAR(a.m11, b.m11, tol);
  EXPECT_NEAR(a.m12, b.m12, tol);
  EXPECT_NEAR(a.m21, b.m21, tol);
  EXPECT_NEAR(a.m22, b.m22, tol);
  EXPECT_NEAR(a.t1, b.t1, tol);
  EXPECT_NEAR(a.t2, b.t2, tol);
}

}  // namespace

TEST(Cmc, WarpPoint) {
  EXPECT_EQ(warp_point(AffineTransform::identity(), {3, 4}), (Point{3, 4}));
  EXPECT_EQ(warp_point(AffineTransform::translation(1, 1), {0, 0}), (Point{1, 1}));
  const Point r = warp_point(AffineTransform::rotation(M_PI), {2, 0});
  EXPECT_NEAR(r.x, -2, 1e-15);
  EXPECT_NEAR(r.y, 0, 1e-15);
}

TEST(Cmc, ComposeAndInvert) {
  const AffineTransform a = AffineTransform::rotation(0.3, {10, 20}, 4, -2);
  const AffineTransform b{1.1, 0.1, -0.2, 0.9, 3, 7};
  const Point p{5, -8};
  const Point ab = warp_point(a.then(b), p);
  const Point seq = warp_point(b, warp_point(a, p));
  EXPECT_NEAR(ab.x, seq.x, 1e-12);
  EXPECT_NEAR(ab.y, seq.y, 1e-12);
  const Point back = warp_point(a.inverse(), warp_point(a, p));
  EXPECT_NEAR(back.x, p.x, 1e-12);
  EXPECT_NEAR(back.y, p.y, 1e-12);
}

TEST(Cmc, ValidityThreshold) {
  EXPECT_TRUE(AffineTransform::identity().is_valid());
  EXPECT_FALSE((AffineTransform{1e-4, 0, 0, 1e-3, 0, 0}.is_valid()));
  EXPECT_THROW(AffineTransform({0, 0, 0, 0, 1, 1}).inverse(), Error);
}

TEST(Cmc, RotationPlusTranslationExact) {
  std::mt19937_64 gen(1);
  const AffineTransform a = AffineTransform::rotation(5.0 * M_PI / 180.0, {}, 4, -2);
  const AffineEstimate e = estimate_affine(exact_pairs(a, 10, gen), RansacConfig{});
  expect_params_near(e.transform, a, 1e-9);
  EXPECT_EQ(e.inliers.size(), 10u);
}

TEST(Cmc, GeneralAffineExact) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 0; i < 50; ++i) {
    const AffineTransform a{1 + u(gen), u(gen), u(gen), 1 + u(gen), 30 * u(gen), 30 * u(gen)};
    expect_params_near(estimate_affine(exact_pairs(a, 12, gen), RansacConfig{}).transform, a, 1e-8);
  }
}

TEST(Cmc, OutliersAndNoise) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-300, 300);
  std::normal_distribution<double> n(0, 0.2);
  const AffineTransform a = AffineTransform::rotation(0.02, {}, 6, -4);
  std::vector<Correspondence> pairs;
  for (int i = 0; i < 100; ++i) {
    const Point p{u(gen), u(gen)};
    Point q = warp_point(a, p);
    if (i < 30) {
      q = {u(gen), u(gen)};
    } else {
      q.x += n(gen);
      q.y += n(gen);
    }
    pairs.push_back({p, q});
  }
  RansacConfig rc;
  const AffineEstimate e = estimate_affine(pairs, rc);
  EXPECT_NEAR(e.transform.t1, a.t1, 0.1);
  EXPECT_NEAR(e.transform.t2, a.t2, 0.1);
  EXPECT_NEAR(e.transform.m11, a.m11, 1e-2);
  EXPECT_NEAR(e.transform.m12, a.m12, 1e-2);
  EXPECT_NEAR(e.transform.m21, a.m21, 1e-2);
  EXPECT_NEAR(e.transform.m22, a.m22, 1e-2);
  for (std::size_t i : e.inliers) {
    EXPECT_GE(i, 30u);
    const Point w = warp_point(e.transform, pairs[i].prev);
    EXPECT_LE(std::hypot(w.x - pairs[i].cur.x, w.y - pairs[i].cur.y), rc.inlier_threshold);
  }
  // deterministic for a fixed seed
  const AffineEstimate again = estimate_affine(pairs, rc);
  EXPECT_EQ(again.transform, e.transform);
  EXPECT_EQ(again.inliers, e.inliers);
}

TEST(Cmc, TooFewPairs) {
  const std::vector<Correspondence> two = {{{0, 0}, {1, 1}}, {{1, 0}, {2, 1}}};
  try {
    estimate_affine(two, RansacConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoMotionEstimate);
  }
}

TEST(Cmc, InsufficientConsensus) {
  std::mt19937_64 gen(4);
  const auto pairs = exact_pairs(AffineTransform::translation(1, 2), 6, gen);
  RansacConfig rc;  // min_inliers 10 > 6 pairs
  EXPECT_THROW(estimate_affine(pairs, rc), Error);
  rc.min_inliers = 6;
  EXPECT_NO_THROW(estimate_affine(pairs, rc));
}

TEST(Cmc, CollinearPointsFail) {
  std::vector<Correspondence> pairs;
  for (int i = 0; i < 20; ++i) pairs.push_back({{double(i), 2.0 * i}, {double(i) + 1, 2.0 * i}});
  EXPECT_THROW(estimate_affine(pairs, RansacConfig{}), Error);
}

TEST(Cmc, ConfigValidation) {
  RansacConfig rc;
  rc.min_inliers = 2;
  EXPECT_THROW(rc.validate(), Error);
  rc = {};
  rc.inlier_threshold = 0;
  EXPECT_THROW(rc.validate(), Error);
}
