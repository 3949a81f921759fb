#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonsac/geometry.hpp"
#include "nonsac/pcr.hpp"
#include "nonsac/pnp.hpp"
#include "nonsac/relpose.hpp"
#include "nonsac/rng.hpp"

namespace nonsac {

enum class Problem { kRelpose, kPnp, kPcr, kCorfree };

inline const char* problem_name(Problem p) {
  switch (p) {
    case Problem::kRelpose: return "relpose";
    case Problem::kPnp: return "pnp";
    case Problem::kPcr: return "pcr";
    case Problem::kCorfree: return "corfree";
  }
  return "?";
}

struct SceneConfig {
  Problem problem = Problem::kRelpose;
  int n = 10000;
  double sigma = 0.002;
  double outlier_ratio = 0.65;
  // correspondence-free extras
  int points_per_cloud = 500;
  double overlap = 0.5;
};

struct GroundTruth {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  std::vector<bool> inlier_mask;  // empty for the lazy correspondence-free set
  int inlier_count = 0;
};

namespace datagen_detail {

// Exact outlier count: a random permutation prefix is replaced, never a
// per-point coin flip.
inline std::vector<bool> exact_inlier_mask(int n, double outlier_ratio, Rng& rng,
                                           std::vector<int>* outlier_indices) {
  const int n_out = static_cast<int>(std::llround(outlier_ratio * n));
  *outlier_indices = rng.sample_without_replacement(n_out, n);
  std::vector<bool> mask(n, true);
  for (int i : *outlier_indices) mask[i] = false;
  return mask;
}

struct RelposeScene {
  std::vector<Eigen::Vector3d> points;  // camera-1 frame
  Rotation r;            // x2 = r x1 + t
  Eigen::Vector3d t;     // unit norm
  std::vector<Eigen::Vector2d> img1, img2;  // noiseless projections
};

// Camera 1 at the origin; camera 2 at a random unit-length center with its
// optical axis proposed toward the cloud (the admissible orientations form a
// sliver once every point of a full frustum must reproject into [-1,1]^2, so
// a blind orientation proposal would never terminate). Every candidate is
// still checked against all three constraints exactly.
inline RelposeScene relpose_scene(int n, Rng& rng) {
  RelposeScene s;
  s.points.resize(n);
  s.img1.resize(n);
  s.img2.resize(n);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(-1, 1);
    const double v = rng.uniform(-1, 1);
    const double d = rng.uniform(0.1, 10);
    s.points[i] = d * Eigen::Vector3d(u, v, 1);
    s.img1[i] = Eigen::Vector2d(u, v);
    centroid += s.points[i];
  }
  centroid /= n;
  for (long attempt = 0; attempt < 100000; ++attempt) {
    Eigen::Vector3d c(rng.normal(), rng.normal(), rng.normal());
    while (c.norm() < 1e-9) c = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    c.normalize();  // camera-2 center at distance 1

    // aim roughly at the cloud, then jitter look direction and roll
    Eigen::Vector3d axis = (centroid - c).normalized();
    const double jitter = deg2rad(2.0);
    axis += jitter * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    // roll snaps near a square-aligned orientation plus noise; corner points
    // make other rolls violate the square image bound anyway
    const double roll = 0.5 * kPi * static_cast<double>(rng.uniform_index(4)) +
                        jitter * rng.normal();
    Eigen::Vector3d up = std::abs(axis.z()) < 0.9 ? Eigen::Vector3d::UnitZ()
                                                  : Eigen::Vector3d::UnitX();
    const Eigen::Vector3d xdir = up.cross(axis).normalized();
    const Eigen::Vector3d ydir = axis.cross(xdir);
    Eigen::Matrix3d cam_to_world;
    cam_to_world.col(0) = std::cos(roll) * xdir + std::sin(roll) * ydir;
    cam_to_world.col(1) = -std::sin(roll) * xdir + std::cos(roll) * ydir;
    cam_to_world.col(2) = axis;
    const Eigen::Matrix3d rm = cam_to_world.transpose();
    const Eigen::Vector3d t = -(rm * c);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d x2 = rm * s.points[i] + t;
      if (x2.z() <= 0.1) {
        ok = false;
        break;
      }
      const double u2 = x2.x() / x2.z(), v2 = x2.y() / x2.z();
      if (u2 < -1 || u2 > 1 || v2 < -1 || v2 > 1) {
        ok = false;
        break;
      }
      s.img2[i] = Eigen::Vector2d(u2, v2);
    }
    if (ok) {
      s.r = Rotation::from_matrix(rm);
      s.t = t;
      return s;
    }
  }
  throw std::runtime_error("pose sampling failed: no admissible second camera in 1e5 attempts");
}

}  // namespace datagen_detail

// 2D-2D simulation. Noise goes on the image points of both views; an exact
// fraction of pairs is replaced by uniform outliers in both views.
inline std::pair<Pair2D2D, GroundTruth> gen_relpose(const SceneConfig& config, Rng& rng) {
  using namespace datagen_detail;
  const RelposeScene s = relpose_scene(config.n, rng);
  Pair2D2D d;
  d.x1.resize(config.n);
  d.x2.resize(config.n);
  for (int i = 0; i < config.n; ++i) {
    d.x1[i] = s.img1[i] + config.sigma * Eigen::Vector2d(rng.normal(), rng.normal());
    d.x2[i] = s.img2[i] + config.sigma * Eigen::Vector2d(rng.normal(), rng.normal());
  }
  GroundTruth gt;
  std::vector<int> outliers;
  gt.inlier_mask = exact_inlier_mask(config.n, config.outlier_ratio, rng, &outliers);
  for (int i : outliers) {
    d.x1[i] = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
    d.x2[i] = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  gt.rotation = s.r;
  gt.translation = s.t;
  gt.inlier_count = config.n - static_cast<int>(outliers.size());
  return {std::move(d), std::move(gt)};
}

// 3D-2D simulation over the same scene generator; outliers replace only the
// image observation.
inline std::pair<Pair3D2D, GroundTruth> gen_pnp(const SceneConfig& config, Rng& rng) {
  using namespace datagen_detail;
  const RelposeScene s = relpose_scene(config.n, rng);
  Pair3D2D d;
  d.world = s.points;
  d.image.resize(config.n);
  for (int i = 0; i < config.n; ++i) {
    d.image[i] = s.img2[i] + config.sigma * Eigen::Vector2d(rng.normal(), rng.normal());
  }
  GroundTruth gt;
  std::vector<int> outliers;
  gt.inlier_mask = exact_inlier_mask(config.n, config.outlier_ratio, rng, &outliers);
  for (int i : outliers) {
    d.image[i] = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  gt.rotation = s.r;
  gt.translation = s.t;
  gt.inlier_count = config.n - static_cast<int>(outliers.size());
  return {std::move(d), std::move(gt)};
}

// 3D-3D simulation: source uniform in the unit cube, target rigidly moved
// plus noise; outlier targets are uniform in the sphere circumscribing the
// transformed cube.
inline std::pair<Pair3D3D, GroundTruth> gen_pcr(const SceneConfig& config, Rng& rng) {
  using namespace datagen_detail;
  const int n = config.n;
  Pair3D3D d;
  d.p.resize(n);
  d.q.resize(n);
  const Rotation r = random_rotation(rng);
  const Eigen::Vector3d t(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  const Eigen::Matrix3d rm = r.matrix();
  for (int i = 0; i < n; ++i) {
    d.p[i] = Eigen::Vector3d(rng.uniform01(), rng.uniform01(), rng.uniform01());
    d.q[i] = rm * d.p[i] + t +
             config.sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
  }
  GroundTruth gt;
  std::vector<int> outliers;
  gt.inlier_mask = exact_inlier_mask(n, config.outlier_ratio, rng, &outliers);
  const Eigen::Vector3d center = rm * Eigen::Vector3d(0.5, 0.5, 0.5) + t;
  const double radius = std::sqrt(3.0) / 2.0;
  for (int i : outliers) {
    Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
    while (v.norm() < 1e-9) v = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    v.normalize();
    d.q[i] = center + radius * std::cbrt(rng.uniform01()) * v;
  }
  gt.rotation = r;
  gt.translation = t;
  gt.inlier_count = n - static_cast<int>(outliers.size());
  return {std::move(d), std::move(gt)};
}

// All-to-all tentative matches between two partially overlapping subsets of
// one cloud; the pair list is addressed by index arithmetic and never
// materialized.
struct CorfreeData {
  std::vector<Eigen::Vector3d> src, tgt;
  std::vector<int> src_orig, tgt_orig;  // indices into the input cloud

  long long pair_count() const {
    return static_cast<long long>(src.size()) * static_cast<long long>(tgt.size());
  }
  int source_of(long long id) const { return static_cast<int>(id / static_cast<long long>(tgt.size())); }
  int target_of(long long id) const { return static_cast<int>(id % static_cast<long long>(tgt.size())); }
  const Eigen::Vector3d& p(long long id) const { return src[source_of(id)]; }
  const Eigen::Vector3d& q(long long id) const { return tgt[target_of(id)]; }
  bool is_inlier(long long id) const { return src_orig[source_of(id)] == tgt_orig[target_of(id)]; }
};

// Scale the cloud into the unit cube, pick two subsets with the requested
// overlap, rigidly move one and add noise.
inline std::pair<CorfreeData, GroundTruth> gen_corfree(const std::vector<Eigen::Vector3d>& cloud,
                                                       const SceneConfig& config, Rng& rng) {
  const int s = config.points_per_cloud;
  const int shared = static_cast<int>(std::llround(config.overlap * s));
  const int m = 2 * s - shared;
  if (static_cast<int>(cloud.size()) < m) {
    throw std::invalid_argument("gen_corfree: cloud has fewer points than the two subsets need");
  }

  Eigen::Vector3d lo = cloud[0], hi = cloud[0];
  for (const auto& p : cloud) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = (hi - lo).maxCoeff();
  const double scale = extent > 0 ? 1.0 / extent : 1.0;

  const std::vector<int> sel = rng.sample_without_replacement(m, static_cast<int>(cloud.size()));
  CorfreeData d;
  d.src.reserve(s);
  d.tgt.reserve(s);
  for (int i = 0; i < s; ++i) {
    d.src_orig.push_back(sel[i]);
    d.src.push_back(scale * (cloud[sel[i]] - lo));
  }
  const Rotation r = random_rotation(rng);
  const Eigen::Vector3d t(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  const Eigen::Matrix3d rm = r.matrix();
  for (int i = m - s; i < m; ++i) {
    d.tgt_orig.push_back(sel[i]);
    const Eigen::Vector3d p = scale * (cloud[sel[i]] - lo);
    d.tgt.push_back(rm * p + t +
                    config.sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
  }
  GroundTruth gt;
  gt.rotation = r;
  gt.translation = t;
  gt.inlier_count = shared;
  return {std::move(d), std::move(gt)};
}

}  // namespace nonsac
