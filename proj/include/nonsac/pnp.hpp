#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "nonsac/estimator_core.hpp"
#include "nonsac/geometry.hpp"

namespace nonsac {

// 3D-2D correspondences: world point and normalized image observation.
struct Pair3D2D {
  std::vector<Eigen::Vector3d> world;
  std::vector<Eigen::Vector2d> image;

  int size() const { return static_cast<int>(world.size()); }
};

namespace p3p_detail {

// Real roots of a quartic via the companion matrix.
inline std::vector<double> quartic_roots(const std::array<double, 5>& c) {
  // c[4] x^4 + ... + c[0]
  int deg = 4;
  while (deg > 0 && std::abs(c[deg]) < 1e-14 * std::max({std::abs(c[0]), std::abs(c[1]),
                                                         std::abs(c[2]), std::abs(c[3]), 1e-300})) {
    --deg;
  }
  if (deg == 0) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) comp(0, i) = -c[deg - 1 - i] / c[deg];
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(comp, false);
  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    const auto ev = eig.eigenvalues()(i);
    if (std::abs(ev.imag()) > 1e-8 * (1.0 + std::abs(ev.real()))) continue;
    double x = ev.real();
    for (int it = 0; it < 3; ++it) {  // Newton polish
      double p = 0.0, dp = 0.0;
      for (int k = deg; k >= 0; --k) {
        dp = dp * x + p;
        p = p * x + c[k];
      }
      if (std::abs(dp) < 1e-300) break;
      x -= p / dp;
    }
    roots.push_back(x);
  }
  return roots;
}

}  // namespace p3p_detail

// Grunert-style P3P: solve for the three view depths through the law of
// cosines, then absolute orientation. Up to four poses; each reprojects the
// minimal triple exactly on clean input.
inline std::vector<RigidTransform> p3p_solve(const std::array<Eigen::Vector3d, 3>& world,
                                             const std::array<Eigen::Vector2d, 3>& image) {
  // bearing vectors
  std::array<Eigen::Vector3d, 3> f;
  for (int i = 0; i < 3; ++i) f[i] = Eigen::Vector3d(image[i].x(), image[i].y(), 1.0).normalized();

  const double a = (world[1] - world[2]).norm();
  const double b = (world[0] - world[2]).norm();
  const double c = (world[0] - world[1]).norm();
  if (a < 1e-12 || b < 1e-12 || c < 1e-12) return {};
  // collinearity
  if (((world[1] - world[0]).cross(world[2] - world[0])).norm() <
      1e-12 * std::max(1.0, b * c)) {
    return {};
  }

  const double ca = f[1].dot(f[2]);  // angle opposite side a
  const double cb = f[0].dot(f[2]);
  const double cc = f[0].dot(f[1]);

  // s_i: distance from the camera center to world point i along f_i.
  //   s2^2 + s3^2 - 2 s2 s3 ca = a^2
  //   s1^2 + s3^2 - 2 s1 s3 cb = b^2
  //   s1^2 + s2^2 - 2 s1 s2 cc = c^2
  // With u = s2/s1, v = s3/s1 the first equation minus the others gives
  // u linear in v: u = N(v)/D(v), substituted into the third equation.
  const double a2 = a * a, b2 = b * b, c2 = c * c;

  // From b2*(u^2+v^2-2uv ca) = a2*(1+v^2-2v cb)   (I)
  // and  b2*(1+u^2-2u cc)   = c2*(1+v^2-2v cb)    (II)
  // (I) - (II): b2 v^2 - 2 b2 u v ca + 2 b2 u cc - b2 = (a2-c2)(1+v^2-2v cb)
  // => u * [2 b2 (cc - v ca)] = (a2-c2)(1+v^2-2v cb) - b2 v^2 + b2
  // N(v) quadratic, D(v) linear.
  const double n2 = (a2 - c2) - b2;              // v^2 coefficient
  const double n1 = -2.0 * (a2 - c2) * cb;       // v coefficient
  const double n0 = (a2 - c2) + b2;              // constant
  const double d1 = -2.0 * b2 * ca;
  const double d0 = 2.0 * b2 * cc;

  // Substitute u = N/D into (II): b2 (D^2 + N^2 - 2 N D cc) - c2 (1+v^2-2v cb) D^2 = 0
  std::array<double, 5> q{};
  auto add_poly_prod = [&](const std::array<double, 3>& p1, const std::array<double, 3>& p2,
                           double scale) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) q[i + j] += scale * p1[i] * p2[j];
    }
  };
  const std::array<double, 3> nn{n0, n1, n2};
  const std::array<double, 3> dd{d0, d1, 0.0};
  add_poly_prod(nn, nn, b2);
  add_poly_prod(dd, dd, b2);
  add_poly_prod(nn, dd, -2.0 * b2 * cc);
  // subtract c2 * (1 + v^2 - 2 v cb) * D^2
  const std::array<double, 3> vv{1.0, -2.0 * cb, 1.0};
  std::array<double, 3> d2poly{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i + j < 3) d2poly[i + j] += dd[i] * dd[j];
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) q[i + j] -= c2 * vv[i] * d2poly[j];
  }

  std::vector<RigidTransform> out;
  for (double v : p3p_detail::quartic_roots(q)) {
    if (!(v > 0) || !std::isfinite(v)) continue;
    const double den = d0 + d1 * v;
    if (std::abs(den) < 1e-14) continue;
    const double u = (n0 + n1 * v + n2 * v * v) / den;
    if (!(u > 0) || !std::isfinite(u)) continue;
    const double s1sq = b2 / (1.0 + v * v - 2.0 * v * cb);
    if (!(s1sq > 0)) continue;
    const double s1 = std::sqrt(s1sq);
    const double s2 = u * s1;
    const double s3 = v * s1;
    const std::vector<Eigen::Vector3d> cam = {s1 * f[0], s2 * f[1], s3 * f[2]};
    const std::vector<Eigen::Vector3d> wld = {world[0], world[1], world[2]};
    const auto rt = fit_rigid(wld, cam);  // x_cam = R X + t
    if (!rt) continue;
    // accept only poses that actually reproject the triple
    double maxres = 0.0;
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d pc = (*rt) * world[i];
      if (pc.z() <= 0) {
        ok = false;
        break;
      }
      maxres = std::max(maxres, (Eigen::Vector2d(pc.x() / pc.z(), pc.y() / pc.z()) -
                                 image[i])
                                    .norm());
    }
    if (!ok || maxres > 1e-6 * std::max(1.0, s1 + s2 + s3)) continue;
    out.push_back(*rt);
    if (out.size() == 4) break;
  }
  return out;
}

// Euclidean reprojection distance in the normalized image plane; points with
// non-positive depth can never be inliers.
inline double reprojection_error(const RigidTransform& pose, const Eigen::Vector3d& world,
                                 const Eigen::Vector2d& image) {
  const Eigen::Vector3d pc = pose * world;
  if (pc.z() <= 0) return std::numeric_limits<double>::infinity();
  return (Eigen::Vector2d(pc.x() / pc.z(), pc.y() / pc.z()) - image).norm();
}

// P3P-in-RANSAC with the reprojection inlier test; threshold is 5 sigma
// (unsquared distance).
inline std::optional<EstimatorOutput<RigidTransform>> estimate_pnp(const Pair3D2D& sample,
                                                                   const RansacConfig& config) {
  const int n = sample.size();
  auto solver = [&](const std::vector<int>& idx) {
    std::array<Eigen::Vector3d, 3> w;
    std::array<Eigen::Vector2d, 3> im;
    for (int i = 0; i < 3; ++i) {
      w[i] = sample.world[idx[i]];
      im[i] = sample.image[idx[i]];
    }
    return p3p_solve(w, im);
  };
  auto residual = [&](const RigidTransform& pose, int i) {
    return reprojection_error(pose, sample.world[i], sample.image[i]);
  };
  return ransac<RigidTransform>(n, 3, solver, residual, config);
}

}  // namespace nonsac
