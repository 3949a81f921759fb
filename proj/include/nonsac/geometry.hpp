#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "nonsac/rng.hpp"

namespace nonsac {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Rotation stored as a unit quaternion, canonicalized so that the first
// nonzero component of (w, x, y, z) is positive. The quaternion form keeps
// the angular distance well conditioned near identity.
class Rotation {
 public:
  Rotation() : q_(1, 0, 0, 0) {}

  explicit Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) { canonicalize(); }

  static Rotation from_matrix(const Eigen::Matrix3d& m) { return Rotation(Eigen::Quaterniond(m)); }

  static Rotation from_axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
    return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle_rad, axis.normalized())));
  }

  const Eigen::Quaterniond& quat() const { return q_; }
  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return q_ * v; }
  Rotation operator*(const Rotation& o) const { return Rotation(q_ * o.q_); }
  Rotation inverse() const { return Rotation(q_.conjugate()); }

 private:
  void canonicalize() {
    const double c[4] = {q_.w(), q_.x(), q_.y(), q_.z()};
    for (double v : c) {
      if (v > 0) break;
      if (v < 0) {
        q_.coeffs() = -q_.coeffs();
        break;
      }
    }
  }

  Eigen::Quaterniond q_;
};

// Angle of a*b^T in degrees, in [0, 180]. Metric on SO(3). Computed from the
// chordal quaternion distance, 2*acos(|qa.qb|) = 4*asin(min(|qa-qb|,|qa+qb|)/2),
// which stays exact at zero where the acos form loses half the mantissa.
inline double rotation_distance_deg(const Rotation& a, const Rotation& b) {
  const Eigen::Vector4d ca = a.quat().coeffs();
  const Eigen::Vector4d cb = b.quat().coeffs();
  const double d = std::min((ca - cb).norm(), (ca + cb).norm());
  return rad2deg(4.0 * std::asin(std::min(1.0, 0.5 * d)));
}

// Uniform on SO(3): normalized 4-vector of Gaussians.
inline Rotation random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  while (q.norm() < 1e-12) {
    q = Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  }
  return Rotation(q);
}

struct RigidTransform {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  RigidTransform compose(const RigidTransform& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }

  RigidTransform inverse() const {
    const Rotation rinv = rotation.inverse();
    return {rinv, -(rinv * translation)};
  }
};

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// Essential matrix; canonical form has unit Frobenius norm and positive
// first non-negligible entry.
struct EssentialMatrix {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();

  static EssentialMatrix from_pose(const Rotation& r, const Eigen::Vector3d& t) {
    EssentialMatrix e{skew(t) * r.matrix()};
    e.canonicalize();
    return e;
  }

  void canonicalize() {
    const double n = m.norm();
    if (n > 0) m /= n;
    for (int i = 0; i < 9; ++i) {
      const double v = m(i / 3, i % 3);
      if (std::abs(v) > 1e-12) {
        if (v < 0) m = -m;
        break;
      }
    }
  }

  // Two equal nonzero singular values, one zero (relative tolerance).
  bool satisfies_constraint(double rel_tol = 1e-6) const {
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
    const Eigen::Vector3d s = svd.singularValues();
    if (s(0) <= 0) return false;
    return std::abs(s(0) - s(1)) / s(0) < rel_tol && s(2) / s(0) < rel_tol;
  }
};

struct SampsonResult {
  double value = 0.0;
  bool degenerate = false;  // denominator underflow; algebraic fallback used
};

// First-order geometric epipolar error (squared-distance units).
inline SampsonResult sampson_error_ex(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                                      const EssentialMatrix& e) {
  const Eigen::Vector3d x1(p1.x(), p1.y(), 1.0);
  const Eigen::Vector3d x2(p2.x(), p2.y(), 1.0);
  const Eigen::Vector3d ex1 = e.m * x1;
  const Eigen::Vector3d etx2 = e.m.transpose() * x2;
  const double alg = x2.dot(ex1);
  const double den = ex1(0) * ex1(0) + ex1(1) * ex1(1) + etx2(0) * etx2(0) + etx2(1) * etx2(1);
  if (den < 1e-15) return {alg * alg, true};
  return {alg * alg / den, false};
}

inline double sampson_error(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                            const EssentialMatrix& e) {
  return sampson_error_ex(p1, p2, e).value;
}

struct EssentialDecomposition {
  RigidTransform pose;       // x2 = R x1 + t, |t| = 1
  bool low_confidence_t = false;  // near-zero-baseline data
};

// Pick among the four (R, t) factorizations the one with the most pairs
// passing the cheirality test (positive depth in both views).
inline std::optional<EssentialDecomposition> decompose_essential(
    const EssentialMatrix& e, const std::vector<Eigen::Vector2d>& pts1,
    const std::vector<Eigen::Vector2d>& pts2) {
  if (pts1.empty() || pts1.size() != pts2.size()) return std::nullopt;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(e.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0) u.col(2) *= -1;
  if (v.determinant() < 0) v.col(2) *= -1;
  Eigen::Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Eigen::Matrix3d r1 = u * w * v.transpose();
  const Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2);

  const Eigen::Matrix3d rs[4] = {r1, r1, r2, r2};
  const Eigen::Vector3d ts[4] = {t, -t, t, -t};

  int best = -1;
  int best_count = 0;
  double best_depth_scale = 0.0;
  for (int k = 0; k < 4; ++k) {
    int count = 0;
    std::vector<double> depths;
    depths.reserve(pts1.size());
    for (std::size_t i = 0; i < pts1.size(); ++i) {
      const Eigen::Vector3d f1(pts1[i].x(), pts1[i].y(), 1.0);
      const Eigen::Vector3d f2(pts2[i].x(), pts2[i].y(), 1.0);
      // d2 f2 = d1 R f1 + t, solved in least squares for (d1, d2).
      Eigen::Matrix<double, 3, 2> a;
      a.col(0) = rs[k] * f1;
      a.col(1) = -f2;
      const Eigen::Vector2d d = a.colPivHouseholderQr().solve(-ts[k]);
      if (d(0) > 0 && d(1) > 0) ++count;
      depths.push_back(std::abs(d(0)));
    }
    if (count > best_count) {
      best_count = count;
      best = k;
      std::nth_element(depths.begin(), depths.begin() + depths.size() / 2, depths.end());
      best_depth_scale = depths[depths.size() / 2];
    }
  }
  if (best < 0) return std::nullopt;
  EssentialDecomposition out;
  out.pose.rotation = Rotation::from_matrix(rs[best]);
  out.pose.translation = ts[best].normalized();
  // weak cheirality consensus or exploding depths (a vanishing baseline)
  // leave the translation direction unreliable
  out.low_confidence_t =
      best_count < static_cast<int>(3 * pts1.size() / 4) || best_depth_scale > 1e6;
  return out;
}

// Least-squares rigid fit q = R p + t via cross-covariance SVD with a
// reflection guard. Exact on consistent triplets.
inline std::optional<RigidTransform> fit_rigid(const std::vector<Eigen::Vector3d>& p,
                                               const std::vector<Eigen::Vector3d>& q) {
  const std::size_t n = p.size();
  if (n < 3 || q.size() != n) return std::nullopt;
  Eigen::Vector3d cp = Eigen::Vector3d::Zero(), cq = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cp += p[i];
    cq += q[i];
  }
  cp /= static_cast<double>(n);
  cq /= static_cast<double>(n);
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    h += (p[i] - cp) * (q[i] - cq).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // collinear points leave the smallest singular value at zero and the
  // rotation about the axis undetermined
  const Eigen::Vector3d s = svd.singularValues();
  if (s(1) < 1e-12 * std::max(1.0, s(0))) return std::nullopt;
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) d(2, 2) = -1;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  RigidTransform out;
  out.rotation = Rotation::from_matrix(r);
  out.translation = cq - r * cp;
  return out;
}

}  // namespace nonsac
