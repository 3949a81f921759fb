#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <optional>
#include <vector>

#include "nonsac/estimator_core.hpp"
#include "nonsac/geometry.hpp"

namespace nonsac {

// 2D-2D correspondences in normalized image coordinates.
struct Pair2D2D {
  std::vector<Eigen::Vector2d> x1;
  std::vector<Eigen::Vector2d> x2;

  int size() const { return static_cast<int>(x1.size()); }
};

namespace fivept {

// Polynomial bookkeeping for the 5-point solver. Linear polynomials in
// (x, y, z, 1) multiply up to degree-3 polynomials over 20 monomials ordered
// [x3 y3 z3 x2y x2z xy2 y2z xz2 yz2 xyz | x2 xy xz y2 yz z2 x y z 1]; the
// trailing 10 monomials double as the quotient-ring basis.
using Lin = std::array<double, 4>;
using Quad = std::array<double, 10>;
using Cubic = std::array<double, 20>;

inline Quad mul_lin(const Lin& a, const Lin& b) {
  Quad q{};
  static constexpr int kMap[4][4] = {
      {0, 1, 2, 6}, {1, 3, 4, 7}, {2, 4, 5, 8}, {6, 7, 8, 9}};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) q[kMap[i][j]] += a[i] * b[j];
  }
  return q;
}

inline void add_mul_quad_lin(Cubic& out, const Quad& q, const Lin& b, double scale = 1.0) {
  static constexpr int kMap[10][4] = {
      {0, 3, 4, 10}, {3, 5, 9, 11}, {4, 9, 7, 12}, {5, 1, 6, 13}, {9, 6, 8, 14},
      {7, 8, 2, 15}, {10, 11, 12, 16}, {11, 13, 14, 17}, {12, 14, 15, 18}, {16, 17, 18, 19}};
  for (int i = 0; i < 10; ++i) {
    if (q[i] == 0.0) continue;
    const double qi = scale * q[i];
    for (int j = 0; j < 4; ++j) out[kMap[i][j]] += qi * b[j];
  }
}

}  // namespace fivept

// Minimal 5-point essential matrix solver: null space of the epipolar
// constraints, the ten cubic manifold constraints reduced to a 10x10 action
// matrix for multiplication by x, eigenvectors give up to 10 real solutions.
inline std::vector<EssentialMatrix> five_point_solve(const std::array<Eigen::Vector2d, 5>& p1,
                                                     const std::array<Eigen::Vector2d, 5>& p2) {
  using namespace fivept;
  Eigen::Matrix<double, 5, 9> a;
  for (int i = 0; i < 5; ++i) {
    const double u1 = p1[i].x(), v1 = p1[i].y();
    const double u2 = p2[i].x(), v2 = p2[i].y();
    a.row(i) << u2 * u1, u2 * v1, u2, v2 * u1, v2 * v1, v2, u1, v1, 1.0;
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 5, 9>> svd(a, Eigen::ComputeFullV);
  // E = x E0 + y E1 + z E2 + E3; entry (r,c) is a linear polynomial.
  // Degenerate configurations (duplicated or collinear points) surface as a
  // rank-deficient reduction below and yield an empty solution set.
  std::array<Eigen::Matrix3d, 4> basis;
  for (int k = 0; k < 4; ++k) {
    const Eigen::Matrix<double, 9, 1> v = svd.matrixV().col(5 + k);
    basis[k] = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data());
  }
  auto entry = [&](int r, int c) -> Lin {
    return {basis[0](r, c), basis[1](r, c), basis[2](r, c), basis[3](r, c)};
  };

  Eigen::Matrix<double, 10, 20> m = Eigen::Matrix<double, 10, 20>::Zero();

  // det(E) = 0
  {
    Cubic det{};
    static constexpr int kPerm[6][4] = {{0, 1, 2, 1}, {1, 2, 0, 1}, {2, 0, 1, 1},
                                        {2, 1, 0, -1}, {1, 0, 2, -1}, {0, 2, 1, -1}};
    for (const auto& p : kPerm) {
      const Quad q = mul_lin(entry(0, p[0]), entry(1, p[1]));
      add_mul_quad_lin(det, q, entry(2, p[2]), static_cast<double>(p[3]));
    }
    for (int j = 0; j < 20; ++j) m(0, j) = det[j];
  }

  // 2 E E^T E - trace(E E^T) E = 0
  Quad eet[3][3];
  Quad trace{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      Quad acc{};
      for (int k = 0; k < 3; ++k) {
        const Quad q = mul_lin(entry(r, k), entry(c, k));
        for (int j = 0; j < 10; ++j) acc[j] += q[j];
      }
      eet[r][c] = acc;
    }
    for (int j = 0; j < 10; ++j) trace[j] += eet[r][r][j];
  }
  int row = 1;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      Cubic vec{};
      for (int k = 0; k < 3; ++k) add_mul_quad_lin(vec, eet[r][k], entry(k, c), 2.0);
      add_mul_quad_lin(vec, trace, entry(r, c), -1.0);
      for (int j = 0; j < 20; ++j) m(row, j) = vec[j];
      ++row;
    }
  }

  // Gauss-Jordan over the ten cubic monomial columns.
  for (int col = 0; col < 10; ++col) {
    int piv = col;
    for (int r = col + 1; r < 10; ++r) {
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    }
    if (std::abs(m(piv, col)) < 1e-12) return {};
    if (piv != col) m.row(col).swap(m.row(piv));
    m.row(col) /= m(col, col);
    for (int r = 0; r < 10; ++r) {
      if (r != col && m(r, col) != 0.0) m.row(r) -= m(r, col) * m.row(col);
    }
  }
  const Eigen::Matrix<double, 10, 10> b = m.rightCols<10>();

  // Multiplication-by-x action on the basis [x2 xy xz y2 yz z2 x y z 1].
  Eigen::Matrix<double, 10, 10> action = Eigen::Matrix<double, 10, 10>::Zero();
  action.row(0) = -b.row(0);  // x*x2 = x3
  action.row(1) = -b.row(3);  // x*xy = x2y
  action.row(2) = -b.row(4);  // x*xz = x2z
  action.row(3) = -b.row(5);  // x*y2 = xy2
  action.row(4) = -b.row(9);  // x*yz = xyz
  action.row(5) = -b.row(7);  // x*z2 = xz2
  action(6, 0) = 1.0;         // x*x = x2
  action(7, 1) = 1.0;         // x*y = xy
  action(8, 2) = 1.0;         // x*z = xz
  action(9, 6) = 1.0;         // x*1 = x

  const Eigen::EigenSolver<Eigen::Matrix<double, 10, 10>> eig(action, true);
  std::vector<EssentialMatrix> out;
  for (int i = 0; i < 10; ++i) {
    if (std::abs(eig.eigenvalues()(i).imag()) > 1e-10 * (1.0 + std::abs(eig.eigenvalues()(i).real()))) {
      continue;
    }
    const Eigen::Matrix<std::complex<double>, 10, 1> vc = eig.eigenvectors().col(i);
    const double w = vc(9).real();
    if (std::abs(w) < 1e-13) continue;
    const double x = vc(6).real() / w;
    const double y = vc(7).real() / w;
    const double z = vc(8).real() / w;
    EssentialMatrix e{x * basis[0] + y * basis[1] + z * basis[2] + basis[3]};
    if (!e.m.allFinite() || e.m.norm() < 1e-12) continue;
    // project to the essential manifold: singular values (s, s, 0)
    Eigen::JacobiSVD<Eigen::Matrix3d> esvd(e.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double s = 0.5 * (esvd.singularValues()(0) + esvd.singularValues()(1));
    if (s < 1e-12) continue;
    e.m = esvd.matrixU() * Eigen::Vector3d(s, s, 0).asDiagonal() * esvd.matrixV().transpose();
    e.canonicalize();
    // genuine roots interpolate all five constraints; degenerate systems
    // produce eigenvectors that do not
    double fit = 0.0;
    for (int r = 0; r < 5; ++r) {
      const Eigen::Vector3d x1v(p1[r].x(), p1[r].y(), 1.0);
      const Eigen::Vector3d x2v(p2[r].x(), p2[r].y(), 1.0);
      fit = std::max(fit, std::abs(x2v.dot(e.m * x1v)));
    }
    if (fit > 1e-7) continue;
    out.push_back(e);
    if (out.size() == 10) break;
  }
  return out;
}

struct RelposeModel {
  EssentialMatrix essential;
  RigidTransform pose;  // x2 = R x1 + t, |t| = 1
  bool low_confidence_t = false;
};

// 5-point-in-RANSAC with the Sampson inlier test; threshold is (5 sigma)^2.
inline std::optional<EstimatorOutput<RelposeModel>> estimate_relpose(const Pair2D2D& sample,
                                                                     const RansacConfig& config) {
  const int n = sample.size();
  auto solver = [&](const std::vector<int>& idx) {
    std::array<Eigen::Vector2d, 5> p1, p2;
    for (int i = 0; i < 5; ++i) {
      p1[i] = sample.x1[idx[i]];
      p2[i] = sample.x2[idx[i]];
    }
    return five_point_solve(p1, p2);
  };
  auto residual = [&](const EssentialMatrix& e, int i) {
    return sampson_error(sample.x1[i], sample.x2[i], e);
  };
  auto res = ransac<EssentialMatrix>(n, 5, solver, residual, config);
  if (!res) return std::nullopt;

  std::vector<Eigen::Vector2d> in1, in2;
  in1.reserve(res->inlier_indices.size());
  in2.reserve(res->inlier_indices.size());
  for (int i : res->inlier_indices) {
    in1.push_back(sample.x1[i]);
    in2.push_back(sample.x2[i]);
  }
  const auto dec = decompose_essential(res->model, in1, in2);
  if (!dec) return std::nullopt;

  EstimatorOutput<RelposeModel> out;
  out.model.essential = res->model;
  out.model.pose = dec->pose;
  out.model.low_confidence_t = dec->low_confidence_t;
  out.inlier_indices = std::move(res->inlier_indices);
  out.residuals = std::move(res->residuals);
  out.iterations_used = res->iterations_used;
  out.low_support = res->low_support;
  return out;
}

}  // namespace nonsac
