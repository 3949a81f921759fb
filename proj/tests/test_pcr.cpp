#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nonsac/datagen.hpp"
#include "nonsac/pcr.hpp"
#include "nonsac/rng.hpp"

using namespace nonsac;

namespace {

Pcr99Config config_for(double sigma) {
  Pcr99Config c;
  c.prescreen_tolerance = 6 * sigma;
  c.inlier_threshold = 5 * sigma;
  return c;
}

}  // namespace

TEST_CASE("pairwise consistency vanishes for exact inliers") {
  Rng rng(401);
  for (int i = 0; i < 200; ++i) {
    const Rotation r = random_rotation(rng);
    const Eigen::Vector3d t(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d pa(rng.uniform01(), rng.uniform01(), rng.uniform01());
    const Eigen::Vector3d pb(rng.uniform01(), rng.uniform01(), rng.uniform01());
    CHECK(pairwise_consistency(pa, r * pa + t, pb, r * pb + t) < 1e-12);
  }
}

TEST_CASE("pairwise consistency separates outliers from noisy inliers") {
  Rng rng(402);
  const Rotation r = random_rotation(rng);
  const Eigen::Vector3d t(0.4, -0.2, 0.7);
  const double sigma = 0.01;

  // noisy inlier pairs stay below 6 sigma nearly always
  int below = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    Eigen::Vector3d pa(rng.uniform01(), rng.uniform01(), rng.uniform01());
    Eigen::Vector3d pb(rng.uniform01(), rng.uniform01(), rng.uniform01());
    const Eigen::Vector3d qa =
        r * pa + t + sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d qb =
        r * pb + t + sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    if (pairwise_consistency(pa, qa, pb, qb) < 6 * sigma) ++below;
  }
  CHECK(below >= static_cast<int>(0.99 * draws));

  // inlier against a uniform outlier lands at the scene scale, orders above
  double sum = 0.0;
  const int odraws = 2000;
  for (int i = 0; i < odraws; ++i) {
    Eigen::Vector3d pa(rng.uniform01(), rng.uniform01(), rng.uniform01());
    Eigen::Vector3d pb(rng.uniform01(), rng.uniform01(), rng.uniform01());
    const Eigen::Vector3d qa = r * pa + t;
    const Eigen::Vector3d qb(rng.uniform01(), rng.uniform01(), rng.uniform01());
    sum += pairwise_consistency(pa, qa, pb, qb);
  }
  const double mean = sum / odraws;
  CHECK(mean > 0.05);
  CHECK(mean < 1.5);
}

TEST_CASE("scores saturate on a pure-inlier noiseless set") {
  Rng rng(403);
  const Rotation r = random_rotation(rng);
  const Eigen::Vector3d t(0.1, 0.2, 0.3);
  Pair3D3D set;
  for (int i = 0; i < 60; ++i) {
    const Eigen::Vector3d p(rng.uniform01(), rng.uniform01(), rng.uniform01());
    set.p.push_back(p);
    set.q.push_back(r * p + t);
  }
  Pcr99Config c = config_for(0.01);
  c.scoring_subset_size = 20;
  const auto scores = score_correspondences(set, c);
  for (double s : scores) CHECK(s == 20.0);

  c.scoring_subset_size = 0;  // against everyone
  for (double s : score_correspondences(set, c)) CHECK(s == 59.0);
}

TEST_CASE("scores on a pure-outlier set sit at the collision rate, far below K") {
  Rng rng(411);
  Pair3D3D set;
  for (int i = 0; i < 400; ++i) {
    set.p.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
    set.q.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
  }
  Pcr99Config c = config_for(0.01);
  c.scoring_subset_size = 100;
  const auto scores = score_correspondences(set, c);
  double mean = 0;
  double peak = 0;
  for (double s : scores) {
    mean += s;
    peak = std::max(peak, s);
  }
  mean /= scores.size();
  CHECK(mean < 40.0);  // chance pairwise-distance collisions only
  CHECK(peak < 70.0);
}

TEST_CASE("scores separate inliers at one percent inlier ratio") {
  // the correspondence-free regime: 1% inliers
  Rng rng(404);
  SceneConfig scene;
  scene.n = 2000;
  scene.sigma = 0.01;
  scene.outlier_ratio = 0.99;
  const auto [set, gt] = gen_pcr(scene, rng);
  const auto scores = score_correspondences(set, config_for(scene.sigma));

  double mi = 0, mo = 0, vi = 0, vo = 0;
  int ni = 0, no = 0;
  for (int i = 0; i < scene.n; ++i) {
    if (gt.inlier_mask[i]) {
      mi += scores[i];
      ++ni;
    } else {
      mo += scores[i];
      ++no;
    }
  }
  mi /= ni;
  mo /= no;
  for (int i = 0; i < scene.n; ++i) {
    const double d = scores[i] - (gt.inlier_mask[i] ? mi : mo);
    (gt.inlier_mask[i] ? vi : vo) += d * d;
  }
  vi /= std::max(1, ni - 1);
  vo /= std::max(1, no - 1);
  // strict separation, at better than three standard errors
  CHECK(mi > mo);
  const double se = std::sqrt(vi / ni + vo / no);
  CHECK(mi - mo >= 3.0 * se);
}

TEST_CASE("procrustes recovers exact triplet transforms") {
  Rng rng(405);
  // identity
  const std::array<Eigen::Vector3d, 3> tri = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0),
                                              Eigen::Vector3d(0, 1, 0)};
  auto fit = procrustes_3pt(tri, tri);
  REQUIRE(fit.has_value());
  CHECK(rotation_distance_deg(fit->rotation, Rotation()) < 1e-12);
  CHECK(fit->translation.norm() < 1e-12);

  // pure translation
  std::array<Eigen::Vector3d, 3> shifted;
  for (int i = 0; i < 3; ++i) shifted[i] = tri[i] + Eigen::Vector3d(0, 0, 1);
  fit = procrustes_3pt(tri, shifted);
  REQUIRE(fit.has_value());
  CHECK(rotation_distance_deg(fit->rotation, Rotation()) < 1e-12);
  CHECK((fit->translation - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);

  // random rigid round trips
  for (int trial = 0; trial < 1000; ++trial) {
    const Rotation r = random_rotation(rng);
    const Eigen::Vector3d t(rng.normal(), rng.normal(), rng.normal());
    std::array<Eigen::Vector3d, 3> p, q;
    for (int i = 0; i < 3; ++i) {
      p[i] = Eigen::Vector3d(rng.uniform01(), rng.uniform01(), rng.uniform01());
      q[i] = r * p[i] + t;
    }
    const auto f = procrustes_3pt(p, q);
    if (!f) continue;  // degenerate draw
    CHECK(rotation_distance_deg(f->rotation, r) < 1e-7);
    CHECK((f->translation - t).norm() < 1e-9);
  }

  // collinear triplet is rejected
  const std::array<Eigen::Vector3d, 3> line = {Eigen::Vector3d(0, 0, 0),
                                               Eigen::Vector3d(1, 1, 1),
                                               Eigen::Vector3d(2, 2, 2)};
  CHECK(!procrustes_3pt(line, line).has_value());
}

TEST_CASE("estimate_pcr nails a noiseless pure-inlier sample") {
  Rng rng(406);
  SceneConfig scene;
  scene.n = 100;
  scene.sigma = 0.0;
  scene.outlier_ratio = 0.0;
  const auto [set, gt] = gen_pcr(scene, rng);
  Pcr99Config c;
  c.prescreen_tolerance = 1e-9;
  c.inlier_threshold = 1e-9;
  c.seed = 5;
  const auto out = estimate_pcr(set, c);
  REQUIRE(out.has_value());
  CHECK(static_cast<int>(out->inlier_indices.size()) == scene.n);
  CHECK(rotation_distance_deg(out->model.rotation, gt.rotation) < 1e-7);
}

TEST_CASE("estimate_pcr halts and flags a pure-outlier sample") {
  Rng rng(407);
  Pair3D3D set;
  for (int i = 0; i < 500; ++i) {
    set.p.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
    set.q.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
  }
  Pcr99Config c = config_for(0.01);
  c.seed = 5;
  const auto out = estimate_pcr(set, c);
  CHECK(static_cast<long long>(c.max_total_triplets) >=
        (out ? out->iterations_used : 0));  // halted within budget
  if (out.has_value()) CHECK(out->low_support);
}

TEST_CASE("estimate_pcr at the 99 percent outlier operating point") {
  Rng rng(408);
  SceneConfig scene;
  scene.n = 2000;
  scene.sigma = 0.01;
  scene.outlier_ratio = 0.99;
  int good = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto [set, gt] = gen_pcr(scene, rng);
    Pcr99Config c = config_for(scene.sigma);
    c.seed = split_seed(9000, trial);
    const auto out = estimate_pcr(set, c);
    if (!out) continue;
    if (rotation_distance_deg(out->model.rotation, gt.rotation) < 3.0) ++good;
  }
  // per-sample success is ~0.8; five trials nearly always contain successes
  CHECK(good >= 2);
}

TEST_CASE("estimate_pcr is deterministic given a seed") {
  Rng rng(409);
  SceneConfig scene;
  scene.n = 800;
  scene.sigma = 0.01;
  scene.outlier_ratio = 0.95;
  const auto [set, gt] = gen_pcr(scene, rng);
  Pcr99Config c = config_for(scene.sigma);
  c.seed = 42;
  const auto a = estimate_pcr(set, c);
  const auto b = estimate_pcr(set, c);
  REQUIRE(a.has_value() == b.has_value());
  if (a) {
    CHECK(a->inlier_indices == b->inlier_indices);
    CHECK(a->residuals == b->residuals);
    CHECK(a->model.rotation.quat().coeffs() == b->model.rotation.quat().coeffs());
  }
}

TEST_CASE("inlier-ratio termination respects the hard cap") {
  Rng rng(410);
  Pair3D3D set;  // pure outliers: the ratio bar is unreachable
  for (int i = 0; i < 300; ++i) {
    set.p.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
    set.q.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
  }
  Pcr99Config c = config_for(0.01);
  c.termination = PcrTermination::kInlierRatio;
  c.target_inlier_ratio = 0.5;  // unreachable
  c.ratio_mode_hard_cap = 20000;
  c.seed = 8;
  const auto out = estimate_pcr(set, c);
  if (out.has_value()) CHECK(out->iterations_used <= 20000);
}
