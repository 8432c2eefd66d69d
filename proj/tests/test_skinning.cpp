#include <cmath>
#include <random>

#include "doctest.h"
#include "rigfit/error.hpp"
#include "rigfit/skinning.hpp"
#include "support/oracles.hpp"

using namespace rigfit;

namespace {

struct BoneSet {
  std::vector<GaussianBone> bones;
  AnchorSet anchors;
  std::vector<Vec3> centers;
  std::vector<Vec3> scales;
  std::vector<Quat> orientations;
};

/// Bones whose anchors sit at random points; centres are anchor + offset.
BoneSet random_bones(std::mt19937_64& rng, std::size_t k) {
  BoneSet b;
  std::uniform_real_distribution<double> scale(0.3, 1.5);
  for (std::size_t j = 0; j < k; ++j) {
    const Vec3 anchor = oracle::random_vec(rng);
    GaussianBone g;
    g.anchor_index = static_cast<std::int32_t>(j);
    g.delta_center = oracle::random_vec(rng, 0.3);
    g.scale = Vec3(scale(rng), scale(rng), scale(rng));
    g.orientation = oracle::random_unit_quat(rng);
    b.bones.push_back(g);
    b.anchors.indices.push_back(static_cast<std::int32_t>(j));
    b.anchors.coords.push_back(anchor);
    b.centers.push_back(anchor + g.delta_center);
    b.scales.push_back(g.scale);
    b.orientations.push_back(g.orientation);
  }
  return b;
}

BoneSet simple_bones(const std::vector<Vec3>& centers) {
  BoneSet b;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    GaussianBone g;
    g.anchor_index = static_cast<std::int32_t>(j);
    b.bones.push_back(g);
    b.anchors.indices.push_back(static_cast<std::int32_t>(j));
    b.anchors.coords.push_back(centers[j]);
  }
  return b;
}

SkinningWeights dense_rows(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return SkinningWeights::from_dense(m);
}

}  // namespace

TEST_SUITE("skinning") {
  TEST_CASE("single bone gets every weight") {
    std::mt19937_64 rng(1);
    const BoneSet b = random_bones(rng, 1);
    std::vector<Vec3> v{{0, 0, 0}, {10, -3, 2}, {100, 100, 100}};
    const Eigen::MatrixXd w = raw_weights(v, b.bones, b.anchors);
    CHECK(w == Eigen::MatrixXd::Ones(3, 1));
  }

  TEST_CASE("identical bones split evenly") {
    std::mt19937_64 rng(2);
    BoneSet b = random_bones(rng, 1);
    b.bones.push_back(b.bones[0]);
    b.bones[1].anchor_index = 1;
    b.anchors.indices.push_back(1);
    b.anchors.coords.push_back(b.anchors.coords[0]);
    std::vector<Vec3> v;
    for (int i = 0; i < 20; ++i) {
      v.push_back(oracle::random_vec(rng, 4.0));
    }
    const Eigen::MatrixXd w = raw_weights(v, b.bones, b.anchors);
    CHECK((w.array() - 0.5).abs().maxCoeff() == 0.0);
  }

  TEST_CASE("two unit bones on a line") {
    const BoneSet b = simple_bones({{0, 0, 0}, {2, 0, 0}});
    const std::vector<Vec3> v{{0.5, 0, 0}};
    const Eigen::MatrixXd w = raw_weights(v, b.bones, b.anchors);
    const double e = std::exp(-1.0);
    CHECK(w(0, 0) == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-14));
    CHECK(w(0, 1) == doctest::Approx(e / (1.0 + e)).epsilon(1e-14));
    CHECK(w(0, 0) == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(half_mahalanobis_sq({0.5, 0, 0}, {0, 0, 0}, Mat3::Identity(), Vec3::Ones()) == 0.125);
  }

  TEST_CASE("raw weights match the closed-form Gaussian softmax") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
      const BoneSet b = random_bones(rng, 2 + trial % 4);
      const std::vector<Vec3> v{oracle::random_vec(rng, 1.5)};
      const Eigen::MatrixXd w = raw_weights(v, b.bones, b.anchors);
      const auto ref = oracle::gaussian_softmax(v[0], b.centers, b.scales, b.orientations);
      for (std::size_t k = 0; k < ref.size(); ++k) {
        CHECK(std::abs(w(0, static_cast<Eigen::Index>(k)) - ref[k]) < 1e-9);
      }
      CHECK(std::abs(w.row(0).sum() - 1.0) < 1e-9);
    }
  }

  TEST_CASE("far-away vertices stay finite") {
    const BoneSet b = simple_bones({{0, 0, 0}, {1, 0, 0}});
    const std::vector<Vec3> v{{1e4, 0, 0}};
    const Eigen::MatrixXd w = raw_weights(v, b.bones, b.anchors);
    CHECK(w.allFinite());
    CHECK(w(0, 1) == 1.0);
  }

  TEST_CASE("nonpositive scale is rejected") {
    BoneSet b = simple_bones({{0, 0, 0}});
    b.bones[0].scale = Vec3(1.0, 0.0, 1.0);
    const std::vector<Vec3> v{{0, 0, 0}};
    CHECK_THROWS_AS(raw_weights(v, b.bones, b.anchors), InvalidParameter);
  }

  TEST_CASE("raw weights are invariant under a shared rigid motion") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
      BoneSet b = random_bones(rng, 4);
      std::vector<Vec3> v;
      for (int i = 0; i < 10; ++i) {
        v.push_back(oracle::random_vec(rng, 1.5));
      }
      const RigidTransform g = oracle::random_transform(rng, 2.0);
      const Mat3 r = quat_to_rotmat(g.rotation);
      BoneSet moved = b;
      std::vector<Vec3> mv;
      for (const Vec3& p : v) {
        mv.push_back(apply(g, p));
      }
      for (std::size_t k = 0; k < 4; ++k) {
        moved.anchors.coords[k] = apply(g, b.anchors.coords[k]);
        moved.bones[k].delta_center = r * b.bones[k].delta_center;
        moved.bones[k].orientation = g.rotation * b.bones[k].orientation;
      }
      const Eigen::MatrixXd w0 = raw_weights(v, b.bones, b.anchors);
      const Eigen::MatrixXd w1 = raw_weights(mv, moved.bones, moved.anchors);
      CHECK((w0 - w1).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("largest weight belongs to the closest bone in Mahalanobis terms") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const BoneSet b = random_bones(rng, 5);
      const std::vector<Vec3> v{oracle::random_vec(rng, 1.5)};
      const Eigen::MatrixXd w = raw_weights(v, b.bones, b.anchors);
      Eigen::Index arg_w = 0;
      w.row(0).maxCoeff(&arg_w);
      std::size_t arg_d = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < 5; ++k) {
        const double d = half_mahalanobis_sq(v[0], b.centers[k], quat_to_rotmat(b.orientations[k]), b.scales[k]);
        if (d < best) {
          best = d;
          arg_d = k;
        }
      }
      CHECK(static_cast<std::size_t>(arg_w) == arg_d);
    }
  }

  TEST_CASE("refinement with a full mask only rescales by eps") {
    std::mt19937_64 rng(5);
    const BoneSet b = random_bones(rng, 3);
    std::vector<Vec3> v;
    for (int i = 0; i < 30; ++i) {
      v.push_back(oracle::random_vec(rng));
    }
    const Eigen::MatrixXd raw = raw_weights(v, b.bones, b.anchors);
    const CoherenceMask mask{MaskMatrix::Ones(30, 3), kUnreachable};
    const GeodesicField field{Eigen::MatrixXd::Zero(30, 3)};
    const Eigen::MatrixXd out = refine_weights(raw, mask, 1e-8, field).dense();
    CHECK((out - raw).cwiseAbs().maxCoeff() < 1e-7);
  }

  TEST_CASE("refinement drops masked bones") {
    Eigen::MatrixXd raw(1, 2);
    raw << 0.6, 0.4;
    CoherenceMask mask{MaskMatrix(1, 2), 1.0};
    mask.mask << 1, 0;
    const GeodesicField field{Eigen::MatrixXd::Zero(1, 2)};
    const Eigen::MatrixXd out = refine_weights(raw, mask, 1e-8, field).dense();
    CHECK(std::abs(out(0, 0) - 0.6 / (0.6 + 1e-8)) < 1e-15);
    CHECK(std::abs(out(0, 0) - 1.0) < 1e-7);
    CHECK(out(0, 1) == 0.0);
  }

  TEST_CASE("empty rows fall back to the geodesically nearest bone") {
    Eigen::MatrixXd raw(2, 3);
    raw << 0.5, 0.5, 0.0, 0.2, 0.3, 0.5;
    CoherenceMask mask{MaskMatrix::Zero(2, 3), 1.0};
    GeodesicField field{Eigen::MatrixXd(2, 3)};
    field.dist << 2.0, 1.0, 3.0, 1.0, 4.0, 1.0;
    const SkinningWeights w = refine_weights(raw, mask, 1e-8, field);
    CHECK(w.rows[0].size() == 1);
    CHECK(w.rows[0][0].bone == 1);
    CHECK(w.rows[0][0].value == 1.0);
    CHECK(w.rows[1][0].bone == 0);  // tie between bones 0 and 2
  }

  TEST_CASE("refinement matches the literal formula on random masks") {
    std::mt19937_64 rng(66);
    std::bernoulli_distribution keep(0.45);
    std::uniform_real_distribution<double> d(0.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t k = 2 + static_cast<std::size_t>(trial % 4);
      const BoneSet b = random_bones(rng, k);
      std::vector<Vec3> v;
      for (int i = 0; i < 12; ++i) {
        v.push_back(oracle::random_vec(rng));
      }
      const Eigen::MatrixXd raw = raw_weights(v, b.bones, b.anchors);
      CoherenceMask mask{MaskMatrix(12, static_cast<Eigen::Index>(k)), 1.0};
      GeodesicField field{Eigen::MatrixXd(12, static_cast<Eigen::Index>(k))};
      for (Eigen::Index i = 0; i < mask.mask.size(); ++i) {
        mask.mask.data()[i] = keep(rng) ? 1 : 0;
        field.dist.data()[i] = d(rng);
      }
      const Eigen::MatrixXd out = refine_weights(raw, mask, 1e-8, field).dense();
      CHECK((out - oracle::refined(raw, mask.mask, 1e-8, field.dist)).cwiseAbs().maxCoeff() < 1e-7);
      for (Eigen::Index i = 0; i < 12; ++i) {
        int support_raw = 0;
        int support_out = 0;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
          support_raw += raw(i, j) > 0.0;
          support_out += out(i, j) > 0.0;
        }
        CHECK(support_out <= support_raw);
      }
    }
  }

  TEST_CASE("sparsify keeps the largest entries and renormalizes") {
    const SkinningWeights w = sparsify_weights(dense_rows({{0.4, 0.3, 0.2, 0.1}}), 2);
    const Eigen::MatrixXd d = w.dense();
    CHECK(d(0, 0) == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
    CHECK(d(0, 1) == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
    CHECK(d(0, 2) == 0.0);
    CHECK(d(0, 3) == 0.0);

    const SkinningWeights tie = sparsify_weights(dense_rows({{0.25, 0.25, 0.25, 0.25}}), 2);
    CHECK(tie.rows[0].size() == 2);
    CHECK(tie.rows[0][0].bone == 0);
    CHECK(tie.rows[0][1].bone == 1);

    const SkinningWeights small = dense_rows({{0.5, 0.0, 0.5}});
    const SkinningWeights same = sparsify_weights(small, 2);
    CHECK((same.dense() - small.dense()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(sparsify_weights(small, 0), InvalidParameter);
    CHECK(kDefaultTopBones == 4);
  }

  TEST_CASE("full pipeline rows sum to one with bounded support") {
    std::mt19937_64 rng(90);
    const BoneSet b = random_bones(rng, 7);
    std::vector<Vec3> v;
    for (int i = 0; i < 50; ++i) {
      v.push_back(oracle::random_vec(rng));
    }
    CoherenceMask mask{MaskMatrix(50, 7), 1.0};
    GeodesicField field{Eigen::MatrixXd(50, 7)};
    std::bernoulli_distribution keep(0.5);
    for (Eigen::Index i = 0; i < mask.mask.size(); ++i) {
      mask.mask.data()[i] = keep(rng) ? 1 : 0;
      field.dist.data()[i] = static_cast<double>(i % 5);
    }
    const SkinningWeights w = compute_skinning_weights(v, b.bones, b.anchors, mask, field, 3);
    for (const auto& row : w.rows) {
      CHECK(row.size() <= 3);
      double s = 0.0;
      for (const auto& e : row) {
        CHECK(e.value >= 0.0);
        s += e.value;
      }
      CHECK(std::abs(s - 1.0) < 1e-6);
    }
  }

  TEST_CASE("LBS examples") {
    const std::vector<Vec3> rest{{0, 0, 0}, {1, 2, 3}, {-1, 0.5, 2}};
    const SkinningWeights half = dense_rows({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
    BoneTransforms id;
    id.local = {RigidTransform::identity(), RigidTransform::identity()};
    CHECK(lbs_deform(rest, half, id) == rest);

    BoneTransforms shift;
    shift.local = {RigidTransform::translate({1, 0, 0}), RigidTransform::translate({0, 1, 0})};
    const auto out = lbs_deform(rest, half, shift);
    for (std::size_t i = 0; i < rest.size(); ++i) {
      CHECK((out[i] - rest[i] - Vec3(0.5, 0.5, 0)).norm() < 1e-15);
    }

    const SkinningWeights one = dense_rows({{1.0}, {1.0}, {1.0}});
    BoneTransforms single;
    single.local = {RigidTransform::translate({0.25, -1, 2})};
    const auto moved = lbs_deform(rest, one, single);
    for (std::size_t i = 0; i < rest.size(); ++i) {
      CHECK((moved[i] - rest[i] - Vec3(0.25, -1, 2)).norm() < 1e-15);
    }
  }

  TEST_CASE("LBS rejects mismatched dimensions") {
    const std::vector<Vec3> rest{{0, 0, 0}, {1, 0, 0}};
    const SkinningWeights w = dense_rows({{1.0}});
    BoneTransforms t;
    t.local = {RigidTransform::identity()};
    CHECK_THROWS_AS(lbs_deform(rest, w, t), InvalidInput);
    const SkinningWeights w2 = dense_rows({{1.0}, {1.0}});
    t.local.push_back(RigidTransform::identity());
    CHECK_THROWS_AS(lbs_deform(rest, w2, t), InvalidInput);
  }

  TEST_CASE("LBS collapses a shared transform and matches the matrix blend") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t k = 1 + static_cast<std::size_t>(trial % 5);
      std::vector<Vec3> rest;
      std::vector<std::vector<double>> rows;
      for (int i = 0; i < 8; ++i) {
        rest.push_back(oracle::random_vec(rng, 2.0));
        std::vector<double> row(k);
        double s = 0.0;
        for (double& x : row) {
          x = u(rng);
          s += x;
        }
        for (double& x : row) {
          x /= s;
        }
        rows.push_back(row);
      }
      const SkinningWeights w = dense_rows(rows);
      BoneTransforms shared;
      shared.root = oracle::random_transform(rng);
      const RigidTransform local = oracle::random_transform(rng);
      shared.local.assign(k, local);
      const RigidTransform total = compose(shared.root, local);
      const auto a = lbs_deform(rest, w, shared);
      for (std::size_t i = 0; i < rest.size(); ++i) {
        CHECK((a[i] - apply(total, rest[i])).norm() < 1e-9);
      }

      BoneTransforms mixed;
      mixed.root = oracle::random_transform(rng);
      std::vector<Mat4> mats;
      for (std::size_t j = 0; j < k; ++j) {
        mixed.local.push_back(oracle::random_transform(rng));
        mats.push_back(oracle::homogeneous(oracle::rotation(mixed.root.rotation), mixed.root.translation) *
                       oracle::homogeneous(oracle::rotation(mixed.local[j].rotation), mixed.local[j].translation));
      }
      const auto b = lbs_deform(rest, w, mixed);
      for (std::size_t i = 0; i < rest.size(); ++i) {
        CHECK((b[i] - oracle::blend(rest[i], rows[i], mats)).norm() < 1e-9);
      }
    }
  }
}
