#include "rigfit/skinning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rigfit/error.hpp"

namespace rigfit {

Eigen::MatrixXd SkinningWeights::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(bone_count));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& e : rows[i]) {
      out(static_cast<Eigen::Index>(i), e.bone) = e.value;
    }
  }
  return out;
}

SkinningWeights SkinningWeights::from_dense(const Eigen::MatrixXd& dense) {
  SkinningWeights out;
  out.bone_count = static_cast<std::size_t>(dense.cols());
  out.rows.resize(static_cast<std::size_t>(dense.rows()));
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index k = 0; k < dense.cols(); ++k) {
      if (dense(i, k) != 0.0) {
        out.rows[static_cast<std::size_t>(i)].push_back({static_cast<std::int32_t>(k), dense(i, k)});
      }
    }
  }
  return out;
}

std::int32_t SkinningWeights::dominant_bone(std::size_t i) const {
  std::int32_t best = -1;
  double value = -1.0;
  for (const auto& e : rows[i]) {
    if (e.value > value || (e.value == value && e.bone < best)) {
      value = e.value;
      best = e.bone;
    }
  }
  return best;
}

double half_mahalanobis_sq(const Vec3& v, const Vec3& center, const Mat3& rotation, const Vec3& scale) {
  const Vec3 local = (rotation.transpose() * (v - center)).cwiseQuotient(scale);
  return 0.5 * local.squaredNorm();
}

std::vector<Vec3> bone_centers(std::span<const GaussianBone> bones, const AnchorSet& anchors) {
  if (bones.size() != anchors.size()) {
    throw InvalidInput("bone count " + std::to_string(bones.size()) + " does not match anchor count " +
                       std::to_string(anchors.size()));
  }
  std::vector<Vec3> centers(bones.size());
  for (std::size_t k = 0; k < bones.size(); ++k) {
    centers[k] = anchors.coords[k] + bones[k].delta_center;
  }
  return centers;
}

Eigen::MatrixXd raw_weights(std::span<const Vec3> vertices, std::span<const GaussianBone> bones,
                            const AnchorSet& anchors) {
  if (bones.empty()) {
    throw InvalidParameter("at least one bone is required");
  }
  for (const auto& b : bones) {
    if (!(b.scale.minCoeff() > 0.0)) {
      throw InvalidParameter("Gaussian bone scales must be positive");
    }
  }
  const std::vector<Vec3> centers = bone_centers(bones, anchors);
  std::vector<Mat3> rotations(bones.size());
  for (std::size_t k = 0; k < bones.size(); ++k) {
    rotations[k] = quat_to_rotmat(bones[k].orientation);
  }

  const auto n = static_cast<Eigen::Index>(vertices.size());
  const auto kc = static_cast<Eigen::Index>(bones.size());
  Eigen::MatrixXd w(n, kc);
  Eigen::VectorXd logits(kc);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < kc; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      logits(k) = -half_mahalanobis_sq(vertices[static_cast<std::size_t>(i)], centers[kk], rotations[kk], bones[kk].scale);
    }
    const double peak = logits.maxCoeff();
    const Eigen::VectorXd e = (logits.array() - peak).exp();
    w.row(i) = (e / e.sum()).transpose();
  }
  return w;
}

SkinningWeights refine_weights(const Eigen::MatrixXd& raw, const CoherenceMask& mask, double eps,
                               const GeodesicField& field) {
  if (raw.rows() != mask.mask.rows() || raw.cols() != mask.mask.cols() || raw.rows() != field.dist.rows() ||
      raw.cols() != field.dist.cols()) {
    throw InvalidInput("raw weights, mask and geodesic field shapes disagree");
  }
  if (!(eps > 0.0)) {
    throw InvalidParameter("refinement epsilon must be positive");
  }
  SkinningWeights out;
  out.bone_count = static_cast<std::size_t>(raw.cols());
  out.rows.resize(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    auto& row = out.rows[static_cast<std::size_t>(i)];
    double total = 0.0;
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      if (mask.mask(i, k) != 0) {
        total += raw(i, k);
      }
    }
    if (total == 0.0) {
      Eigen::Index nearest = 0;
      field.dist.row(i).minCoeff(&nearest);
      row.push_back({static_cast<std::int32_t>(nearest), 1.0});
      continue;
    }
    const double denom = total + eps;
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      if (mask.mask(i, k) != 0 && raw(i, k) != 0.0) {
        row.push_back({static_cast<std::int32_t>(k), raw(i, k) / denom});
      }
    }
  }
  return out;
}

SkinningWeights sparsify_weights(const SkinningWeights& weights, std::size_t top_k) {
  if (top_k < 1) {
    throw InvalidParameter("top-K_s must be at least 1");
  }
  SkinningWeights out;
  out.bone_count = weights.bone_count;
  out.rows.resize(weights.rows.size());
  for (std::size_t i = 0; i < weights.rows.size(); ++i) {
    std::vector<WeightEntry> row = weights.rows[i];
    if (row.size() > top_k) {
      std::stable_sort(row.begin(), row.end(), [](const WeightEntry& a, const WeightEntry& b) {
        return a.value > b.value || (a.value == b.value && a.bone < b.bone);
      });
      row.resize(top_k);
      std::sort(row.begin(), row.end(), [](const WeightEntry& a, const WeightEntry& b) { return a.bone < b.bone; });
    }
    double total = 0.0;
    for (const auto& e : row) {
      total += e.value;
    }
    if (total > 0.0) {
      for (auto& e : row) {
        e.value /= total;
      }
    }
    out.rows[i] = std::move(row);
  }
  return out;
}

SkinningWeights compute_skinning_weights(std::span<const Vec3> vertices, std::span<const GaussianBone> bones,
                                         const AnchorSet& anchors, const CoherenceMask& mask,
                                         const GeodesicField& field, std::size_t top_k) {
  return sparsify_weights(refine_weights(raw_weights(vertices, bones, anchors), mask, kRefineEpsilon, field), top_k);
}

std::vector<Vec3> lbs_deform(std::span<const Vec3> rest, const SkinningWeights& weights,
                             const BoneTransforms& transforms) {
  if (weights.rows.size() != rest.size()) {
    throw InvalidInput("weights have " + std::to_string(weights.rows.size()) + " rows for " +
                       std::to_string(rest.size()) + " vertices");
  }
  if (weights.bone_count != transforms.local.size()) {
    throw InvalidInput("weights reference " + std::to_string(weights.bone_count) + " bones but " +
                       std::to_string(transforms.local.size()) + " transforms were given");
  }
  std::vector<Mat3> rot(transforms.local.size());
  std::vector<Vec3> trans(transforms.local.size());
  for (std::size_t k = 0; k < transforms.local.size(); ++k) {
    const RigidTransform full = compose(transforms.root, transforms.local[k]);
    rot[k] = quat_to_rotmat(full.rotation);
    trans[k] = full.translation;
  }
  // Blended displacements; identical to sum_k w_ik T_k v_i when rows sum to 1,
  // and exact for identity transforms.
  std::vector<Vec3> out(rest.begin(), rest.end());
  for (std::size_t i = 0; i < rest.size(); ++i) {
    Vec3 offset = Vec3::Zero();
    for (const auto& e : weights.rows[i]) {
      const auto k = static_cast<std::size_t>(e.bone);
      offset += e.value * (rot[k] * rest[i] + trans[k] - rest[i]);
    }
    out[i] += offset;
  }
  return out;
}

}  // namespace rigfit
