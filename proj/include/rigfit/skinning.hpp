#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rigfit/geodesic.hpp"
#include "rigfit/geom.hpp"
#include "rigfit/sampling.hpp"

namespace rigfit {

/// A soft bone: an anisotropic Gaussian ellipsoid centred at
/// anchor + delta_center, with per-axis scale and orientation.
struct GaussianBone {
  std::int32_t anchor_index = 0;
  Vec3 delta_center = Vec3::Zero();
  Vec3 scale = Vec3::Ones();
  Quat orientation;
};

struct WeightEntry {
  std::int32_t bone;
  double value;
};

/// Row-sparse N x K vertex-to-bone weights. Entries within a row are sorted by
/// bone index.
struct SkinningWeights {
  std::size_t bone_count = 0;
  std::vector<std::vector<WeightEntry>> rows;

  std::size_t vertex_count() const { return rows.size(); }
  Eigen::MatrixXd dense() const;
  static SkinningWeights from_dense(const Eigen::MatrixXd& dense);
  /// Bone with the largest weight in row i (lowest index on ties).
  std::int32_t dominant_bone(std::size_t i) const;
};

struct BoneTransforms {
  RigidTransform root;
  std::vector<RigidTransform> local;
  std::int32_t frame_index = 0;
};

/// Half the squared Mahalanobis distance of v to a Gaussian bone with the given
/// centre, rotation matrix and scale.
double half_mahalanobis_sq(const Vec3& v, const Vec3& center, const Mat3& rotation, const Vec3& scale);

/// Effective centres anchor + delta_center. Sizes of bones and anchors must match.
std::vector<Vec3> bone_centers(std::span<const GaussianBone> bones, const AnchorSet& anchors);

/// Dense softmax over bones of -1/2 squared Mahalanobis distance.
/// Throws InvalidParameter on a nonpositive scale or an empty bone list.
Eigen::MatrixXd raw_weights(std::span<const Vec3> vertices, std::span<const GaussianBone> bones,
                            const AnchorSet& anchors);

inline constexpr double kRefineEpsilon = 1e-8;
inline constexpr std::size_t kDefaultTopBones = 4;

/// Masks raw weights, renormalizes with eps in the denominator, and gives rows
/// with no surviving bone a one-hot on the geodesically nearest anchor.
SkinningWeights refine_weights(const Eigen::MatrixXd& raw, const CoherenceMask& mask, double eps,
                               const GeodesicField& field);

/// Keeps the top_k largest entries of each row (lower bone wins ties) and
/// renormalizes the row to sum 1.
SkinningWeights sparsify_weights(const SkinningWeights& weights, std::size_t top_k);

/// raw -> mask -> renormalize -> top-K_s -> renormalize.
SkinningWeights compute_skinning_weights(std::span<const Vec3> vertices, std::span<const GaussianBone> bones,
                                         const AnchorSet& anchors, const CoherenceMask& mask,
                                         const GeodesicField& field, std::size_t top_k);

/// v_i' = sum_k w_ik * (root o local_k)(v_i).
std::vector<Vec3> lbs_deform(std::span<const Vec3> rest, const SkinningWeights& weights,
                             const BoneTransforms& transforms);

}  // namespace rigfit
