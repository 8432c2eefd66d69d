#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rigfit/error.hpp"
#include "rigfit/geodesic.hpp"
#include "rigfit/geom.hpp"
#include "rigfit/sampling.hpp"
#include "rigfit/skinning.hpp"

namespace rigfit {

using Frames = std::vector<std::vector<Vec3>>;

/// Optimizable Gaussian-bone rig. Scales live in log space and orientations
/// are raw 4-vectors normalized on use; anchors never move during a fit.
struct RigParams {
  AnchorSet anchors;
  std::vector<Vec3> delta_center;
  std::vector<Vec3> log_scale;
  std::vector<Quat> orientation;
  double tau = kUnreachable;
  std::size_t top_k = kDefaultTopBones;
  /// When false the coherence mask is all ones (no geodesic refinement).
  bool geodesic_refinement = true;

  std::size_t bone_count() const { return anchors.size(); }
  std::vector<GaussianBone> bones() const;
  std::vector<Vec3> centers() const;
  /// Same bones re-anchored on another vertex array (same indices).
  RigParams reanchored(std::span<const Vec3> vertices) const;
};

/// Per-frame motion in pivot form: bone k rotates about its effective centre,
/// v -> R_k (v + t_k - c_k) + c_k, and the root applies afterwards.
struct FrameMotion {
  Quat root_rotation;
  Vec3 root_translation = Vec3::Zero();
  std::vector<Quat> local_rotation;
  std::vector<Vec3> local_translation;
};

/// Frames 1..T-1; frame 0 is the identity by construction.
struct MotionParams {
  std::vector<FrameMotion> frames;

  static MotionParams identity(std::size_t bones, std::size_t frames);
  std::size_t frame_count() const { return frames.size(); }
};

/// Collapses pivot-form motion into plain root/local rigid transforms.
std::vector<BoneTransforms> to_bone_transforms(const MotionParams& motion, std::span<const Vec3> centers);

struct FitConfig {
  std::size_t bones = 48;
  std::size_t iterations = 2000;
  double lr_rig = 1e-3;
  double lr_motion = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Absolute coherence radius; when unset, tau_fraction * bbox diagonal.
  std::optional<double> tau;
  double tau_fraction = kDefaultTauFraction;
  std::size_t top_k = kDefaultTopBones;
  bool geodesic_refinement = true;
  /// Global gradient-norm clip; <= 0 disables clipping.
  double grad_clip = 1.0;
  std::uint64_t seed = 0;
  /// Std-dev of the seeded initial centre perturbation, relative to the
  /// initial bone scale. Zero gives a seed-independent start.
  double init_jitter = 0.0;
  std::size_t log_every = 1;
};

struct FitReport {
  double final_loss = 0.0;
  std::vector<double> loss_history;
  std::vector<std::size_t> logged_iterations;
  double wall_seconds = 0.0;
  std::vector<double> frame_mse;
  double tau = 0.0;
  FitConfig config;
};

/// Mean over frames and vertices of the squared vertex error.
/// Throws InvalidInput on a shape mismatch.
double recon_loss(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> target);

/// Per-frame mean squared vertex error.
std::vector<double> per_frame_mse(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> target);

/// Weights of the current rig: raw -> mask -> renormalize -> top-K_s.
SkinningWeights rig_weights(const RigParams& rig, std::span<const Vec3> canonical, const GeodesicField& field);

/// Predicted frames 1..T-1.
Frames forward(const RigParams& rig, const MotionParams& motion, std::span<const Vec3> canonical,
               const GeodesicField& field);

/// Flat parameter vector: per bone [delta_center(3), log_scale(3), q(4)],
/// then per frame [root q(4), root t(3), per bone (q(4), t(3))].
Eigen::VectorXd pack(const RigParams& rig, const MotionParams& motion);
void unpack(const Eigen::VectorXd& x, RigParams& rig, MotionParams& motion);
inline constexpr std::size_t kRigParamsPerBone = 10;
std::size_t rig_param_count(std::size_t bones);

struct LossGradient {
  double loss = 0.0;
  /// Same layout as pack(); rig entries are zero when the rig is frozen.
  Eigen::VectorXd gradient;
};

/// Exact gradient of recon_loss(forward(...), frames 1..T-1). The mask, the
/// top-K_s support and fallback rows are held fixed at their current values.
LossGradient loss_gradient(const RigParams& rig, const MotionParams& motion, const MeshSequence& seq,
                           const GeodesicField& field, bool freeze_rig);

/// Bias-corrected Adam with per-parameter learning rates.
class Adam {
public:
  Adam(std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads, const Eigen::VectorXd& lr);
  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads, double lr);

  std::size_t steps() const { return t_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }

private:
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

/// Raised when the loss becomes non-finite; carries the last finite state.
class FitDiverged : public Error {
public:
  FitDiverged(const std::string& what, RigParams rig, MotionParams motion, std::size_t iteration)
      : Error(what), rig(std::move(rig)), motion(std::move(motion)), iteration(iteration) {}

  RigParams rig;
  MotionParams motion;
  std::size_t iteration;
};

/// FPS anchors, zero centre offsets, isotropic scale equal to the mean
/// nearest-anchor distance, identity orientations.
RigParams initial_rig(std::span<const Vec3> canonical, const FitConfig& cfg, double tau);

struct FitResult {
  RigParams rig;
  MotionParams motion;
  SkinningWeights weights;
  FitReport report;
};

/// Joint rig + motion fit. `graph` overrides the canonical edge graph used for
/// geodesics (e.g. the proxy graph of a resampled mesh).
FitResult fit_rig_and_motion(const MeshSequence& seq, const FitConfig& cfg,
                             const std::optional<WeightedGraph>& graph = std::nullopt);

struct MotionFitResult {
  MotionParams motion;
  SkinningWeights weights;
  FitReport report;
};

/// Transfer mode: the rig is frozen and only per-frame transforms are fit.
/// The geodesic field is recomputed on seq's frame 0 from the same anchor
/// indices. Throws InvalidInput when `expected_vertices` differs from seq's N.
MotionFitResult fit_motion_only(const RigParams& rig, std::size_t expected_vertices, const MeshSequence& seq,
                                const FitConfig& cfg, const std::optional<WeightedGraph>& graph = std::nullopt);

/// Geodesic field from the rig's anchor indices on a sequence's canonical frame.
GeodesicField anchor_field(const MeshSequence& seq, std::span<const std::int32_t> anchors,
                           const std::optional<WeightedGraph>& graph = std::nullopt);

}  // namespace rigfit
