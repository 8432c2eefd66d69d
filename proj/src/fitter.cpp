#include "rigfit/fitter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

namespace rigfit {

namespace {

constexpr std::size_t kFrameHeader = 7;
constexpr std::size_t kPerBoneMotion = 7;

std::size_t frame_block(std::size_t bones) { return kFrameHeader + kPerBoneMotion * bones; }

void put_quat(Eigen::VectorXd& x, std::size_t at, const Quat& q) {
  const auto i = static_cast<Eigen::Index>(at);
  x(i) = q.w;
  x(i + 1) = q.x;
  x(i + 2) = q.y;
  x(i + 3) = q.z;
}

Quat get_quat(const Eigen::VectorXd& x, std::size_t at) {
  const auto i = static_cast<Eigen::Index>(at);
  return {x(i), x(i + 1), x(i + 2), x(i + 3)};
}

void put_vec(Eigen::VectorXd& x, std::size_t at, const Vec3& v) { x.segment<3>(static_cast<Eigen::Index>(at)) = v; }

Vec3 get_vec(const Eigen::VectorXd& x, std::size_t at) { return x.segment<3>(static_cast<Eigen::Index>(at)); }

// Gradient of a loss with respect to the raw 4-vector q, given dL/dR for
// R = quat_to_rotmat(q) (q normalized internally).
Eigen::Vector4d quat_gradient(const Quat& raw, const Mat3& g) {
  const double n = raw.norm();
  const Quat q{raw.w / n, raw.x / n, raw.y / n, raw.z / n};
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Eigen::Vector4d d;
  d(0) = 2 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) + x * g(2, 1));
  d(1) = 2 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2 * x * g(1, 1) - w * g(1, 2) + z * g(2, 0) +
              w * g(2, 1) - 2 * x * g(2, 2));
  d(2) = 2 * (-2 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2) - w * g(2, 0) +
              z * g(2, 1) - 2 * y * g(2, 2));
  d(3) = 2 * (-2 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) - 2 * z * g(1, 1) + y * g(1, 2) +
              x * g(2, 0) + y * g(2, 1));
  const Eigen::Vector4d unit(w, x, y, z);
  return (d - unit * unit.dot(d)) / n;
}

void check_motion_shape(const MotionParams& motion, std::size_t bones, std::size_t frames) {
  if (motion.frames.size() != frames) {
    throw InvalidInput("motion has " + std::to_string(motion.frames.size()) + " frames, expected " +
                       std::to_string(frames));
  }
  for (const auto& f : motion.frames) {
    if (f.local_rotation.size() != bones || f.local_translation.size() != bones) {
      throw InvalidInput("motion frame bone count does not match the rig");
    }
  }
}

Frames target_frames(const MeshSequence& seq) { return Frames(seq.frames.begin() + 1, seq.frames.end()); }

void normalize_quats(RigParams& rig, MotionParams& motion, bool freeze_rig) {
  if (!freeze_rig) {
    for (auto& q : rig.orientation) {
      q = q.normalized();
    }
  }
  for (auto& f : motion.frames) {
    f.root_rotation = f.root_rotation.normalized();
    for (auto& q : f.local_rotation) {
      q = q.normalized();
    }
  }
}

void validate_config(const FitConfig& cfg) {
  if (cfg.iterations < 1) {
    throw InvalidParameter("iterations must be at least 1");
  }
  if (!(cfg.lr_rig > 0.0) || !(cfg.lr_motion > 0.0)) {
    throw InvalidParameter("learning rates must be positive");
  }
  if (cfg.top_k < 1) {
    throw InvalidParameter("top-K_s must be at least 1");
  }
  if (cfg.log_every < 1) {
    throw InvalidParameter("log cadence must be at least 1");
  }
}

// Adam over the packed parameters; leaves the optimized state in rig/motion.
FitReport optimize(RigParams& rig, MotionParams& motion, const MeshSequence& seq, const GeodesicField& field,
                   const FitConfig& cfg, bool freeze_rig) {
  const auto start = std::chrono::steady_clock::now();
  FitReport report;
  report.config = cfg;
  report.tau = rig.tau;

  Eigen::VectorXd x = pack(rig, motion);
  const auto rig_size = static_cast<Eigen::Index>(rig_param_count(rig.bone_count()));
  Eigen::VectorXd lr(x.size());
  lr.head(rig_size).setConstant(freeze_rig ? 0.0 : cfg.lr_rig);
  lr.tail(x.size() - rig_size).setConstant(cfg.lr_motion);

  Adam adam(static_cast<std::size_t>(x.size()), cfg.beta1, cfg.beta2, cfg.adam_eps);
  RigParams last_rig = rig;
  MotionParams last_motion = motion;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    LossGradient lg = loss_gradient(rig, motion, seq, field, freeze_rig);
    if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
      throw FitDiverged("loss became non-finite at iteration " + std::to_string(it), last_rig, last_motion, it);
    }
    if (it % cfg.log_every == 0) {
      report.loss_history.push_back(lg.loss);
      report.logged_iterations.push_back(it);
    }
    if (cfg.grad_clip > 0.0) {
      const double norm = lg.gradient.norm();
      if (norm > cfg.grad_clip) {
        lg.gradient *= cfg.grad_clip / norm;
      }
    }
    last_rig = rig;
    last_motion = motion;
    adam.step(x, lg.gradient, lr);
    if (freeze_rig) {
      RigParams scratch = rig;
      unpack(x, scratch, motion);
    } else {
      unpack(x, rig, motion);
    }
  }

  normalize_quats(rig, motion, freeze_rig);
  const Frames pred = forward(rig, motion, seq.frames.front(), field);
  const Frames target = target_frames(seq);
  report.final_loss = recon_loss(pred, target);
  if (!std::isfinite(report.final_loss)) {
    throw FitDiverged("final loss is non-finite", last_rig, last_motion, cfg.iterations);
  }
  report.loss_history.push_back(report.final_loss);
  report.logged_iterations.push_back(cfg.iterations);
  report.frame_mse = per_frame_mse(pred, target);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace

std::vector<GaussianBone> RigParams::bones() const {
  std::vector<GaussianBone> out(bone_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].anchor_index = anchors.indices[k];
    out[k].delta_center = delta_center[k];
    out[k].scale = log_scale[k].array().exp().matrix();
    out[k].orientation = orientation[k];
  }
  return out;
}

std::vector<Vec3> RigParams::centers() const {
  std::vector<Vec3> out(bone_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = anchors.coords[k] + delta_center[k];
  }
  return out;
}

RigParams RigParams::reanchored(std::span<const Vec3> vertices) const {
  RigParams out = *this;
  out.anchors = make_anchor_set(vertices, anchors.indices);
  return out;
}

MotionParams MotionParams::identity(std::size_t bones, std::size_t frames) {
  MotionParams m;
  m.frames.resize(frames);
  for (auto& f : m.frames) {
    f.local_rotation.assign(bones, Quat::identity());
    f.local_translation.assign(bones, Vec3::Zero());
  }
  return m;
}

std::vector<BoneTransforms> to_bone_transforms(const MotionParams& motion, std::span<const Vec3> centers) {
  std::vector<BoneTransforms> out(motion.frames.size());
  for (std::size_t f = 0; f < motion.frames.size(); ++f) {
    const FrameMotion& fm = motion.frames[f];
    if (fm.local_rotation.size() != centers.size()) {
      throw InvalidInput("motion frame bone count does not match the rig");
    }
    BoneTransforms& bt = out[f];
    bt.frame_index = static_cast<std::int32_t>(f + 1);
    bt.root = {fm.root_rotation.normalized(), fm.root_translation};
    bt.local.resize(centers.size());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Quat q = fm.local_rotation[k].normalized();
      bt.local[k] = {q, quat_to_rotmat(q) * (fm.local_translation[k] - centers[k]) + centers[k]};
    }
  }
  return out;
}

double recon_loss(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw InvalidInput("prediction and target frame counts differ or are empty");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].size() != target[t].size()) {
      throw InvalidInput("frame " + std::to_string(t) + " vertex counts differ");
    }
    for (std::size_t i = 0; i < pred[t].size(); ++i) {
      total += (pred[t][i] - target[t][i]).squaredNorm();
    }
    count += pred[t].size();
  }
  if (count == 0) {
    throw InvalidInput("no vertices to compare");
  }
  return total / static_cast<double>(count);
}

std::vector<double> per_frame_mse(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> target) {
  std::vector<double> out;
  out.reserve(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    out.push_back(recon_loss(pred.subspan(t, 1), target.subspan(t, 1)));
  }
  return out;
}

SkinningWeights rig_weights(const RigParams& rig, std::span<const Vec3> canonical, const GeodesicField& field) {
  CoherenceMask mask;
  if (rig.geodesic_refinement) {
    mask = coherence_mask(field, rig.tau);
  } else {
    mask.tau = kUnreachable;
    mask.mask = MaskMatrix::Ones(field.dist.rows(), field.dist.cols());
  }
  return compute_skinning_weights(canonical, rig.bones(), rig.anchors, mask, field, rig.top_k);
}

Frames forward(const RigParams& rig, const MotionParams& motion, std::span<const Vec3> canonical,
               const GeodesicField& field) {
  const SkinningWeights weights = rig_weights(rig, canonical, field);
  const auto transforms = to_bone_transforms(motion, rig.centers());
  Frames out;
  out.reserve(transforms.size());
  for (const auto& bt : transforms) {
    out.push_back(lbs_deform(canonical, weights, bt));
  }
  return out;
}

std::size_t rig_param_count(std::size_t bones) { return kRigParamsPerBone * bones; }

Eigen::VectorXd pack(const RigParams& rig, const MotionParams& motion) {
  const std::size_t k = rig.bone_count();
  Eigen::VectorXd x(static_cast<Eigen::Index>(rig_param_count(k) + motion.frames.size() * frame_block(k)));
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t at = b * kRigParamsPerBone;
    put_vec(x, at, rig.delta_center[b]);
    put_vec(x, at + 3, rig.log_scale[b]);
    put_quat(x, at + 6, rig.orientation[b]);
  }
  for (std::size_t f = 0; f < motion.frames.size(); ++f) {
    const FrameMotion& fm = motion.frames[f];
    const std::size_t base = rig_param_count(k) + f * frame_block(k);
    put_quat(x, base, fm.root_rotation);
    put_vec(x, base + 4, fm.root_translation);
    for (std::size_t b = 0; b < k; ++b) {
      const std::size_t at = base + kFrameHeader + b * kPerBoneMotion;
      put_quat(x, at, fm.local_rotation[b]);
      put_vec(x, at + 4, fm.local_translation[b]);
    }
  }
  return x;
}

void unpack(const Eigen::VectorXd& x, RigParams& rig, MotionParams& motion) {
  const std::size_t k = rig.bone_count();
  if (static_cast<std::size_t>(x.size()) != rig_param_count(k) + motion.frames.size() * frame_block(k)) {
    throw InvalidInput("parameter vector size does not match rig and motion");
  }
  rig.delta_center.resize(k);
  rig.log_scale.resize(k);
  rig.orientation.resize(k);
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t at = b * kRigParamsPerBone;
    rig.delta_center[b] = get_vec(x, at);
    rig.log_scale[b] = get_vec(x, at + 3);
    rig.orientation[b] = get_quat(x, at + 6);
  }
  for (std::size_t f = 0; f < motion.frames.size(); ++f) {
    FrameMotion& fm = motion.frames[f];
    const std::size_t base = rig_param_count(k) + f * frame_block(k);
    fm.root_rotation = get_quat(x, base);
    fm.root_translation = get_vec(x, base + 4);
    fm.local_rotation.resize(k);
    fm.local_translation.resize(k);
    for (std::size_t b = 0; b < k; ++b) {
      const std::size_t at = base + kFrameHeader + b * kPerBoneMotion;
      fm.local_rotation[b] = get_quat(x, at);
      fm.local_translation[b] = get_vec(x, at + 4);
    }
  }
}

LossGradient loss_gradient(const RigParams& rig, const MotionParams& motion, const MeshSequence& seq,
                           const GeodesicField& field, bool freeze_rig) {
  const std::vector<Vec3>& canon = seq.frames.front();
  const std::size_t n = canon.size();
  const std::size_t kc = rig.bone_count();
  const std::size_t frames = seq.frames.size() - 1;
  check_motion_shape(motion, kc, frames);
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    if (seq.frames[t].size() != n) {
      throw InvalidInput("sequence frames have inconsistent vertex counts");
    }
  }

  const SkinningWeights weights = rig_weights(rig, canon, field);
  const std::vector<Vec3> centers = rig.centers();

  LossGradient out;
  out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rig_param_count(kc) + frames * frame_block(kc)));

  // dL/dw_ik accumulated over frames, aligned with weights.rows[i].
  std::vector<std::vector<double>> weight_grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    weight_grad[i].assign(weights.rows[i].size(), 0.0);
  }
  std::vector<Vec3> pivot_grad(kc, Vec3::Zero());

  const double inv_count = 1.0 / (static_cast<double>(frames) * static_cast<double>(n));
  double loss = 0.0;

  std::vector<Mat3> local_rot(kc);
  std::vector<Vec3> local_offset(kc);
  std::vector<Mat3> full_rot(kc);
  std::vector<Vec3> full_trans(kc);
  std::vector<Vec3> h_sum(kc);
  std::vector<Mat3> hu_sum(kc);
  std::vector<Vec3> bone_local;

  for (std::size_t f = 0; f < frames; ++f) {
    const FrameMotion& fm = motion.frames[f];
    const std::vector<Vec3>& target = seq.frames[f + 1];
    const Mat3 root_rot = quat_to_rotmat(fm.root_rotation);
    const Vec3& root_trans = fm.root_translation;
    for (std::size_t k = 0; k < kc; ++k) {
      local_rot[k] = quat_to_rotmat(fm.local_rotation[k]);
      local_offset[k] = local_rot[k] * (fm.local_translation[k] - centers[k]) + centers[k];
      full_rot[k] = root_rot * local_rot[k];
      full_trans[k] = root_rot * local_offset[k] + root_trans;
      h_sum[k].setZero();
      hu_sum[k].setZero();
    }
    Mat3 root_rot_grad = Mat3::Zero();
    Vec3 root_trans_grad = Vec3::Zero();

    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& v = canon[i];
      const auto& row = weights.rows[i];
      Vec3 offset = Vec3::Zero();
      Vec3 blended_local = Vec3::Zero();
      double weight_sum = 0.0;
      bone_local.resize(row.size());
      for (std::size_t e = 0; e < row.size(); ++e) {
        const auto k = static_cast<std::size_t>(row[e].bone);
        bone_local[e] = local_rot[k] * v + local_offset[k];
        offset += row[e].value * (full_rot[k] * v + full_trans[k] - v);
        blended_local += row[e].value * bone_local[e];
        weight_sum += row[e].value;
      }
      const Vec3 residual = v + offset - target[i];
      loss += residual.squaredNorm();
      const Vec3 g = (2.0 * inv_count) * residual;

      root_trans_grad += weight_sum * g;
      root_rot_grad += g * blended_local.transpose();
      for (std::size_t e = 0; e < row.size(); ++e) {
        const auto k = static_cast<std::size_t>(row[e].bone);
        weight_grad[i][e] += g.dot(root_rot * bone_local[e] + root_trans - v);
        const Vec3 wg = row[e].value * g;
        h_sum[k] += wg;
        hu_sum[k] += wg * (v + fm.local_translation[k] - centers[k]).transpose();
      }
    }

    const std::size_t base = rig_param_count(kc) + f * frame_block(kc);
    const auto b = static_cast<Eigen::Index>(base);
    out.gradient.segment<4>(b) = quat_gradient(fm.root_rotation, root_rot_grad);
    out.gradient.segment<3>(b + 4) = root_trans_grad;
    for (std::size_t k = 0; k < kc; ++k) {
      const Vec3 h = root_rot.transpose() * h_sum[k];
      const Mat3 rot_grad = root_rot.transpose() * hu_sum[k];
      const Vec3 trans_grad = local_rot[k].transpose() * h;
      const auto at = static_cast<Eigen::Index>(base + kFrameHeader + k * kPerBoneMotion);
      out.gradient.segment<4>(at) = quat_gradient(fm.local_rotation[k], rot_grad);
      out.gradient.segment<3>(at + 4) = trans_grad;
      pivot_grad[k] += h - trans_grad;
    }
  }
  out.loss = loss * inv_count;

  if (freeze_rig) {
    return out;
  }

  const std::vector<GaussianBone> bones = rig.bones();
  std::vector<Mat3> bone_rot(kc);
  for (std::size_t k = 0; k < kc; ++k) {
    bone_rot[k] = quat_to_rotmat(bones[k].orientation);
  }
  std::vector<Vec3> center_grad = pivot_grad;
  std::vector<Vec3> log_scale_grad(kc, Vec3::Zero());
  std::vector<Mat3> orient_grad(kc, Mat3::Zero());

  // Final weights are a softmax of the logits restricted to each row's
  // support, so dL/dl_ij = w_ij (dL/dw_ij - sum_k w_ik dL/dw_ik).
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = weights.rows[i];
    if (row.size() < 2) {
      continue;
    }
    double mean = 0.0;
    for (std::size_t e = 0; e < row.size(); ++e) {
      mean += row[e].value * weight_grad[i][e];
    }
    for (std::size_t e = 0; e < row.size(); ++e) {
      const double gamma = row[e].value * (weight_grad[i][e] - mean);
      const auto k = static_cast<std::size_t>(row[e].bone);
      const Vec3 r = canon[i] - centers[k];
      const Vec3 local = (bone_rot[k].transpose() * r).cwiseQuotient(bones[k].scale);
      const Vec3 scaled = local.cwiseQuotient(bones[k].scale);
      center_grad[k] += gamma * (bone_rot[k] * scaled);
      log_scale_grad[k] += gamma * local.cwiseProduct(local);
      orient_grad[k] -= gamma * r * scaled.transpose();
    }
  }
  for (std::size_t k = 0; k < kc; ++k) {
    const auto at = static_cast<Eigen::Index>(k * kRigParamsPerBone);
    out.gradient.segment<3>(at) = center_grad[k];
    out.gradient.segment<3>(at + 3) = log_scale_grad[k];
    out.gradient.segment<4>(at + 6) = quat_gradient(rig.orientation[k], orient_grad[k]);
  }
  return out;
}

Adam::Adam(std::size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void Adam::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads, const Eigen::VectorXd& lr) {
  if (params.size() != m_.size() || grads.size() != m_.size() || lr.size() != m_.size()) {
    throw InvalidInput("Adam state, parameter and gradient sizes differ");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    m_(i) = beta1_ * m_(i) + (1.0 - beta1_) * grads(i);
    v_(i) = beta2_ * v_(i) + (1.0 - beta2_) * grads(i) * grads(i);
    if (lr(i) == 0.0) {
      continue;
    }
    const double m_hat = m_(i) / c1;
    const double v_hat = v_(i) / c2;
    params(i) -= lr(i) * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

void Adam::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads, double lr) {
  step(params, grads, Eigen::VectorXd::Constant(params.size(), lr));
}

RigParams initial_rig(std::span<const Vec3> canonical, const FitConfig& cfg, double tau) {
  if (cfg.bones < 1 || cfg.bones > canonical.size()) {
    throw InvalidParameter("bone count must satisfy 1 <= K <= N (K=" + std::to_string(cfg.bones) +
                           ", N=" + std::to_string(canonical.size()) + ")");
  }
  RigParams rig;
  rig.anchors = make_anchor_set(canonical, farthest_point_indices(canonical, cfg.bones));
  rig.tau = tau;
  rig.top_k = cfg.top_k;
  rig.geodesic_refinement = cfg.geodesic_refinement;

  const std::size_t k = cfg.bones;
  double spacing = 0.0;
  if (k > 1) {
    for (std::size_t a = 0; a < k; ++a) {
      double nearest = kUnreachable;
      for (std::size_t b = 0; b < k; ++b) {
        if (a != b) {
          nearest = std::min(nearest, (rig.anchors.coords[a] - rig.anchors.coords[b]).norm());
        }
      }
      spacing += nearest;
    }
    spacing /= static_cast<double>(k);
  } else {
    spacing = 0.5 * bbox_diagonal(canonical);
  }
  if (!(spacing > 0.0)) {
    spacing = 1.0;
  }

  rig.delta_center.assign(k, Vec3::Zero());
  rig.log_scale.assign(k, Vec3::Constant(std::log(spacing)));
  rig.orientation.assign(k, Quat::identity());
  if (cfg.init_jitter > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, cfg.init_jitter * spacing);
    for (auto& dc : rig.delta_center) {
      dc = Vec3(normal(rng), normal(rng), normal(rng));
    }
  }
  return rig;
}

GeodesicField anchor_field(const MeshSequence& seq, std::span<const std::int32_t> anchors,
                           const std::optional<WeightedGraph>& graph) {
  if (graph) {
    if (graph->node_count() != seq.vertex_count()) {
      throw InvalidInput("geodesic graph node count does not match the sequence");
    }
    return geodesic_distances(*graph, anchors);
  }
  return geodesic_distances(edge_graph(seq.canonical()), anchors);
}

FitResult fit_rig_and_motion(const MeshSequence& seq, const FitConfig& cfg, const std::optional<WeightedGraph>& graph) {
  seq.validate();
  validate_config(cfg);
  const std::vector<Vec3>& canon = seq.frames.front();
  const double tau = cfg.tau.value_or(cfg.tau_fraction * bbox_diagonal(canon));
  if (!(tau > 0.0)) {
    throw InvalidParameter("coherence radius tau must be positive");
  }

  FitResult result;
  result.rig = initial_rig(canon, cfg, tau);
  result.motion = MotionParams::identity(cfg.bones, seq.frame_count() - 1);
  const GeodesicField field = anchor_field(seq, result.rig.anchors.indices, graph);
  result.report = optimize(result.rig, result.motion, seq, field, cfg, false);
  result.weights = rig_weights(result.rig, canon, field);
  return result;
}

MotionFitResult fit_motion_only(const RigParams& rig, std::size_t expected_vertices, const MeshSequence& seq,
                                const FitConfig& cfg, const std::optional<WeightedGraph>& graph) {
  seq.validate();
  validate_config(cfg);
  if (expected_vertices != seq.vertex_count()) {
    throw InvalidInput("rig weights cover " + std::to_string(expected_vertices) + " vertices but the sequence has " +
                       std::to_string(seq.vertex_count()));
  }
  RigParams frozen = rig.reanchored(seq.frames.front());
  const GeodesicField field = anchor_field(seq, frozen.anchors.indices, graph);

  MotionFitResult result;
  result.motion = MotionParams::identity(frozen.bone_count(), seq.frame_count() - 1);
  result.report = optimize(frozen, result.motion, seq, field, cfg, true);
  result.weights = rig_weights(frozen, seq.frames.front(), field);
  return result;
}

}  // namespace rigfit
