#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rigfit/fitter.hpp"
#include "rigfit/geom.hpp"

namespace rigfit {

/// Exact nearest-neighbour index over a fixed point set (k-d tree).
class KdTree {
public:
  explicit KdTree(std::span<const Vec3> points);

  /// Squared distance to the nearest stored point. The tree must be non-empty.
  double nearest_sq(const Vec3& query) const;

  std::size_t size() const { return points_.size(); }

private:
  struct Node {
    std::int32_t point;
    std::int32_t left;
    std::int32_t right;
    std::int8_t axis;
  };

  std::int32_t build(std::span<std::int32_t> ids, int depth);
  void search(std::int32_t node, const Vec3& q, double& best) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

/// 1/2 (mean_a min_b |a-b| + mean_b min_a |a-b|). Throws InvalidInput on an empty set.
double chamfer_l1(std::span<const Vec3> a, std::span<const Vec3> b);
/// Same with squared distances.
double chamfer_l2(std::span<const Vec3> a, std::span<const Vec3> b);

/// Identical to recon_loss.
double vertex_mse(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> target);

struct SequenceMetrics {
  std::vector<double> cd_l1;
  std::vector<double> cd_l2;
  std::vector<double> mse;
  double mean_cd_l1 = 0.0;
  double mean_cd_l2 = 0.0;
  double mean_mse = 0.0;
};

/// Per-frame metrics and their means over the given frames.
SequenceMetrics evaluate_frames(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> target);

struct MeanStd {
  double mean = 0.0;
  /// Sample standard deviation (n - 1); zero for a single sample.
  double stddev = 0.0;
};

MeanStd mean_std(std::span<const double> values);

struct SplitResult {
  std::uint64_t seed = 0;
  SequenceMetrics train;
  SequenceMetrics transfer;
  double train_fit_loss = 0.0;
  double transfer_fit_loss = 0.0;
};

struct EvalReport {
  /// Set for plain prediction-vs-target evaluation.
  std::optional<SequenceMetrics> sequence;
  std::vector<SplitResult> splits;
  /// Keys like "train.cd_l1", "transfer.mse".
  std::map<std::string, MeanStd> aggregates;
  std::optional<FitConfig> config;
};

inline constexpr std::size_t kDefaultSplits = 100;

/// Per split (seed = cfg.seed + split): fit rig and motion on train, evaluate
/// its reconstruction, freeze the rig and fit motion on test, evaluate the
/// transfer; then aggregate mean +- std across splits.
/// Throws TopologyMismatch when the sequences do not share topology.
EvalReport run_protocol(const MeshSequence& train, const MeshSequence& test, const FitConfig& cfg,
                        std::size_t splits = kDefaultSplits);

}  // namespace rigfit
