#include "rigfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rigfit/error.hpp"

namespace rigfit {

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  std::vector<std::int32_t> ids(points_.size());
  std::iota(ids.begin(), ids.end(), 0);
  nodes_.reserve(points_.size());
  root_ = build(ids, 0);
}

std::int32_t KdTree::build(std::span<std::int32_t> ids, int depth) {
  if (ids.empty()) {
    return -1;
  }
  const int axis = depth % 3;
  const std::size_t mid = ids.size() / 2;
  std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(mid), ids.end(),
                   [&](std::int32_t a, std::int32_t b) {
                     return points_[static_cast<std::size_t>(a)][axis] < points_[static_cast<std::size_t>(b)][axis];
                   });
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({ids[mid], -1, -1, static_cast<std::int8_t>(axis)});
  const std::int32_t left = build(ids.first(mid), depth + 1);
  const std::int32_t right = build(ids.subspan(mid + 1), depth + 1);
  nodes_[static_cast<std::size_t>(index)].left = left;
  nodes_[static_cast<std::size_t>(index)].right = right;
  return index;
}

void KdTree::search(std::int32_t node, const Vec3& q, double& best) const {
  if (node < 0) {
    return;
  }
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  const Vec3& p = points_[static_cast<std::size_t>(nd.point)];
  best = std::min(best, (p - q).squaredNorm());
  const double diff = q[nd.axis] - p[nd.axis];
  const std::int32_t near = diff < 0.0 ? nd.left : nd.right;
  const std::int32_t far = diff < 0.0 ? nd.right : nd.left;
  search(near, q, best);
  if (diff * diff < best) {
    search(far, q, best);
  }
}

double KdTree::nearest_sq(const Vec3& query) const {
  double best = std::numeric_limits<double>::infinity();
  search(root_, query, best);
  return best;
}

namespace {

template <typename Cost>
double directed_mean(std::span<const Vec3> from, const KdTree& to, Cost cost) {
  double total = 0.0;
  for (const Vec3& p : from) {
    total += cost(to.nearest_sq(p));
  }
  return total / static_cast<double>(from.size());
}

template <typename Cost>
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b, Cost cost) {
  if (a.empty() || b.empty()) {
    throw InvalidInput("Chamfer distance needs two non-empty point sets");
  }
  const KdTree tree_a(a);
  const KdTree tree_b(b);
  return 0.5 * (directed_mean(a, tree_b, cost) + directed_mean(b, tree_a, cost));
}

}  // namespace

double chamfer_l1(std::span<const Vec3> a, std::span<const Vec3> b) {
  return chamfer(a, b, [](double sq) { return std::sqrt(sq); });
}

double chamfer_l2(std::span<const Vec3> a, std::span<const Vec3> b) {
  return chamfer(a, b, [](double sq) { return sq; });
}

double vertex_mse(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> target) {
  return recon_loss(pred, target);
}

SequenceMetrics evaluate_frames(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw InvalidInput("prediction and target frame counts differ or are empty");
  }
  SequenceMetrics m;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    m.cd_l1.push_back(chamfer_l1(pred[t], target[t]));
    m.cd_l2.push_back(chamfer_l2(pred[t], target[t]));
    m.mse.push_back(vertex_mse(pred.subspan(t, 1), target.subspan(t, 1)));
  }
  m.mean_cd_l1 = mean_std(m.cd_l1).mean;
  m.mean_cd_l2 = mean_std(m.cd_l2).mean;
  m.mean_mse = vertex_mse(pred, target);
  return m;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) {
    return out;
  }
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) {
      ss += (v - out.mean) * (v - out.mean);
    }
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

EvalReport run_protocol(const MeshSequence& train, const MeshSequence& test, const FitConfig& cfg, std::size_t splits) {
  train.validate();
  test.validate();
  if (train.vertex_count() != test.vertex_count() || train.faces != test.faces) {
    throw TopologyMismatch("train and test sequences do not share topology");
  }
  if (splits < 1) {
    throw InvalidParameter("at least one split is required");
  }
  const Frames train_target(train.frames.begin() + 1, train.frames.end());
  const Frames test_target(test.frames.begin() + 1, test.frames.end());

  EvalReport report;
  report.config = cfg;
  for (std::size_t s = 0; s < splits; ++s) {
    FitConfig split_cfg = cfg;
    split_cfg.seed = cfg.seed + s;
    const FitResult fit = fit_rig_and_motion(train, split_cfg);
    const GeodesicField train_field = anchor_field(train, fit.rig.anchors.indices);
    const Frames train_pred = forward(fit.rig, fit.motion, train.frames.front(), train_field);

    const MotionFitResult transfer = fit_motion_only(fit.rig, train.vertex_count(), test, split_cfg);
    const RigParams test_rig = fit.rig.reanchored(test.frames.front());
    const GeodesicField test_field = anchor_field(test, test_rig.anchors.indices);
    const Frames test_pred = forward(test_rig, transfer.motion, test.frames.front(), test_field);

    SplitResult split;
    split.seed = split_cfg.seed;
    split.train = evaluate_frames(train_pred, train_target);
    split.transfer = evaluate_frames(test_pred, test_target);
    split.train_fit_loss = fit.report.final_loss;
    split.transfer_fit_loss = transfer.report.final_loss;
    report.splits.push_back(std::move(split));
  }

  auto collect = [&](auto getter) {
    std::vector<double> values;
    for (const auto& s : report.splits) {
      values.push_back(getter(s));
    }
    return mean_std(values);
  };
  report.aggregates["train.cd_l1"] = collect([](const SplitResult& s) { return s.train.mean_cd_l1; });
  report.aggregates["train.cd_l2"] = collect([](const SplitResult& s) { return s.train.mean_cd_l2; });
  report.aggregates["train.mse"] = collect([](const SplitResult& s) { return s.train.mean_mse; });
  report.aggregates["transfer.cd_l1"] = collect([](const SplitResult& s) { return s.transfer.mean_cd_l1; });
  report.aggregates["transfer.cd_l2"] = collect([](const SplitResult& s) { return s.transfer.mean_cd_l2; });
  report.aggregates["transfer.mse"] = collect([](const SplitResult& s) { return s.transfer.mean_mse; });
  return report;
}

}  // namespace rigfit
