#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rigfit/geom.hpp"

namespace rigfit {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Shortest edge-path distance from every node to every anchor (N x K).
/// Unreachable pairs hold +infinity.
struct GeodesicField {
  Eigen::MatrixXd dist;

  Eigen::Index vertex_count() const { return dist.rows(); }
  Eigen::Index anchor_count() const { return dist.cols(); }
};

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// mask(i, k) = 1 iff dist(i, k) < tau.
struct CoherenceMask {
  MaskMatrix mask;
  double tau = 0.0;
};

/// Single-source Dijkstra. Throws InvalidInput on a negative edge weight.
std::vector<double> dijkstra(const WeightedGraph& graph, std::int32_t source);

GeodesicField geodesic_distances(const WeightedGraph& graph, std::span<const std::int32_t> anchors);

/// Throws InvalidParameter unless tau > 0 (infinity is allowed).
CoherenceMask coherence_mask(const GeodesicField& field, double tau);

/// Mask radius relative to the canonical bounding-box diagonal.
inline constexpr double kDefaultTauFraction = 0.4;

}  // namespace rigfit
