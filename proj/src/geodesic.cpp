#include "rigfit/geodesic.hpp"

#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <utility>

#include "rigfit/error.hpp"

namespace rigfit {

namespace {

void check_weights(const WeightedGraph& graph) {
  for (const auto& nbrs : graph.adjacency) {
    for (const auto& nb : nbrs) {
      if (nb.weight < 0.0 || std::isnan(nb.weight)) {
        throw InvalidInput("graph has a negative or NaN edge weight");
      }
    }
  }
}

std::vector<double> run_dijkstra(const WeightedGraph& graph, std::int32_t source) {
  std::vector<double> dist(graph.node_count(), kUnreachable);
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[static_cast<std::size_t>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) {
      continue;
    }
    for (const auto& nb : graph.adjacency[static_cast<std::size_t>(u)]) {
      const double candidate = d + nb.weight;
      if (candidate < dist[static_cast<std::size_t>(nb.node)]) {
        dist[static_cast<std::size_t>(nb.node)] = candidate;
        heap.emplace(candidate, nb.node);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<double> dijkstra(const WeightedGraph& graph, std::int32_t source) {
  check_weights(graph);
  if (source < 0 || static_cast<std::size_t>(source) >= graph.node_count()) {
    throw InvalidInput("dijkstra source " + std::to_string(source) + " out of range");
  }
  return run_dijkstra(graph, source);
}

GeodesicField geodesic_distances(const WeightedGraph& graph, std::span<const std::int32_t> anchors) {
  check_weights(graph);
  GeodesicField field;
  field.dist.resize(static_cast<Eigen::Index>(graph.node_count()), static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    if (anchors[k] < 0 || static_cast<std::size_t>(anchors[k]) >= graph.node_count()) {
      throw InvalidInput("anchor " + std::to_string(anchors[k]) + " is not a graph node");
    }
    const std::vector<double> d = run_dijkstra(graph, anchors[k]);
    for (std::size_t i = 0; i < d.size(); ++i) {
      field.dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = d[i];
    }
  }
  return field;
}

CoherenceMask coherence_mask(const GeodesicField& field, double tau) {
  if (!(tau > 0.0)) {
    throw InvalidParameter("coherence radius tau must be positive");
  }
  CoherenceMask out;
  out.tau = tau;
  out.mask = (field.dist.array() < tau).cast<std::uint8_t>().matrix();
  return out;
}

}  // namespace rigfit
