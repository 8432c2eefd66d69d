#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rigfit/geom.hpp"

namespace rigfit {

/// Bone anchor vertices: indices into a vertex array plus their coordinates.
struct AnchorSet {
  std::vector<std::int32_t> indices;
  std::vector<Vec3> coords;

  std::size_t size() const { return indices.size(); }
};

/// Greedy max-min Euclidean farthest point sampling over a point array.
/// The first pick is the point farthest from the centroid; every tie goes to
/// the lowest index. Throws InvalidParameter unless 1 <= count <= points.size().
std::vector<std::int32_t> farthest_point_indices(std::span<const Vec3> points, std::size_t count);

/// FPS anchors on the mesh vertices.
AnchorSet farthest_point_sample(const TriMesh& mesh, std::size_t count);

/// Anchors at explicit vertex indices (for rigs loaded from file).
AnchorSet make_anchor_set(std::span<const Vec3> vertices, std::span<const std::int32_t> indices);

/// Result of one round of 1-to-4 midpoint subdivision. New vertex N + e is
/// the midpoint of edges[e].
struct Subdivision {
  TriMesh mesh;
  std::vector<std::array<std::int32_t, 2>> edges;

  /// Applies the same midpoint scheme to another frame of the source mesh.
  std::vector<Vec3> apply(std::span<const Vec3> frame) const;
};

Subdivision midpoint_subdivide_with_map(const TriMesh& mesh);
TriMesh midpoint_subdivide(const TriMesh& mesh);

/// Connectivity of a vertex subset derived from geodesic Voronoi regions.
struct ResampleMap {
  /// Indices into the (possibly subdivided) source vertex array, ascending.
  std::vector<std::int32_t> selected;
  /// Graph over positions in `selected`; edge weights are geodesic distances.
  WeightedGraph proxy_graph;
  /// Triangles over positions in `selected`, one per source face whose three
  /// corners fall in three distinct regions (duplicates dropped).
  std::vector<Face> faces;
};

/// Assigns every vertex of `original` to its geodesically nearest selected
/// vertex and links two selected vertices when their regions share an edge.
ResampleMap rebuild_connectivity(const TriMesh& original, std::span<const std::int32_t> selected);

struct NormalizedSequence {
  MeshSequence sequence;
  ResampleMap map;
};

inline constexpr std::size_t kDefaultTargetVertices = 5000;
inline constexpr std::size_t kDownsampleTriggerVertices = 20000;

/// Subdivides until N >= target, then FPS-selects exactly `target` vertices
/// on frame 0 and restricts every frame to them.
NormalizedSequence normalize_resolution(const MeshSequence& seq, std::size_t target = kDefaultTargetVertices);

}  // namespace rigfit
