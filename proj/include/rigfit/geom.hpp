#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace rigfit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Quaternion stored scalar-first (w, x, y, z). Consumers normalize on use, so
/// a raw optimizer 4-vector is a valid value as long as it is nonzero.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quat identity() { return {}; }
  static Quat from_axis_angle(const Vec3& axis, double angle);

  double norm() const;
  /// Throws InvalidParameter on a zero-norm quaternion.
  Quat normalized() const;
  Quat conjugate() const { return {w, -x, -y, -z}; }

  std::array<double, 4> as_array() const { return {w, x, y, z}; }
};

Quat operator*(const Quat& a, const Quat& b);
Quat operator-(const Quat& q);

/// Rotation matrix of q / |q|. Throws InvalidParameter if |q| == 0.
Mat3 quat_to_rotmat(const Quat& q);

/// Rotation by a unit quaternion followed by a translation.
struct RigidTransform {
  Quat rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform translate(const Vec3& t) { return {Quat::identity(), t}; }

  Mat4 to_matrix() const;
  RigidTransform inverse() const;
};

/// R * v + t.
Vec3 apply(const RigidTransform& transform, const Vec3& v);

/// Returns T with apply(T, v) == apply(outer, apply(inner, v)).
RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);

using Face = std::array<std::int32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t vertex_count() const { return vertices.size(); }

  /// Throws InvalidInput on out-of-range or degenerate faces.
  void validate() const;
};

/// T frames over one shared face list. Frame 0 is the canonical pose.
struct MeshSequence {
  std::vector<Face> faces;
  std::vector<std::vector<Vec3>> frames;

  std::size_t vertex_count() const { return frames.empty() ? 0 : frames.front().size(); }
  std::size_t frame_count() const { return frames.size(); }
  TriMesh canonical() const { return {frames.front(), faces}; }

  /// Checks T >= 2, equal frame sizes and valid faces.
  void validate() const;
};

/// Undirected weighted graph stored as adjacency lists. Each edge appears once
/// in the adjacency of both endpoints, with the same weight.
struct WeightedGraph {
  struct Neighbor {
    std::int32_t node;
    double weight;
  };

  std::vector<std::vector<Neighbor>> adjacency;

  explicit WeightedGraph(std::size_t nodes = 0) : adjacency(nodes) {}

  std::size_t node_count() const { return adjacency.size(); }
  std::size_t edge_count() const;
  void add_edge(std::int32_t a, std::int32_t b, double weight);
  /// Weight of edge (a, b), or a negative value if absent.
  double weight(std::int32_t a, std::int32_t b) const;
};

/// One node per vertex, one edge per unique face edge weighted by its
/// Euclidean length in the mesh's vertex positions.
WeightedGraph edge_graph(const TriMesh& mesh);

/// Unique undirected edges (lo, hi) of a face list, sorted.
std::vector<std::array<std::int32_t, 2>> unique_edges(std::span<const Face> faces);

/// Axis-aligned bounding box diagonal length.
double bbox_diagonal(std::span<const Vec3> points);

}  // namespace rigfit
