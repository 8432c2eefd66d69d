#include "rigfit/geom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rigfit/error.hpp"

namespace rigfit {

Quat Quat::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) {
    return identity();
  }
  const Vec3 a = axis / n;
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), s * a.x(), s * a.y(), s * a.z()};
}

double Quat::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quat Quat::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidParameter("quaternion has zero or non-finite norm");
  }
  return {w / n, x / n, y / n, z / n};
}

Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quat operator-(const Quat& q) { return {-q.w, -q.x, -q.y, -q.z}; }

Mat3 quat_to_rotmat(const Quat& raw) {
  const Quat q = raw.normalized();
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Mat4 RigidTransform::to_matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = quat_to_rotmat(rotation);
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  const Quat inv = rotation.normalized().conjugate();
  return {inv, -(quat_to_rotmat(inv) * translation)};
}

Vec3 apply(const RigidTransform& transform, const Vec3& v) {
  return quat_to_rotmat(transform.rotation) * v + transform.translation;
}

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
  const Quat qo = outer.rotation.normalized();
  const Quat qi = inner.rotation.normalized();
  return {(qo * qi).normalized(), quat_to_rotmat(qo) * inner.translation + outer.translation};
}

void TriMesh::validate() const {
  const auto n = static_cast<std::int64_t>(vertices.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    for (auto idx : face) {
      if (idx < 0 || idx >= n) {
        throw InvalidInput("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                           " outside [0, " + std::to_string(n) + ")");
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw InvalidInput("face " + std::to_string(f) + " is degenerate");
    }
  }
  for (const Vec3& v : vertices) {
    if (!v.allFinite()) {
      throw InvalidInput("mesh contains a non-finite vertex");
    }
  }
}

void MeshSequence::validate() const {
  if (frames.size() < 2) {
    throw InvalidInput("a mesh sequence needs at least 2 frames, got " + std::to_string(frames.size()));
  }
  const std::size_t n = frames.front().size();
  if (n == 0) {
    throw InvalidInput("mesh sequence has no vertices");
  }
  for (std::size_t t = 1; t < frames.size(); ++t) {
    if (frames[t].size() != n) {
      throw TopologyMismatch("frame " + std::to_string(t) + " has " + std::to_string(frames[t].size()) +
                             " vertices, expected " + std::to_string(n));
    }
  }
  canonical().validate();
}

std::size_t WeightedGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& nbrs : adjacency) {
    total += nbrs.size();
  }
  return total / 2;
}

void WeightedGraph::add_edge(std::int32_t a, std::int32_t b, double weight) {
  adjacency[static_cast<std::size_t>(a)].push_back({b, weight});
  adjacency[static_cast<std::size_t>(b)].push_back({a, weight});
}

double WeightedGraph::weight(std::int32_t a, std::int32_t b) const {
  for (const auto& nb : adjacency[static_cast<std::size_t>(a)]) {
    if (nb.node == b) {
      return nb.weight;
    }
  }
  return -1.0;
}

std::vector<std::array<std::int32_t, 2>> unique_edges(std::span<const Face> faces) {
  std::vector<std::array<std::int32_t, 2>> edges;
  edges.reserve(faces.size() * 3);
  for (const Face& f : faces) {
    for (int e = 0; e < 3; ++e) {
      const std::int32_t a = f[static_cast<std::size_t>(e)];
      const std::int32_t b = f[static_cast<std::size_t>((e + 1) % 3)];
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

WeightedGraph edge_graph(const TriMesh& mesh) {
  WeightedGraph graph(mesh.vertices.size());
  for (const auto& [a, b] : unique_edges(mesh.faces)) {
    graph.add_edge(a, b, (mesh.vertices[static_cast<std::size_t>(a)] - mesh.vertices[static_cast<std::size_t>(b)]).norm());
  }
  return graph;
}

double bbox_diagonal(std::span<const Vec3> points) {
  if (points.empty()) {
    return 0.0;
  }
  Vec3 lo = points.front();
  Vec3 hi = points.front();
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

}  // namespace rigfit
