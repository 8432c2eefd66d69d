#include "rigfit/sampling.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <tuple>

#include "rigfit/error.hpp"
#include "rigfit/geodesic.hpp"

namespace rigfit {

std::vector<std::int32_t> farthest_point_indices(std::span<const Vec3> points, std::size_t count) {
  const std::size_t n = points.size();
  if (count < 1 || count > n) {
    throw InvalidParameter("farthest point sampling needs 1 <= K <= N (K=" + std::to_string(count) +
                           ", N=" + std::to_string(n) + ")");
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) {
    centroid += p;
  }
  centroid /= static_cast<double>(n);

  std::size_t seed = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (points[i] - centroid).squaredNorm();
    if (d > best) {
      best = d;
      seed = i;
    }
  }

  std::vector<std::int32_t> picked;
  picked.reserve(count);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::size_t current = seed;
  for (std::size_t s = 0; s < count; ++s) {
    picked.push_back(static_cast<std::int32_t>(current));
    min_dist[current] = -1.0;
    std::size_t next = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_dist[i] < 0.0) {
        continue;
      }
      min_dist[i] = std::min(min_dist[i], (points[i] - points[current]).squaredNorm());
      if (min_dist[i] > far) {
        far = min_dist[i];
        next = i;
      }
    }
    current = next;
  }
  return picked;
}

AnchorSet make_anchor_set(std::span<const Vec3> vertices, std::span<const std::int32_t> indices) {
  AnchorSet anchors;
  std::set<std::int32_t> seen;
  for (std::int32_t idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= vertices.size()) {
      throw InvalidInput("anchor index " + std::to_string(idx) + " out of range");
    }
    if (!seen.insert(idx).second) {
      throw InvalidInput("duplicate anchor index " + std::to_string(idx));
    }
    anchors.indices.push_back(idx);
    anchors.coords.push_back(vertices[static_cast<std::size_t>(idx)]);
  }
  return anchors;
}

AnchorSet farthest_point_sample(const TriMesh& mesh, std::size_t count) {
  const auto indices = farthest_point_indices(mesh.vertices, count);
  return make_anchor_set(mesh.vertices, indices);
}

std::vector<Vec3> Subdivision::apply(std::span<const Vec3> frame) const {
  std::vector<Vec3> out(frame.begin(), frame.end());
  out.reserve(frame.size() + edges.size());
  for (const auto& [a, b] : edges) {
    out.push_back(0.5 * (frame[static_cast<std::size_t>(a)] + frame[static_cast<std::size_t>(b)]));
  }
  return out;
}

Subdivision midpoint_subdivide_with_map(const TriMesh& mesh) {
  Subdivision sub;
  sub.edges = unique_edges(mesh.faces);
  const auto n = static_cast<std::int32_t>(mesh.vertices.size());
  auto midpoint = [&](std::int32_t a, std::int32_t b) {
    const std::array<std::int32_t, 2> key{std::min(a, b), std::max(a, b)};
    const auto it = std::lower_bound(sub.edges.begin(), sub.edges.end(), key);
    return n + static_cast<std::int32_t>(it - sub.edges.begin());
  };
  sub.mesh.vertices = sub.apply(mesh.vertices);
  sub.mesh.faces.reserve(mesh.faces.size() * 4);
  for (const Face& f : mesh.faces) {
    const std::int32_t ab = midpoint(f[0], f[1]);
    const std::int32_t bc = midpoint(f[1], f[2]);
    const std::int32_t ca = midpoint(f[2], f[0]);
    sub.mesh.faces.push_back({f[0], ab, ca});
    sub.mesh.faces.push_back({ab, f[1], bc});
    sub.mesh.faces.push_back({ca, bc, f[2]});
    sub.mesh.faces.push_back({ab, bc, ca});
  }
  return sub;
}

TriMesh midpoint_subdivide(const TriMesh& mesh) { return midpoint_subdivide_with_map(mesh).mesh; }

ResampleMap rebuild_connectivity(const TriMesh& original, std::span<const std::int32_t> selected) {
  const WeightedGraph graph = edge_graph(original);
  const std::size_t n = graph.node_count();
  const std::size_t m = selected.size();

  // Multi-source Dijkstra; ties in distance go to the lower selected slot.
  std::vector<double> dist(n, kUnreachable);
  std::vector<std::int32_t> owner(n, -1);
  using Entry = std::tuple<double, std::int32_t, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t s = 0; s < m; ++s) {
    const auto v = selected[s];
    if (v < 0 || static_cast<std::size_t>(v) >= n) {
      throw InvalidInput("selected vertex " + std::to_string(v) + " out of range");
    }
    if (owner[static_cast<std::size_t>(v)] != -1) {
      throw InvalidInput("selected vertex " + std::to_string(v) + " listed twice");
    }
    dist[static_cast<std::size_t>(v)] = 0.0;
    owner[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(s);
    heap.emplace(0.0, static_cast<std::int32_t>(s), v);
  }
  while (!heap.empty()) {
    const auto [d, s, u] = heap.top();
    heap.pop();
    const auto uu = static_cast<std::size_t>(u);
    if (d > dist[uu] || s != owner[uu]) {
      continue;
    }
    for (const auto& nb : graph.adjacency[uu]) {
      const auto vv = static_cast<std::size_t>(nb.node);
      const double candidate = d + nb.weight;
      if (candidate < dist[vv] || (candidate == dist[vv] && s < owner[vv])) {
        dist[vv] = candidate;
        owner[vv] = s;
        heap.emplace(candidate, s, nb.node);
      }
    }
  }

  std::vector<std::set<std::int32_t>> neighbors(m);
  for (const auto& [a, b] : unique_edges(original.faces)) {
    const auto oa = owner[static_cast<std::size_t>(a)];
    const auto ob = owner[static_cast<std::size_t>(b)];
    if (oa >= 0 && ob >= 0 && oa != ob) {
      neighbors[static_cast<std::size_t>(oa)].insert(ob);
      neighbors[static_cast<std::size_t>(ob)].insert(oa);
    }
  }

  ResampleMap out;
  out.selected.assign(selected.begin(), selected.end());
  out.proxy_graph = WeightedGraph(m);

  // Bounded Dijkstra from each selected vertex until its region neighbours settle.
  std::vector<double> local(n, kUnreachable);
  std::vector<std::int32_t> touched;
  for (std::size_t s = 0; s < m; ++s) {
    std::set<std::int32_t> pending;
    for (auto o : neighbors[s]) {
      if (o > static_cast<std::int32_t>(s)) {
        pending.insert(selected[static_cast<std::size_t>(o)]);
      }
    }
    if (pending.empty()) {
      continue;
    }
    using Item = std::pair<double, std::int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    local[static_cast<std::size_t>(selected[s])] = 0.0;
    touched.push_back(selected[s]);
    q.emplace(0.0, selected[s]);
    while (!q.empty() && !pending.empty()) {
      const auto [d, u] = q.top();
      q.pop();
      if (d > local[static_cast<std::size_t>(u)]) {
        continue;
      }
      pending.erase(u);
      for (const auto& nb : graph.adjacency[static_cast<std::size_t>(u)]) {
        const double candidate = d + nb.weight;
        if (candidate < local[static_cast<std::size_t>(nb.node)]) {
          if (local[static_cast<std::size_t>(nb.node)] == kUnreachable) {
            touched.push_back(nb.node);
          }
          local[static_cast<std::size_t>(nb.node)] = candidate;
          q.emplace(candidate, nb.node);
        }
      }
    }
    for (auto o : neighbors[s]) {
      if (o > static_cast<std::int32_t>(s)) {
        out.proxy_graph.add_edge(static_cast<std::int32_t>(s), o,
                                 local[static_cast<std::size_t>(selected[static_cast<std::size_t>(o)])]);
      }
    }
    for (auto t : touched) {
      local[static_cast<std::size_t>(t)] = kUnreachable;
    }
    touched.clear();
  }

  std::set<std::array<std::int32_t, 3>> seen;
  for (const Face& f : original.faces) {
    const Face mapped{owner[static_cast<std::size_t>(f[0])], owner[static_cast<std::size_t>(f[1])],
                      owner[static_cast<std::size_t>(f[2])]};
    if (mapped[0] < 0 || mapped[1] < 0 || mapped[2] < 0 || mapped[0] == mapped[1] || mapped[1] == mapped[2] ||
        mapped[0] == mapped[2]) {
      continue;
    }
    std::array<std::int32_t, 3> key = mapped;
    std::sort(key.begin(), key.end());
    if (seen.insert(key).second) {
      out.faces.push_back(mapped);
    }
  }
  return out;
}

NormalizedSequence normalize_resolution(const MeshSequence& seq, std::size_t target) {
  if (seq.frames.empty() || seq.vertex_count() == 0) {
    throw InvalidInput("cannot normalize an empty sequence");
  }
  if (target < 4) {
    throw InvalidParameter("target vertex count must be at least 4");
  }
  seq.validate();

  MeshSequence work = seq;
  while (work.vertex_count() < target) {
    if (work.faces.empty()) {
      throw InvalidInput("cannot subdivide a sequence without faces");
    }
    const Subdivision sub = midpoint_subdivide_with_map(work.canonical());
    for (auto& frame : work.frames) {
      frame = sub.apply(frame);
    }
    work.faces = sub.mesh.faces;
  }

  std::vector<std::int32_t> selected;
  if (work.vertex_count() == target) {
    selected.resize(target);
    for (std::size_t i = 0; i < target; ++i) {
      selected[i] = static_cast<std::int32_t>(i);
    }
  } else {
    selected = farthest_point_indices(work.frames.front(), target);
    std::sort(selected.begin(), selected.end());
  }

  NormalizedSequence out;
  out.map = rebuild_connectivity(work.canonical(), selected);
  out.sequence.faces = out.map.faces;
  out.sequence.frames.reserve(work.frames.size());
  for (const auto& frame : work.frames) {
    std::vector<Vec3> restricted;
    restricted.reserve(selected.size());
    for (auto idx : selected) {
      restricted.push_back(frame[static_cast<std::size_t>(idx)]);
    }
    out.sequence.frames.push_back(std::move(restricted));
  }
  return out;
}

}  // namespace rigfit
