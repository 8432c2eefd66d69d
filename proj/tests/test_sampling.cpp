#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "rigfit/error.hpp"
#include "rigfit/geodesic.hpp"
#include "rigfit/sampling.hpp"
#include "support/oracles.hpp"

using namespace rigfit;

namespace {

TriMesh icosahedron() {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  return m;
}

double min_pairwise(const std::vector<Vec3>& pts, const std::vector<std::int32_t>& idx) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      best = std::min(best, (pts[static_cast<std::size_t>(idx[a])] - pts[static_cast<std::size_t>(idx[b])]).norm());
    }
  }
  return best;
}

double area(const TriMesh& m) {
  double total = 0.0;
  for (const Face& f : m.faces) {
    const Vec3& a = m.vertices[static_cast<std::size_t>(f[0])];
    total += 0.5 * (m.vertices[static_cast<std::size_t>(f[1])] - a)
                       .cross(m.vertices[static_cast<std::size_t>(f[2])] - a)
                       .norm();
  }
  return total;
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("FPS with K = N returns every vertex") {
    std::mt19937_64 rng(1);
    std::vector<Vec3> pts;
    for (int i = 0; i < 30; ++i) {
      pts.push_back(oracle::random_vec(rng));
    }
    auto idx = farthest_point_indices(pts, pts.size());
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(idx[i] == static_cast<std::int32_t>(i));
    }
  }

  TEST_CASE("FPS with K = 1 returns the point farthest from the centroid") {
    const std::vector<Vec3> pts{{0, 0, 0}, {0.1, 0, 0}, {5, 0, 0}, {0, 0.2, 0}};
    const auto idx = farthest_point_indices(pts, 1);
    REQUIRE(idx.size() == 1);
    CHECK(idx[0] == 2);
  }

  TEST_CASE("FPS on square corners plus centre picks opposite corners first") {
    const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.5, 0.5, 0}};
    const auto idx = farthest_point_indices(pts, 2);
    CHECK(idx[0] == 0);
    // Brute-force max-min over every remaining candidate.
    std::int32_t best = -1;
    double best_d = -1.0;
    for (std::int32_t c = 0; c < 5; ++c) {
      const double d = (pts[static_cast<std::size_t>(c)] - pts[0]).norm();
      if (d > best_d) {
        best_d = d;
        best = c;
      }
    }
    CHECK(idx[1] == best);
    CHECK(idx[1] == 2);
  }

  TEST_CASE("FPS covering radius never increases as K grows and picks are distinct") {
    std::mt19937_64 rng(9);
    std::vector<Vec3> pts;
    for (int i = 0; i < 200; ++i) {
      pts.push_back(oracle::random_vec(rng));
    }
    const auto all = farthest_point_indices(pts, 50);
    CHECK(std::set<std::int32_t>(all.begin(), all.end()).size() == all.size());
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 2; k <= 50; ++k) {
      const std::vector<std::int32_t> prefix(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
      CHECK(farthest_point_indices(pts, k) == prefix);
      const double sep = min_pairwise(pts, prefix);
      CHECK(sep <= prev);
      prev = sep;
    }
  }

  TEST_CASE("FPS rejects invalid counts") {
    const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(farthest_point_indices(pts, 0), InvalidParameter);
    CHECK_THROWS_AS(farthest_point_indices(pts, 3), InvalidParameter);
  }

  TEST_CASE("anchor set rejects duplicates and out-of-range indices") {
    const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}};
    const std::vector<std::int32_t> dup{1, 1};
    const std::vector<std::int32_t> far{2};
    CHECK_THROWS(make_anchor_set(pts, dup));
    CHECK_THROWS(make_anchor_set(pts, far));
  }

  TEST_CASE("midpoint subdivision counts") {
    TriMesh tri{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}};
    const TriMesh s1 = midpoint_subdivide(tri);
    CHECK(s1.vertices.size() == 6);
    CHECK(s1.faces.size() == 4);

    TriMesh two{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}}};
    const TriMesh s2 = midpoint_subdivide(two);
    CHECK(s2.vertices.size() == 4 + unique_edges(two.faces).size());
    CHECK(s2.vertices.size() == 9);
    CHECK(s2.faces.size() == 8);
    s2.validate();
  }

  TEST_CASE("subdivision preserves the surface") {
    const TriMesh ico = icosahedron();
    const Subdivision sub = midpoint_subdivide_with_map(ico);
    CHECK(area(sub.mesh) == doctest::Approx(area(ico)).epsilon(1e-12));
    for (std::size_t e = 0; e < sub.edges.size(); ++e) {
      const Vec3 mid = 0.5 * (ico.vertices[static_cast<std::size_t>(sub.edges[e][0])] +
                              ico.vertices[static_cast<std::size_t>(sub.edges[e][1])]);
      CHECK((sub.mesh.vertices[ico.vertices.size() + e] - mid).norm() < 1e-15);
    }
    for (std::size_t i = 0; i < ico.vertices.size(); ++i) {
      CHECK(sub.mesh.vertices[i] == ico.vertices[i]);
    }
  }

  TEST_CASE("icosahedron subdivision follows Euler counts") {
    const TriMesh ico = icosahedron();
    const TriMesh s1 = midpoint_subdivide(ico);
    const TriMesh s2 = midpoint_subdivide(s1);
    CHECK(s1.vertices.size() == 42);
    CHECK(s2.vertices.size() == 162);
    CHECK(s2.faces.size() == 320);

    MeshSequence seq{ico.faces, {ico.vertices, ico.vertices}};
    const NormalizedSequence norm = normalize_resolution(seq, 40);
    CHECK(norm.sequence.vertex_count() == 40);
    CHECK(norm.sequence.frame_count() == 2);
    CHECK(norm.map.selected == [&] {
      auto sel = farthest_point_indices(s1.vertices, 40);
      std::sort(sel.begin(), sel.end());
      return sel;
    }());
  }

  TEST_CASE("target equal to N keeps every vertex and the edge graph") {
    const TriMesh ico = icosahedron();
    MeshSequence seq{ico.faces, {ico.vertices, ico.vertices}};
    const NormalizedSequence norm = normalize_resolution(seq, 12);
    CHECK(norm.sequence.frames == seq.frames);
    const WeightedGraph g = edge_graph(ico);
    CHECK(norm.map.proxy_graph.edge_count() == g.edge_count());
    for (std::size_t a = 0; a < 12; ++a) {
      for (const auto& nb : g.adjacency[a]) {
        CHECK(norm.map.proxy_graph.weight(static_cast<std::int32_t>(a), nb.node) == nb.weight);
      }
    }
    CHECK(norm.sequence.faces.size() == ico.faces.size());
  }

  TEST_CASE("rebuild on a path links the two ends through the middle vertex") {
    // a - b - c along x; the two side vertices only make the strip a mesh.
    TriMesh strip{{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0.5, 1, 0}, {1.5, 1, 0}}, {{0, 1, 3}, {1, 2, 4}}};
    const std::vector<std::int32_t> sel{0, 2};
    const ResampleMap map = rebuild_connectivity(strip, sel);
    CHECK(map.proxy_graph.edge_count() == 1);
    const auto d = dijkstra(edge_graph(strip), 0);
    CHECK(map.proxy_graph.weight(0, 1) == d[2]);
    CHECK(map.proxy_graph.weight(0, 1) == 2.0);
  }

  TEST_CASE("rebuild on disconnected components gives no edges") {
    TriMesh two{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}}, {{0, 1, 2}, {3, 4, 5}}};
    const std::vector<std::int32_t> sel{0, 3};
    const ResampleMap map = rebuild_connectivity(two, sel);
    CHECK(map.proxy_graph.edge_count() == 0);
    CHECK(map.faces.empty());
  }

  TEST_CASE("resampled sequence is a valid mesh with consistent frames") {
    const TriMesh s2 = midpoint_subdivide(midpoint_subdivide(icosahedron()));
    std::vector<Vec3> moved = s2.vertices;
    for (auto& v : moved) {
      v += Vec3(0.5, 0.0, 0.0);
    }
    MeshSequence seq{s2.faces, {s2.vertices, moved}};
    const NormalizedSequence norm = normalize_resolution(seq, 60);
    norm.sequence.validate();
    CHECK(norm.map.proxy_graph.node_count() == 60);
    for (std::size_t i = 0; i < 60; ++i) {
      CHECK((norm.sequence.frames[1][i] - norm.sequence.frames[0][i] - Vec3(0.5, 0, 0)).norm() < 1e-15);
      CHECK(norm.sequence.frames[0][i] == s2.vertices[static_cast<std::size_t>(norm.map.selected[i])]);
    }
  }
}
