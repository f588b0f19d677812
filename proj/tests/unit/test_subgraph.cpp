#include <numeric>
#include <set>

#include "boog/subgraph.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace boog;
using testing_support::random_matrix;

namespace {

EmbeddedGraph path4() { return EmbeddedGraph(Matrix::Identity(4, 4), {{0, 1}, {1, 2}, {2, 3}}); }

struct RandomGraph {
  EmbeddedGraph graph;
  std::vector<std::pair<int, int>> edges;
};

RandomGraph random_graph(std::uint64_t seed, int n, double p, int d = 3) {
  Rng rng(seed);
  RandomGraph out;
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) {
        edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
        out.edges.emplace_back(u, v);
      }
  out.graph = EmbeddedGraph(random_matrix(rng, n, d), edges);
  return out;
}

}  // namespace

TEST_CASE("k-hop neighborhoods on a path") {
  const EmbeddedGraph g = path4();
  CHECK(khop_neighborhood(g, 0, 1) == std::vector<NodeId>{1});
  CHECK(khop_neighborhood(g, 0, 2) == std::vector<NodeId>{1, 2});
  CHECK(khop_neighborhood(g, 1, 1) == std::vector<NodeId>{0, 2});
  CHECK(khop_neighborhood(g, 0, 10) == std::vector<NodeId>{1, 2, 3});
  CHECK_THROWS_AS(khop_neighborhood(g, 4, 1), std::out_of_range);
  CHECK_THROWS_AS(khop_neighborhood(g, 0, 0), ParameterError);
}

TEST_CASE("k-hop neighborhoods match all-pairs shortest paths") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RandomGraph rg = random_graph(seed, 50, 0.1);
    const auto dist = naive::hop_distances(50, rg.edges);
    NeighborhoodFinder finder(rg.graph);
    for (int v = 0; v < 50; ++v) {
      for (int k : {1, 2, 3}) {
        const auto got = finder(static_cast<NodeId>(v), k);
        const auto want = naive::khop(dist, v, k);
        CHECK(std::vector<int>(got.begin(), got.end()) == want);
        CHECK(got == khop_neighborhood(rg.graph, static_cast<NodeId>(v), k));
      }
    }
  }
}

TEST_CASE("neighborhoods grow with k and exclude the anchor") {
  const RandomGraph rg = random_graph(11, 40, 0.08);
  for (NodeId v = 0; v < 40; ++v) {
    std::set<NodeId> prev;
    for (int k = 1; k <= 4; ++k) {
      const auto hood = khop_neighborhood(rg.graph, v, k);
      const std::set<NodeId> cur(hood.begin(), hood.end());
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      CHECK_FALSE(cur.count(v));
      prev = cur;
    }
  }
}

TEST_CASE("node anchors") {
  SUBCASE("isolated node") {
    const EmbeddedGraph g(Matrix::Identity(3, 3), {{0, 1}});
    const AnchorTask t = node_anchor(g, 2, 2);
    CHECK(t.neighborhood.empty());
    CHECK(t.neighbor_reprs.rows() == 0);
    CHECK(t.anchor_repr == Vector::Unit(3, 2));
  }
  SUBCASE("star center sees every leaf") {
    const EmbeddedGraph g(Matrix::Identity(5, 5), {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    const AnchorTask t = node_anchor(g, 0, 1);
    CHECK(t.neighborhood == std::vector<NodeId>{1, 2, 3, 4});
  }
  SUBCASE("rows align with ids") {
    const RandomGraph rg = random_graph(2, 30, 0.15);
    const AnchorTask t = node_anchor(rg.graph, 7, 2);
    CHECK(t.anchor_repr == rg.graph.embeddings().row(7).transpose());
    for (std::size_t i = 0; i < t.neighborhood.size(); ++i) {
      CHECK(t.neighbor_reprs.row(static_cast<Eigen::Index>(i)) ==
            rg.graph.embeddings().row(t.neighborhood[i]));
    }
  }
}

TEST_CASE("graph anchors pool by mean") {
  SUBCASE("single node") {
    Matrix e(1, 2);
    e << 3, -1;
    const AnchorTask t = graph_anchor(EmbeddedGraph(e, {}));
    CHECK(t.anchor_repr == e.row(0).transpose());
    CHECK(t.neighborhood == std::vector<NodeId>{0});
  }
  SUBCASE("two nodes") {
    const AnchorTask t = graph_anchor(EmbeddedGraph(Matrix::Identity(2, 2), {{0, 1}}));
    CHECK(t.anchor_repr[0] == 0.5);
    CHECK(t.anchor_repr[1] == 0.5);
  }
  SUBCASE("column mean and relabeling invariance") {
    const RandomGraph rg = random_graph(4, 10, 0.3, 5);
    const AnchorTask t = graph_anchor(rg.graph);
    naive::Vec mean(5, 0.0);
    for (int v = 0; v < 10; ++v)
      for (int k = 0; k < 5; ++k) mean[k] += rg.graph.embeddings()(v, k) / 10.0;
    for (int k = 0; k < 5; ++k) CHECK(std::abs(t.anchor_repr[k] - mean[k]) <= 1e-12);
    CHECK(t.neighborhood.size() == 10);

    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(1);
    rng.shuffle(perm);
    Matrix relabeled(10, 5);
    std::vector<Edge> edges;
    for (int v = 0; v < 10; ++v) relabeled.row(perm[v]) = rg.graph.embeddings().row(v);
    for (auto [u, v] : rg.edges) {
      const auto a = static_cast<NodeId>(perm[u]), b = static_cast<NodeId>(perm[v]);
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
    const AnchorTask r = graph_anchor(EmbeddedGraph(relabeled, edges));
    CHECK((r.anchor_repr - t.anchor_repr).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("empty graph") { CHECK_THROWS_AS(graph_anchor(EmbeddedGraph(Matrix(0, 2), {})), ContractError); }
}
