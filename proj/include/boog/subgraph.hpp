#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "boog/graph_store.hpp"

namespace boog {

/// One instance to classify: the anchor representation and the embeddings
/// of its neighborhood, one row per neighbor id.
template <typename Scalar>
struct AnchorTaskT {
  std::uint32_t instance_id = 0;
  VectorX<Scalar> anchor_repr;
  std::vector<NodeId> neighborhood;
  MatrixX<Scalar> neighbor_reprs;

  int dim() const { return static_cast<int>(anchor_repr.size()); }
};

using AnchorTask = AnchorTaskT<double>;

/// Nodes at shortest-path distance 1..k from v, ascending ids, v excluded.
std::vector<NodeId> khop_neighborhood(const EmbeddedGraph& g, NodeId v, int k);

AnchorTask node_anchor(const EmbeddedGraph& g, NodeId v, int k);

/// Mean-pooled anchor over the whole graph; the neighborhood is every node.
AnchorTask graph_anchor(const EmbeddedGraph& g, std::uint32_t instance_id = 0);

/// Reusable BFS scratch space so that repeated neighborhood queries cost
/// O(|neighborhood| + touched edges) rather than O(node_count) each.
class NeighborhoodFinder {
 public:
  explicit NeighborhoodFinder(const EmbeddedGraph& g);

  std::vector<NodeId> operator()(NodeId v, int k);

  /// Node anchor of v with its k-hop neighborhood.
  AnchorTask anchor(NodeId v, int k);

 private:
  const EmbeddedGraph* graph_;
  std::vector<int> depth_;
  std::vector<NodeId> frontier_;
  std::vector<NodeId> next_;
};

/// Anchor tasks for the given instance ids of a dataset: node anchors for
/// node and link tasks, graph anchors for graph tasks.
std::vector<AnchorTask> build_anchors(const Dataset& ds, std::span<const std::uint32_t> ids, int k);

/// Same, for every node of a single graph (link tasks).
std::vector<AnchorTask> build_node_anchors(const EmbeddedGraph& g, std::span<const NodeId> ids, int k);

}  // namespace boog
