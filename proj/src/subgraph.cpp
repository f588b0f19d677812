#include "boog/subgraph.hpp"

#include <algorithm>

namespace boog {

NeighborhoodFinder::NeighborhoodFinder(const EmbeddedGraph& g)
    : graph_(&g), depth_(g.node_count(), -1) {}

std::vector<NodeId> NeighborhoodFinder::operator()(NodeId v, int k) {
  if (v >= graph_->node_count()) {
    throw std::out_of_range("node id " + std::to_string(v) + " out of range for a " +
                            std::to_string(graph_->node_count()) + "-node graph");
  }
  if (k < 1) throw ParameterError("hop count k must be >= 1");

  std::vector<NodeId> found;
  depth_[v] = 0;
  frontier_.assign(1, v);
  for (int hop = 1; hop <= k && !frontier_.empty(); ++hop) {
    next_.clear();
    for (NodeId x : frontier_) {
      for (NodeId y : graph_->neighbors(x)) {
        if (depth_[y] < 0) {
          depth_[y] = hop;
          next_.push_back(y);
          found.push_back(y);
        }
      }
    }
    frontier_.swap(next_);
  }
  depth_[v] = -1;
  for (NodeId y : found) depth_[y] = -1;
  std::sort(found.begin(), found.end());
  return found;
}

std::vector<NodeId> khop_neighborhood(const EmbeddedGraph& g, NodeId v, int k) {
  NeighborhoodFinder finder(g);
  return finder(v, k);
}

namespace {

AnchorTask anchor_from(const EmbeddedGraph& g, NodeId v, std::vector<NodeId> hood) {
  AnchorTask t;
  t.instance_id = v;
  t.anchor_repr = g.embeddings().row(v).transpose();
  t.neighbor_reprs.resize(static_cast<Eigen::Index>(hood.size()), g.dim());
  for (std::size_t i = 0; i < hood.size(); ++i) {
    t.neighbor_reprs.row(static_cast<Eigen::Index>(i)) = g.embeddings().row(hood[i]);
  }
  t.neighborhood = std::move(hood);
  return t;
}

}  // namespace

AnchorTask NeighborhoodFinder::anchor(NodeId v, int k) {
  return anchor_from(*graph_, v, (*this)(v, k));
}

AnchorTask node_anchor(const EmbeddedGraph& g, NodeId v, int k) {
  return anchor_from(g, v, khop_neighborhood(g, v, k));
}

AnchorTask graph_anchor(const EmbeddedGraph& g, std::uint32_t instance_id) {
  if (g.node_count() == 0) throw ContractError("graph_anchor: empty graph");
  AnchorTask t;
  t.instance_id = instance_id;
  t.anchor_repr = g.embeddings().colwise().mean().transpose();
  t.neighborhood.resize(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) t.neighborhood[i] = static_cast<NodeId>(i);
  t.neighbor_reprs = g.embeddings();
  return t;
}

std::vector<AnchorTask> build_node_anchors(const EmbeddedGraph& g, std::span<const NodeId> ids, int k) {
  NeighborhoodFinder finder(g);
  std::vector<AnchorTask> out;
  out.reserve(ids.size());
  for (NodeId v : ids) out.push_back(finder.anchor(v, k));
  return out;
}

std::vector<AnchorTask> build_anchors(const Dataset& ds, std::span<const std::uint32_t> ids, int k) {
  if (ds.task != TaskKind::Graph) return build_node_anchors(ds.graph(), ids, k);
  std::vector<AnchorTask> out;
  out.reserve(ids.size());
  for (std::uint32_t id : ids) {
    if (id >= ds.collection.graphs.size()) {
      throw std::out_of_range("graph id " + std::to_string(id) + " out of range");
    }
    out.push_back(graph_anchor(ds.collection.graphs[id], id));
  }
  return out;
}

}  // namespace boog
