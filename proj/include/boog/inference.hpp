#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "boog/pretrain.hpp"

namespace boog {

/// Outcome of similarity matching for one instance.
struct MatchResult {
  int chosen_index = 0;  // lowest index among the maximal scores
  Vector z;              // post row of the chosen super node
  Vector scores;         // sim(post_j, class_j) for every class
};

MatchResult similarity_match(const SuperNodeBundle& bundle, const Matrix& classes);

inline MatchResult similarity_match(const SuperNodeBundle& bundle, const ClassCatalog& catalog) {
  return similarity_match(bundle, catalog.embeddings);
}

/// Throws ShapeError when checkpoint and catalog dims differ.
void check_compatible(const Checkpoint& checkpoint, const ClassCatalog& catalog);

/// Encodes and matches every anchor with frozen parameters.
std::vector<MatchResult> match_all(std::span<const AnchorTask> anchors, const ClassCatalog& catalog,
                                   const Checkpoint& checkpoint, int workers = 1);

std::vector<int> zero_shot_classify(std::span<const AnchorTask> anchors, const ClassCatalog& catalog,
                                    const Checkpoint& checkpoint, int workers = 1);

/// Final representations z, one row per anchor.
Matrix extract_representations(std::span<const AnchorTask> anchors, const ClassCatalog& catalog,
                               const Checkpoint& checkpoint, int workers = 1);

struct LinkPrediction {
  NodeId u = 0;
  NodeId v = 0;
  double sim = 0.0;
  int predicted = 0;
};

/// Per-node representations of whole graphs, memoized by a content hash of
/// (graph, catalog, encoder parameters, hyper-parameters).
class RepresentationCache {
 public:
  const Matrix& node_representations(const EmbeddedGraph& graph, const ClassCatalog& catalog,
                                     const Checkpoint& checkpoint, int workers = 1);
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::uint64_t, Matrix> entries_;
};

/// Edge decision on precomputed representations: predicted iff sim > T.
std::vector<LinkPrediction> predict_links(std::span<const std::pair<NodeId, NodeId>> pairs,
                                          const Matrix& node_z, double threshold);

/// Zero-shot link prediction; each node's z comes from its own neighborhood.
std::vector<LinkPrediction> zero_shot_link(std::span<const std::pair<NodeId, NodeId>> pairs,
                                           const EmbeddedGraph& graph, const ClassCatalog& catalog,
                                           const Checkpoint& checkpoint, double threshold,
                                           RepresentationCache* cache = nullptr, int workers = 1);

}  // namespace boog
