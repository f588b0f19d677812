#include "boog/inference.hpp"

#include <bit>

#include "boog/parallel.hpp"

namespace boog {

MatchResult similarity_match(const SuperNodeBundle& bundle, const Matrix& classes) {
  if (bundle.post.rows() != classes.rows() || bundle.post.cols() != classes.cols()) {
    throw ShapeError("similarity_match: bundle " + shape_of(bundle.post) + " vs classes " + shape_of(classes));
  }
  if (classes.rows() == 0) throw ContractError("similarity_match: empty catalog");
  MatchResult r;
  r.scores.resize(classes.rows());
  for (Eigen::Index j = 0; j < classes.rows(); ++j) {
    r.scores[j] = cosine_sim(bundle.post.row(j), classes.row(j));
  }
  for (Eigen::Index j = 1; j < r.scores.size(); ++j) {
    if (r.scores[j] > r.scores[r.chosen_index]) r.chosen_index = static_cast<int>(j);
  }
  r.z = bundle.post.row(r.chosen_index).transpose();
  return r;
}

void check_compatible(const Checkpoint& checkpoint, const ClassCatalog& catalog) {
  if (checkpoint.params.dim() != catalog.dim()) {
    throw ShapeError("checkpoint dim " + std::to_string(checkpoint.params.dim()) +
                     " does not match dataset dim " + std::to_string(catalog.dim()));
  }
}

std::vector<MatchResult> match_all(std::span<const AnchorTask> anchors, const ClassCatalog& catalog,
                                   const Checkpoint& checkpoint, int workers) {
  check_compatible(checkpoint, catalog);
  std::vector<MatchResult> out(anchors.size());
  parallel_for(anchors.size(), workers, [&](std::size_t i) {
    const SuperNodeBundle b = encode<double>(anchors[i], catalog.embeddings, checkpoint.params, checkpoint.hyper);
    out[i] = similarity_match(b, catalog.embeddings);
  });
  return out;
}

std::vector<int> zero_shot_classify(std::span<const AnchorTask> anchors, const ClassCatalog& catalog,
                                    const Checkpoint& checkpoint, int workers) {
  std::vector<int> out;
  out.reserve(anchors.size());
  for (const MatchResult& m : match_all(anchors, catalog, checkpoint, workers)) out.push_back(m.chosen_index);
  return out;
}

Matrix extract_representations(std::span<const AnchorTask> anchors, const ClassCatalog& catalog,
                               const Checkpoint& checkpoint, int workers) {
  const auto matches = match_all(anchors, catalog, checkpoint, workers);
  Matrix z(static_cast<Eigen::Index>(anchors.size()), catalog.dim());
  for (std::size_t i = 0; i < matches.size(); ++i) z.row(static_cast<Eigen::Index>(i)) = matches[i].z.transpose();
  return z;
}

namespace {

struct Hasher {
  std::uint64_t h = 0xcbf29ce484222325ULL;

  void bytes(std::uint64_t bits) {
    for (int b = 0; b < 8; ++b, bits >>= 8) {
      h ^= bits & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  void real(double x) { bytes(std::bit_cast<std::uint64_t>(x)); }
  void reals(const Matrix& m) {
    bytes(static_cast<std::uint64_t>(m.rows()));
    bytes(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) real(m.data()[i]);
  }
};

}  // namespace

const Matrix& RepresentationCache::node_representations(const EmbeddedGraph& graph, const ClassCatalog& catalog,
                                                        const Checkpoint& checkpoint, int workers) {
  check_compatible(checkpoint, catalog);
  Hasher key;
  key.reals(graph.embeddings());
  for (const Edge& e : graph.edges()) key.bytes((std::uint64_t{e.u} << 32) | e.v);
  key.reals(catalog.embeddings);
  key.bytes(params_checksum(checkpoint.params));
  const Hyper& h = checkpoint.hyper;
  key.real(h.alpha);
  key.real(h.beta);
  key.bytes(static_cast<std::uint64_t>(h.k));

  if (auto it = entries_.find(key.h); it != entries_.end()) return it->second;
  std::vector<NodeId> all(graph.node_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
  const auto anchors = build_node_anchors(graph, all, h.k);
  return entries_.emplace(key.h, extract_representations(anchors, catalog, checkpoint, workers)).first->second;
}

std::vector<LinkPrediction> predict_links(std::span<const std::pair<NodeId, NodeId>> pairs,
                                          const Matrix& node_z, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("threshold T must lie in (0,1)");
  std::vector<LinkPrediction> out;
  out.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    if (u >= node_z.rows() || v >= node_z.rows()) {
      throw std::out_of_range("link pair (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
    }
    const double s = cosine_sim(node_z.row(u), node_z.row(v));
    out.push_back({u, v, s, s > threshold ? 1 : 0});
  }
  return out;
}

std::vector<LinkPrediction> zero_shot_link(std::span<const std::pair<NodeId, NodeId>> pairs,
                                           const EmbeddedGraph& graph, const ClassCatalog& catalog,
                                           const Checkpoint& checkpoint, double threshold,
                                           RepresentationCache* cache, int workers) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("threshold T must lie in (0,1)");
  for (const auto& [u, v] : pairs) {
    if (u >= graph.node_count() || v >= graph.node_count()) {
      throw std::out_of_range("link pair (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
    }
  }
  RepresentationCache local;
  RepresentationCache& c = cache ? *cache : local;
  return predict_links(pairs, c.node_representations(graph, catalog, checkpoint, workers), threshold);
}

}  // namespace boog
