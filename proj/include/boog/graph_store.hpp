#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boog/numerics.hpp"

namespace boog {

using NodeId = std::uint32_t;

enum class TaskKind { Node, Graph, Link };

const char* to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

/// Undirected edge stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Text-attributed graph after encoding: one embedding row per node.
///
/// Construction validates every invariant (endpoints in range, no
/// self-loops, no duplicate edges, one embedding row per node); an instance
/// that exists is valid. Adjacency is kept in CSR form with ascending
/// neighbor ids.
class EmbeddedGraph {
 public:
  EmbeddedGraph() = default;
  EmbeddedGraph(Matrix node_embeddings, std::vector<Edge> edges,
                std::vector<std::optional<int>> labels = {});

  std::size_t node_count() const { return static_cast<std::size_t>(embeddings_.rows()); }
  int dim() const { return static_cast<int>(embeddings_.cols()); }
  const Matrix& embeddings() const { return embeddings_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::optional<int>>& labels() const { return labels_; }

  std::span<const NodeId> neighbors(NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const;

 private:
  Matrix embeddings_;
  std::vector<Edge> edges_;
  std::vector<std::optional<int>> labels_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
};

/// Class-label embeddings, row j is class j (0-based).
struct ClassCatalog {
  std::vector<std::string> names;
  Matrix embeddings;

  int size() const { return static_cast<int>(embeddings.rows()); }
  int dim() const { return static_cast<int>(embeddings.cols()); }
};

struct GraphCollection {
  std::vector<EmbeddedGraph> graphs;
  std::vector<int> graph_labels;  // empty unless the task is graph-level
};

/// Disjoint instance id sets: node ids for node/link tasks, graph ids for
/// graph tasks.
struct DatasetSplit {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> val;
  std::vector<std::uint32_t> test;

  void validate(std::size_t instance_count) const;
};

struct Dataset {
  TaskKind task = TaskKind::Node;
  GraphCollection collection;
  ClassCatalog catalog;
  DatasetSplit split;

  int dim() const { return catalog.dim(); }
  std::size_t instance_count() const;
  /// Ground-truth class of instance i, if known.
  std::optional<int> label(std::uint32_t i) const;
  /// The single graph of a node or link dataset.
  const EmbeddedGraph& graph() const;
};

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Deterministic bag-of-tokens text embedder standing in for a sentence
/// encoder. Each whitespace token is hashed together with `seed` into a
/// pseudo-random projection; token vectors are summed and L2-normalized.
/// Empty text gives the zero vector.
Vector stub_embed(std::string_view text, int dim, std::uint64_t seed);

/// BOOGEMB1 interchange: 8 magic bytes, u32 count, u32 dim (little-endian),
/// then count*dim little-endian float32 values, row-major.
void save_embeddings(const Matrix& rows, const std::filesystem::path& path);
Matrix load_embeddings(const std::filesystem::path& path);

enum class SynthProfile { Citation, Molecule };

SynthProfile parse_synth_profile(std::string_view text);
const char* to_string(SynthProfile profile);

struct SynthOptions {
  SynthProfile profile = SynthProfile::Citation;
  /// Nodes for the citation profile, graphs for the molecule profile.
  int n = 300;
  int classes = 3;
  int dim = 16;
  double noise = 0.05;
  std::uint64_t seed = 0;
  /// Datasets generated with the same catalog seed, class count and dim
  /// share an identical class catalog.
  std::uint64_t catalog_seed = 7;
  double avg_degree = 4.0;
  /// Probability that a citation edge joins two nodes of the same class.
  double homophily = 0.95;
  /// Share of molecule atoms that carry a class-agnostic "backbone" embedding.
  double backbone_fraction = 0.0;
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  /// Node or Link for the citation profile; ignored for molecules.
  TaskKind task = TaskKind::Node;
};

ClassCatalog make_catalog(int classes, int dim, std::uint64_t catalog_seed);
Dataset generate_synthetic(const SynthOptions& options);

}  // namespace boog
