#include "boog/graph_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

namespace boog {

using nlohmann::json;

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Node: return "node";
    case TaskKind::Graph: return "graph";
    case TaskKind::Link: return "link";
  }
  return "node";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "node") return TaskKind::Node;
  if (text == "graph") return TaskKind::Graph;
  if (text == "link") return TaskKind::Link;
  throw ParameterError("unknown task kind '" + std::string(text) + "'");
}

const char* to_string(SynthProfile profile) {
  return profile == SynthProfile::Citation ? "citation" : "molecule";
}

SynthProfile parse_synth_profile(std::string_view text) {
  if (text == "citation") return SynthProfile::Citation;
  if (text == "molecule") return SynthProfile::Molecule;
  throw ParameterError("unknown synthetic profile '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// EmbeddedGraph

EmbeddedGraph::EmbeddedGraph(Matrix node_embeddings, std::vector<Edge> edges,
                             std::vector<std::optional<int>> labels)
    : embeddings_(std::move(node_embeddings)), labels_(std::move(labels)) {
  const std::size_t n = node_count();
  if (labels_.empty()) labels_.assign(n, std::nullopt);
  if (labels_.size() != n) {
    throw ContractError("graph has " + std::to_string(n) + " embedding rows but " +
                        std::to_string(labels_.size()) + " labels");
  }
  if (!all_finite(embeddings_)) throw ContractError("graph embeddings contain non-finite values");

  for (Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw ContractError("dangling endpoint in edge (" + std::to_string(e.u) + "," +
                          std::to_string(e.v) + ") of a " + std::to_string(n) + "-node graph");
    }
    if (e.u == e.v) throw ContractError("self-loop on node " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw ContractError("duplicate edge (" + std::to_string(dup->u) + "," +
                        std::to_string(dup->v) + ")");
  }
  edges_ = std::move(edges);

  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_[n]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[cursor[e.u]++] = e.v;
    adjacency_[cursor[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
  }
}

std::span<const NodeId> EmbeddedGraph::neighbors(NodeId v) const {
  if (v >= node_count()) throw std::out_of_range("node id " + std::to_string(v) + " out of range");
  return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

bool EmbeddedGraph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

// ---------------------------------------------------------------------------
// Dataset

void DatasetSplit::validate(std::size_t instance_count) const {
  std::vector<char> seen(instance_count, 0);
  auto check = [&](const std::vector<std::uint32_t>& ids, const char* name) {
    for (std::uint32_t id : ids) {
      if (id >= instance_count) {
        throw ContractError(std::string("split '") + name + "' references instance " +
                            std::to_string(id) + " of " + std::to_string(instance_count));
      }
      if (seen[id]) {
        throw ContractError("instance " + std::to_string(id) + " appears in more than one split");
      }
      seen[id] = 1;
    }
  };
  check(train, "train");
  check(val, "val");
  check(test, "test");
}

std::size_t Dataset::instance_count() const {
  if (task == TaskKind::Graph) return collection.graphs.size();
  return collection.graphs.empty() ? 0 : collection.graphs.front().node_count();
}

std::optional<int> Dataset::label(std::uint32_t i) const {
  if (task == TaskKind::Graph) {
    if (i < collection.graph_labels.size()) return collection.graph_labels[i];
    return std::nullopt;
  }
  return graph().labels().at(i);
}

const EmbeddedGraph& Dataset::graph() const {
  if (collection.graphs.size() != 1) {
    throw ContractError("node/link datasets hold exactly one graph, found " +
                        std::to_string(collection.graphs.size()));
  }
  return collection.graphs.front();
}

// ---------------------------------------------------------------------------
// Dataset JSON

namespace {

[[noreturn]] void fail(LoadErrorKind kind, const std::string& where, const std::string& detail) {
  throw LoadError(kind, where, detail);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(LoadErrorKind::Malformed, where, std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

Vector parse_vector(const json& arr, const std::string& where) {
  if (!arr.is_array()) fail(LoadErrorKind::Malformed, where, "expected an array of reals");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(LoadErrorKind::Malformed, where, "non-numeric entry");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    if (!std::isfinite(v[static_cast<Eigen::Index>(i)])) {
      fail(LoadErrorKind::InvalidRecord, where, "non-finite entry");
    }
  }
  return v;
}

std::vector<std::uint32_t> parse_ids(const json& arr, const std::string& where) {
  if (!arr.is_array()) fail(LoadErrorKind::Malformed, where, "expected an array of ids");
  std::vector<std::uint32_t> ids;
  ids.reserve(arr.size());
  for (const json& x : arr) {
    if (!x.is_number_unsigned()) fail(LoadErrorKind::Malformed, where, "ids must be non-negative integers");
    ids.push_back(x.get<std::uint32_t>());
  }
  return ids;
}

json vector_json(const Eigen::Ref<const Vector>& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path);
  if (!in) fail(LoadErrorKind::MissingFile, file, "cannot open dataset");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(LoadErrorKind::Malformed, file, e.what());
  }

  Dataset ds;
  const json& meta = require(doc, "meta", file);
  const std::string meta_where = file + ": meta";
  const json& dim_j = require(meta, "dim", meta_where);
  const json& nc_j = require(meta, "num_classes", meta_where);
  if (!dim_j.is_number_unsigned() || dim_j.get<int>() < 1) fail(LoadErrorKind::Malformed, meta_where, "dim must be a positive integer");
  if (!nc_j.is_number_unsigned() || nc_j.get<int>() < 1) fail(LoadErrorKind::Malformed, meta_where, "num_classes must be a positive integer");
  const int dim = dim_j.get<int>();
  const int num_classes = nc_j.get<int>();
  try {
    ds.task = parse_task_kind(require(meta, "task", meta_where).get<std::string>());
  } catch (const std::exception& e) {
    fail(LoadErrorKind::Malformed, meta_where + ".task", e.what());
  }

  auto side_file = [&](const char* key) -> std::optional<Matrix> {
    if (!doc.contains(key)) return std::nullopt;
    std::filesystem::path p = doc.at(key).get<std::string>();
    if (p.is_relative()) p = path.parent_path() / p;
    Matrix m = load_embeddings(p);
    if (m.rows() > 0 && m.cols() != dim) {
      fail(LoadErrorKind::DimensionMismatch, file + ": " + key,
           "embedding file dim " + std::to_string(m.cols()) + " but meta.dim is " + std::to_string(dim));
    }
    return m;
  };
  const std::optional<Matrix> class_file = side_file("class_embeddings_file");
  const std::optional<Matrix> node_file = side_file("node_embeddings_file");

  // classes
  const json& classes = require(doc, "classes", file);
  if (!classes.is_array()) fail(LoadErrorKind::Malformed, file + ": classes", "expected an array");
  if (static_cast<int>(classes.size()) != num_classes) {
    fail(LoadErrorKind::CountMismatch, file + ": classes",
         std::to_string(classes.size()) + " classes but meta.num_classes is " + std::to_string(num_classes));
  }
  ds.catalog.embeddings.resize(num_classes, dim);
  for (int j = 0; j < num_classes; ++j) {
    const std::string where = file + ": classes[" + std::to_string(j) + "]";
    const json& cls = classes[static_cast<std::size_t>(j)];
    ds.catalog.names.push_back(require(cls, "name", where).get<std::string>());
    Vector emb;
    if (cls.contains("embedding")) {
      emb = parse_vector(cls.at("embedding"), where + ".embedding");
    } else if (class_file) {
      if (j >= class_file->rows()) fail(LoadErrorKind::CountMismatch, where, "class embedding file has too few rows");
      emb = class_file->row(j).transpose();
    } else {
      fail(LoadErrorKind::Malformed, where, "missing field 'embedding'");
    }
    if (emb.size() != dim) {
      fail(LoadErrorKind::DimensionMismatch, where,
           "class embedding dim " + std::to_string(emb.size()) + " but node dim is " + std::to_string(dim));
    }
    ds.catalog.embeddings.row(j) = emb.transpose();
  }

  // graphs
  const json& graphs = require(doc, "graphs", file);
  if (!graphs.is_array()) fail(LoadErrorKind::Malformed, file + ": graphs", "expected an array");
  Eigen::Index file_row = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const std::string where = file + ": graphs[" + std::to_string(gi) + "]";
    const json& g = graphs[gi];

    std::vector<std::optional<int>> labels;
    if (g.contains("labels")) {
      const json& lj = g.at("labels");
      if (!lj.is_array()) fail(LoadErrorKind::Malformed, where + ".labels", "expected an array");
      for (std::size_t i = 0; i < lj.size(); ++i) {
        if (lj[i].is_null()) {
          labels.emplace_back(std::nullopt);
        } else if (lj[i].is_number_integer()) {
          const int y = lj[i].get<int>();
          if (y < 0 || y >= num_classes) {
            fail(LoadErrorKind::InvalidRecord, where + ".labels[" + std::to_string(i) + "]",
                 "label " + std::to_string(y) + " outside [0," + std::to_string(num_classes) + ")");
          }
          labels.emplace_back(y);
        } else {
          fail(LoadErrorKind::Malformed, where + ".labels[" + std::to_string(i) + "]", "expected int or null");
        }
      }
    }

    Matrix emb;
    if (g.contains("embeddings")) {
      const json& ej = g.at("embeddings");
      if (!ej.is_array()) fail(LoadErrorKind::Malformed, where + ".embeddings", "expected an array");
      emb.resize(static_cast<Eigen::Index>(ej.size()), dim);
      for (std::size_t i = 0; i < ej.size(); ++i) {
        const std::string row_where = where + ".embeddings[" + std::to_string(i) + "]";
        Vector row = parse_vector(ej[i], row_where);
        if (row.size() != dim) {
          fail(LoadErrorKind::DimensionMismatch, row_where,
               "node embedding dim " + std::to_string(row.size()) + " but meta.dim is " + std::to_string(dim));
        }
        emb.row(static_cast<Eigen::Index>(i)) = row.transpose();
      }
    } else if (node_file) {
      const auto count = static_cast<Eigen::Index>(labels.size());
      if (!g.contains("labels")) fail(LoadErrorKind::Malformed, where, "labels are required to size rows taken from node_embeddings_file");
      if (file_row + count > node_file->rows()) fail(LoadErrorKind::CountMismatch, where, "node embedding file has too few rows");
      emb = node_file->middleRows(file_row, count);
      file_row += count;
    } else {
      fail(LoadErrorKind::Malformed, where, "missing field 'embeddings'");
    }
    if (labels.empty()) labels.assign(static_cast<std::size_t>(emb.rows()), std::nullopt);
    if (static_cast<Eigen::Index>(labels.size()) != emb.rows()) {
      fail(LoadErrorKind::CountMismatch, where,
           std::to_string(labels.size()) + " labels for " + std::to_string(emb.rows()) + " nodes");
    }

    std::vector<Edge> edges;
    const json& ej = require(g, "edges", where);
    if (!ej.is_array()) fail(LoadErrorKind::Malformed, where + ".edges", "expected an array");
    std::set<std::pair<NodeId, NodeId>> seen;
    for (std::size_t k = 0; k < ej.size(); ++k) {
      const std::string edge_where = where + ".edges[" + std::to_string(k) + "]";
      const json& e = ej[k];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
        fail(LoadErrorKind::Malformed, edge_where, "expected [u, v] with non-negative ids");
      }
      NodeId u = e[0].get<NodeId>();
      NodeId v = e[1].get<NodeId>();
      if (u >= emb.rows() || v >= emb.rows()) {
        fail(LoadErrorKind::DanglingEndpoint, edge_where,
             "edge (" + std::to_string(u) + "," + std::to_string(v) + ") in a " +
                 std::to_string(emb.rows()) + "-node graph");
      }
      if (u == v) fail(LoadErrorKind::InvalidRecord, edge_where, "self-loop");
      if (u > v) std::swap(u, v);
      if (!seen.emplace(u, v).second) fail(LoadErrorKind::InvalidRecord, edge_where, "duplicate edge");
      edges.push_back({u, v});
    }
    ds.collection.graphs.emplace_back(std::move(emb), std::move(edges), std::move(labels));
  }

  if (ds.task == TaskKind::Graph) {
    const json& gl = require(doc, "graph_labels", file);
    if (!gl.is_array() || gl.size() != graphs.size()) {
      fail(LoadErrorKind::CountMismatch, file + ": graph_labels", "need one label per graph");
    }
    for (std::size_t i = 0; i < gl.size(); ++i) {
      if (!gl[i].is_number_integer() || gl[i].get<int>() < 0 || gl[i].get<int>() >= num_classes) {
        fail(LoadErrorKind::InvalidRecord, file + ": graph_labels[" + std::to_string(i) + "]",
             "label must be an integer in [0," + std::to_string(num_classes) + ")");
      }
      ds.collection.graph_labels.push_back(gl[i].get<int>());
    }
  } else if (ds.collection.graphs.size() != 1) {
    fail(LoadErrorKind::InvalidRecord, file + ": graphs",
         "node/link datasets must contain exactly one graph");
  }

  const json& splits = require(doc, "splits", file);
  ds.split.train = parse_ids(require(splits, "train", file + ": splits"), file + ": splits.train");
  ds.split.val = parse_ids(require(splits, "val", file + ": splits"), file + ": splits.val");
  ds.split.test = parse_ids(require(splits, "test", file + ": splits"), file + ": splits.test");
  try {
    ds.split.validate(ds.instance_count());
  } catch (const ContractError& e) {
    fail(LoadErrorKind::InvalidRecord, file + ": splits", e.what());
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  json doc;
  doc["meta"] = {{"dim", ds.dim()}, {"num_classes", ds.catalog.size()}, {"task", to_string(ds.task)}};
  json classes = json::array();
  for (int j = 0; j < ds.catalog.size(); ++j) {
    classes.push_back({{"name", ds.catalog.names.at(static_cast<std::size_t>(j))},
                       {"embedding", vector_json(ds.catalog.embeddings.row(j).transpose())}});
  }
  doc["classes"] = std::move(classes);
  json graphs = json::array();
  for (const EmbeddedGraph& g : ds.collection.graphs) {
    json edges = json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
    json labels = json::array();
    for (const auto& y : g.labels()) labels.push_back(y ? json(*y) : json(nullptr));
    json emb = json::array();
    for (Eigen::Index i = 0; i < g.embeddings().rows(); ++i) {
      emb.push_back(vector_json(g.embeddings().row(i).transpose()));
    }
    graphs.push_back({{"edges", std::move(edges)}, {"labels", std::move(labels)}, {"embeddings", std::move(emb)}});
  }
  doc["graphs"] = std::move(graphs);
  if (ds.task == TaskKind::Graph) doc["graph_labels"] = ds.collection.graph_labels;
  doc["splits"] = {{"train", ds.split.train}, {"val", ds.split.val}, {"test", ds.split.test}};

  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset to " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Stub embedder

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Vector stub_embed(std::string_view text, int dim, std::uint64_t seed) {
  if (dim < 1) throw ParameterError("stub_embed: dim must be positive");
  Vector out = Vector::Zero(dim);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::uint64_t state = fnv1a(text.substr(start, i - start));
    std::uint64_t mix = seed;
    state ^= splitmix64(mix);
    for (int k = 0; k < dim; ++k) {
      out[k] += static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
    }
  }
  const double norm = out.norm();
  if (norm > 0.0) out /= norm;
  return out;
}

// ---------------------------------------------------------------------------
// Binary embedding files

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'O', 'O', 'G', 'E', 'M', 'B', '1'};

void put_u32(std::string& buf, std::uint32_t x) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((x >> (8 * b)) & 0xFF));
}

std::uint32_t get_u32(const std::string& buf, std::size_t at) {
  std::uint32_t x = 0;
  for (int b = 0; b < 4; ++b) {
    x |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + static_cast<std::size_t>(b)])) << (8 * b);
  }
  return x;
}

}  // namespace

void save_embeddings(const Matrix& rows, const std::filesystem::path& path) {
  if (!all_finite(rows)) throw ContractError("save_embeddings: non-finite values");
  std::string buf(kMagic.begin(), kMagic.end());
  put_u32(buf, static_cast<std::uint32_t>(rows.rows()));
  put_u32(buf, static_cast<std::uint32_t>(rows.cols()));
  buf.reserve(buf.size() + static_cast<std::size_t>(rows.size()) * 4);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(rows(i, j))));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embeddings to " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Matrix load_embeddings(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(LoadErrorKind::MissingFile, file, "cannot open embedding file");
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), buf.begin())) {
    fail(LoadErrorKind::BadMagic, file, "expected BOOGEMB1 header");
  }
  if (buf.size() < 16) fail(LoadErrorKind::Truncated, file, "header shorter than 16 bytes");
  const std::uint32_t count = get_u32(buf, 8);
  const std::uint32_t dim = get_u32(buf, 12);
  if (count > 0 && dim == 0) fail(LoadErrorKind::CountMismatch, file, "non-empty file with dim 0");
  const std::uint64_t expected = 16 + std::uint64_t{count} * dim * 4;
  if (buf.size() < expected) {
    fail(LoadErrorKind::Truncated, file,
         "payload holds " + std::to_string(buf.size() - 16) + " bytes, header promises " +
             std::to_string(expected - 16));
  }
  if (buf.size() > expected) {
    fail(LoadErrorKind::CountMismatch, file, std::to_string(buf.size() - expected) + " trailing bytes");
  }
  Matrix out(count, dim);
  std::size_t at = 16;
  for (std::uint32_t i = 0; i < count; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j, at += 4) {
      const float x = std::bit_cast<float>(get_u32(buf, at));
      if (!std::isfinite(x)) {
        fail(LoadErrorKind::InvalidRecord, file + ": row " + std::to_string(i), "non-finite value");
      }
      out(i, j) = static_cast<double>(x);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

const std::array<const char*, 7> kClassNames = {
    "Case_Based",         "Genetic_Algorithms", "Neural_Networks", "Probabilistic_Methods",
    "Reinforcement_Learning", "Rule_Learning",  "Theory"};

// Small fixed topologies reused across molecule graphs.
struct Template {
  int nodes;
  std::vector<std::pair<int, int>> bonds;
};

std::vector<Template> molecule_templates() {
  return {
      {6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}}},                          // ring
      {5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}},                                          // chain
      {5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}},                                          // star
      {7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {4, 5}, {5, 6}}},                  // ring + tail
      {10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {4, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 5}}},  // fused rings
  };
}

Vector noisy(const Eigen::Ref<const Vector>& center, double noise, Rng& rng) {
  Vector v = center;
  if (noise > 0.0) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] += noise * rng.normal();
  }
  return v;
}

DatasetSplit random_split(std::size_t count, double train_fraction, double val_fraction, Rng& rng) {
  std::vector<std::uint32_t> ids(count);
  for (std::size_t i = 0; i < count; ++i) ids[i] = static_cast<std::uint32_t>(i);
  rng.shuffle(ids);
  const auto n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(count));
  const auto n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(count));
  DatasetSplit split;
  split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                   ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace

ClassCatalog make_catalog(int classes, int dim, std::uint64_t catalog_seed) {
  if (classes < 1 || dim < 1) throw ParameterError("catalog needs at least one class and dim >= 1");
  ClassCatalog catalog;
  catalog.embeddings.resize(classes, dim);
  for (int j = 0; j < classes; ++j) {
    std::string name = j < static_cast<int>(kClassNames.size())
                           ? kClassNames[static_cast<std::size_t>(j)]
                           : "Class_" + std::to_string(j);
    catalog.embeddings.row(j) = stub_embed(name, dim, catalog_seed).transpose();
    catalog.names.push_back(std::move(name));
  }
  return catalog;
}

Dataset generate_synthetic(const SynthOptions& o) {
  if (o.classes < 1) throw ParameterError("synth: need at least one class");
  if (o.n < o.classes) {
    throw ParameterError("synth: n (" + std::to_string(o.n) + ") must be >= classes (" +
                         std::to_string(o.classes) + ")");
  }
  if (o.dim < 1) throw ParameterError("synth: dim must be positive");
  if (o.noise < 0.0) throw ParameterError("synth: noise must be non-negative");
  if (o.train_fraction <= 0.0 || o.val_fraction < 0.0 || o.train_fraction + o.val_fraction >= 1.0) {
    throw ParameterError("synth: split fractions must leave a non-empty test split");
  }

  Rng rng(o.seed);
  Dataset ds;
  ds.catalog = make_catalog(o.classes, o.dim, o.catalog_seed);
  const Matrix& centers = ds.catalog.embeddings;

  if (o.profile == SynthProfile::Citation) {
    if (o.task == TaskKind::Graph) throw ParameterError("synth: citation profile produces node or link tasks");
    if (o.homophily < 0.0 || o.homophily > 1.0) throw ParameterError("synth: homophily must lie in [0,1]");
    ds.task = o.task;
    const auto n = static_cast<std::size_t>(o.n);
    std::vector<std::optional<int>> labels(n);
    std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(o.classes));
    Matrix emb(o.n, o.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const int y = static_cast<int>(i % static_cast<std::size_t>(o.classes));
      labels[i] = y;
      members[static_cast<std::size_t>(y)].push_back(static_cast<NodeId>(i));
      emb.row(static_cast<Eigen::Index>(i)) = noisy(centers.row(y).transpose(), o.noise, rng).transpose();
    }

    const auto target = static_cast<std::size_t>(std::llround(o.avg_degree * static_cast<double>(n) / 2.0));
    std::set<std::pair<NodeId, NodeId>> edge_set;
    for (std::size_t attempt = 0; edge_set.size() < target && attempt < 20 * target + 100; ++attempt) {
      const auto u = static_cast<NodeId>(rng.below(n));
      const int yu = *labels[u];
      NodeId v;
      if (o.classes == 1 || rng.uniform() < o.homophily) {
        const auto& same = members[static_cast<std::size_t>(yu)];
        v = same[rng.below(same.size())];
      } else {
        v = static_cast<NodeId>(rng.below(n));
        if (*labels[v] == yu) continue;
      }
      if (u == v) continue;
      edge_set.emplace(std::min(u, v), std::max(u, v));
    }
    std::vector<Edge> edges;
    edges.reserve(edge_set.size());
    for (const auto& [u, v] : edge_set) edges.push_back({u, v});
    ds.collection.graphs.emplace_back(std::move(emb), std::move(edges), std::move(labels));
    ds.split = random_split(n, o.train_fraction, o.val_fraction, rng);
    return ds;
  }

  if (o.backbone_fraction < 0.0 || o.backbone_fraction > 1.0) {
    throw ParameterError("synth: backbone fraction must lie in [0,1]");
  }
  ds.task = TaskKind::Graph;
  const auto templates = molecule_templates();
  const Vector backbone = stub_embed("carbon backbone", o.dim, o.catalog_seed);
  for (int gi = 0; gi < o.n; ++gi) {
    const int y = gi % o.classes;
    const Template& t = templates[rng.below(templates.size())];
    Matrix emb(t.nodes, o.dim);
    for (int a = 0; a < t.nodes; ++a) {
      const bool generic = rng.uniform() < o.backbone_fraction;
      emb.row(a) = noisy(generic ? backbone : Vector(centers.row(y).transpose()), o.noise, rng).transpose();
    }
    std::vector<Edge> edges;
    for (const auto& [a, b] : t.bonds) edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
    ds.collection.graphs.emplace_back(std::move(emb), std::move(edges));
    ds.collection.graph_labels.push_back(y);
  }
  ds.split = random_split(static_cast<std::size_t>(o.n), o.train_fraction, o.val_fraction, rng);
  return ds;
}

}  // namespace boog
