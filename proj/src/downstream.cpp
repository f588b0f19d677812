#include "boog/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace boog {

std::vector<int> MlpParams::hidden_dims() const {
  std::vector<int> dims;
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) dims.push_back(static_cast<int>(weights[l].rows()));
  return dims;
}

Matrix MlpParams::logits(const Matrix& features) const {
  if (features.cols() != input_dim()) {
    throw ShapeError("mlp: features " + shape_of(features) + " for input dim " + std::to_string(input_dim()));
  }
  Matrix a = features;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix z = a * weights[l].transpose();
    z.rowwise() += biases[l].transpose();
    a = l + 1 < weights.size() ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Eigen::Index MlpParams::size() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Vector MlpParams::flatten() const {
  Vector out(size());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.segment(at, weights[l].size()) = weights[l].reshaped();
    at += weights[l].size();
    out.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return out;
}

void MlpParams::assign(const Vector& flat) {
  if (flat.size() != size()) throw ShapeError("mlp: flat vector size mismatch");
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = flat.segment(at, weights[l].size());
    at += weights[l].size();
    biases[l] = flat.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

MlpParams init_mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim, std::uint64_t seed) {
  if (input_dim < 1 || output_dim < 1) throw ParameterError("mlp: dims must be positive");
  Rng rng(seed);
  MlpParams p;
  int in = input_dim;
  std::vector<int> outs = hidden_dims;
  outs.push_back(output_dim);
  for (int out : outs) {
    if (out < 1) throw ParameterError("mlp: hidden widths must be positive");
    const double bound = std::sqrt(6.0 / (in + out));
    Matrix w(out, in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(out));
    in = out;
  }
  return p;
}

double mlp_loss(const MlpParams& params, const Matrix& features, std::span<const int> labels, MlpParams* grad) {
  const auto n = features.rows();
  if (static_cast<std::size_t>(n) != labels.size()) throw ShapeError("mlp_loss: features/labels length mismatch");
  if (n == 0) throw ContractError("mlp_loss: empty batch");
  const std::size_t L = params.weights.size();

  std::vector<Matrix> acts{features};  // activations entering each layer
  std::vector<Matrix> pre;
  for (std::size_t l = 0; l < L; ++l) {
    Matrix z = acts.back() * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    pre.push_back(z);
    if (l + 1 < L) acts.push_back(z.cwiseMax(0.0));
  }
  const Matrix& logits = pre.back();
  const int C = params.output_dim();
  Matrix prob(n, C);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= C) throw ContractError("mlp_loss: label " + std::to_string(y) + " outside [0," + std::to_string(C) + ")");
    prob.row(i) = softmax(logits.row(i).transpose()).transpose();
    const double top = logits.row(i).maxCoeff();
    const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
    loss += lse - logits(i, y);
  }
  loss /= static_cast<double>(n);
  if (!grad) return loss;

  *grad = params;
  Matrix dz = prob;
  for (Eigen::Index i = 0; i < n; ++i) dz(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  dz /= static_cast<double>(n);
  for (std::size_t l = L; l-- > 0;) {
    grad->weights[l] = dz.transpose() * acts[l];
    grad->biases[l] = dz.colwise().sum().transpose();
    if (l == 0) break;
    Matrix da = dz * params.weights[l];
    dz = (pre[l - 1].array() > 0.0).select(da, 0.0);
  }
  return loss;
}

MlpParams train_mlp(const Matrix& features, std::span<const int> labels, const Matrix& val_features,
                    std::span<const int> val_labels, int output_dim, const MlpConfig& config) {
  if (features.rows() == 0) throw ContractError("train_mlp: empty training set");
  if (config.steps < 0 || !(config.lr > 0.0)) throw ParameterError("train_mlp: need steps >= 0 and lr > 0");
  const int in = static_cast<int>(features.cols());
  MlpParams mlp = init_mlp(in, config.hidden_dims.value_or(std::vector<int>{in}), output_dim, config.seed);
  AdamState adam = AdamState::fresh(mlp.size(), AdamConfig{config.lr});
  const bool has_val = val_features.rows() > 0;

  MlpParams best = mlp;
  double best_acc = -1.0;
  double best_loss = 0.0;
  MlpParams grad;
  for (int step = 0; step < config.steps; ++step) {
    mlp_loss(mlp, features, labels, &grad);
    Vector flat = mlp.flatten();
    if (config.weight_decay > 0.0) flat *= 1.0 - config.lr * config.weight_decay;
    adam_step(flat, grad.flatten(), adam);
    mlp.assign(flat);
    if (!all_finite(flat)) throw NumericalError("train_mlp: non-finite parameters at step " + std::to_string(step));
    if (has_val) {
      const double acc = accuracy(predict_mlp(val_features, mlp), val_labels);
      const double vloss = mlp_loss(mlp, val_features, val_labels);
      if (acc > best_acc || (acc == best_acc && vloss < best_loss)) {
        best = mlp;
        best_acc = acc;
        best_loss = vloss;
      }
    }
  }
  return has_val && config.steps > 0 ? best : mlp;
}

std::vector<int> predict_mlp(const Matrix& features, const MlpParams& mlp) {
  const Matrix logits = mlp.logits(features);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = static_cast<int>(j);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

Vector positive_scores(const Matrix& features, const MlpParams& mlp) {
  if (mlp.output_dim() != 2) throw ShapeError("positive_scores: need a 2-way MLP");
  const Matrix logits = mlp.logits(features);
  // softmax(l)_1 = 1 / (1 + exp(l0 - l1))
  return (1.0 / (1.0 + (logits.col(0) - logits.col(1)).array().exp())).matrix();
}

Vector link_features(const Eigen::Ref<const Vector>& z_u, const Eigen::Ref<const Vector>& z_v) {
  if (z_u.size() != z_v.size()) throw ShapeError("link_features: " + shape_of(z_u) + " vs " + shape_of(z_v));
  Vector out(z_u.size() + z_v.size());
  out << z_u, z_v;
  return out;
}

FewShotTask sample_few_shot(const DatasetSplit& split, std::span<const int> labels, int num_classes, int n_way,
                            int k_shot, std::uint64_t seed) {
  if (n_way < 1 || n_way > num_classes) {
    throw ParameterError("few-shot: N must lie in [1," + std::to_string(num_classes) + "]");
  }
  if (k_shot < 1) throw ParameterError("few-shot: K must be >= 1");
  Rng rng(seed);
  FewShotTask task{n_way, k_shot, {}, {}, {}, seed};
  std::vector<int> classes(static_cast<std::size_t>(num_classes));
  std::iota(classes.begin(), classes.end(), 0);
  if (n_way < num_classes) {
    rng.shuffle(classes);
    classes.resize(static_cast<std::size_t>(n_way));
    std::sort(classes.begin(), classes.end());
  }
  task.classes = classes;

  auto label_of = [&](std::uint32_t id) { return id < labels.size() ? labels[id] : -1; };
  for (int c : classes) {
    std::vector<std::uint32_t> pool;
    for (std::uint32_t id : split.train) {
      if (label_of(id) == c) pool.push_back(id);
    }
    if (static_cast<int>(pool.size()) < k_shot) {
      throw ParameterError("few-shot: class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                           " train instances, need K=" + std::to_string(k_shot));
    }
    // partial Fisher-Yates: the first K slots are a uniform draw without replacement
    for (int i = 0; i < k_shot; ++i) {
      const auto j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      task.support.push_back(pool[static_cast<std::size_t>(i)]);
    }
  }
  const std::set<int> chosen(classes.begin(), classes.end());
  for (std::uint32_t id : split.test) {
    if (chosen.count(label_of(id))) task.query.push_back(id);
  }
  return task;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("accuracy: length mismatch");
  if (truth.empty()) throw UndefinedMetricError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw ShapeError("roc_auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney U with mid-ranks for ties.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      const int y = truth[order[t]];
      if (y != 0 && y != 1) throw ContractError("roc_auc: truth must be binary");
      if (y == 1) {
        rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) throw UndefinedMetricError("roc_auc needs both positive and negative truth");
  const double p = static_cast<double>(positives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

LinkSplit make_link_split(const EmbeddedGraph& graph, double train_fraction, double val_fraction,
                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && val_fraction >= 0.0 && train_fraction + val_fraction < 1.0)) {
    throw ParameterError("link split: need train > 0, val >= 0 and train + val < 1");
  }
  const std::size_t n = graph.node_count();
  const std::size_t m = graph.edges().size();
  Rng rng(seed);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(m)));
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(m)));

  LinkSplit out;
  std::vector<Edge> kept;
  for (std::size_t r = 0; r < m; ++r) {
    const Edge& e = graph.edges()[order[r]];
    if (r < n_train) {
      out.train.pairs.emplace_back(e.u, e.v);
      kept.push_back(e);
    } else if (r < n_train + n_val) {
      out.val.pairs.emplace_back(e.u, e.v);
    } else {
      out.test.pairs.emplace_back(e.u, e.v);
    }
  }
  for (LinkPairs* lp : {&out.train, &out.val, &out.test}) std::sort(lp->pairs.begin(), lp->pairs.end());
  out.observed = EmbeddedGraph(graph.embeddings(), std::move(kept), graph.labels());

  // Non-edges of the full graph, drawn uniformly and never reused across splits.
  std::set<NodePair> taken;
  auto add_negatives = [&](LinkPairs& lp) {
    const std::size_t want = lp.pairs.size();
    lp.labels.assign(want, 1);
    if (n < 2) return;
    std::size_t got = 0;
    for (std::size_t attempt = 0; got < want && attempt < 50 * want + 100; ++attempt) {
      const auto u = static_cast<NodeId>(rng.below(n));
      const auto v = static_cast<NodeId>(rng.below(n));
      if (u == v || graph.has_edge(u, v)) continue;
      if (!taken.emplace(std::min(u, v), std::max(u, v)).second) continue;
      lp.pairs.emplace_back(std::min(u, v), std::max(u, v));
      lp.labels.push_back(0);
      ++got;
    }
  };
  add_negatives(out.train);
  add_negatives(out.val);
  add_negatives(out.test);
  return out;
}

std::pair<Matrix, std::vector<int>> pair_features(const Matrix& node_z, const LinkPairs& lp, bool both_orders) {
  const std::size_t per = both_orders ? 2 : 1;
  Matrix x(static_cast<Eigen::Index>(lp.pairs.size() * per), 2 * node_z.cols());
  std::vector<int> y;
  y.reserve(lp.pairs.size() * per);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < lp.pairs.size(); ++i) {
    const auto [u, v] = lp.pairs[i];
    x.row(row++) = link_features(node_z.row(u).transpose(), node_z.row(v).transpose()).transpose();
    y.push_back(lp.labels[i]);
    if (both_orders) {
      x.row(row++) = link_features(node_z.row(v).transpose(), node_z.row(u).transpose()).transpose();
      y.push_back(lp.labels[i]);
    }
  }
  return {std::move(x), std::move(y)};
}

}  // namespace boog
