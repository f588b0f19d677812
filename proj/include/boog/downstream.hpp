#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "boog/inference.hpp"

namespace boog {

/// Feed-forward classifier on frozen representations. Layer l maps
/// activations through weights[l] (out x in) and biases[l]; hidden layers
/// use ReLU, the last layer emits logits.
struct MlpParams {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  std::vector<int> hidden_dims() const;

  /// Logits, one row per input row.
  Matrix logits(const Matrix& features) const;

  Eigen::Index size() const;
  Vector flatten() const;
  /// Overwrites every tensor from `flat`, keeping the current shapes.
  void assign(const Vector& flat);
};

MlpParams init_mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim, std::uint64_t seed);

/// Mean softmax cross-entropy; fills `grad` (same shapes as `params`) when non-null.
double mlp_loss(const MlpParams& params, const Matrix& features, std::span<const int> labels,
                MlpParams* grad = nullptr);

struct MlpConfig {
  /// Hidden widths; unset means one hidden layer as wide as the input.
  std::optional<std::vector<int>> hidden_dims;
  double lr = 0.01;
  int steps = 200;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

/// Full-batch Adam on cross-entropy. Returns the parameters with the best
/// validation accuracy (ties: lower validation loss, then earlier step), or
/// the final-step parameters when there is no validation data.
MlpParams train_mlp(const Matrix& features, std::span<const int> labels, const Matrix& val_features,
                    std::span<const int> val_labels, int output_dim, const MlpConfig& config);

/// Argmax of the logits, ties to the lowest class index.
std::vector<int> predict_mlp(const Matrix& features, const MlpParams& mlp);

/// Probability of class 1 under a 2-way MLP (link scores).
Vector positive_scores(const Matrix& features, const MlpParams& mlp);

/// [z_u || z_v].
Vector link_features(const Eigen::Ref<const Vector>& z_u, const Eigen::Ref<const Vector>& z_v);

struct FewShotTask {
  int n_way = 0;
  int k_shot = 0;
  std::vector<int> classes;
  std::vector<std::uint32_t> support;
  std::vector<std::uint32_t> query;
  std::uint64_t seed = 0;
};

/// Draws K train instances per class for N classes (all classes when N == C,
/// otherwise a seeded choice of N). `labels[id]` is the class of instance id,
/// or -1 when unlabeled. The query set is the test split restricted to the
/// chosen classes.
FewShotTask sample_few_shot(const DatasetSplit& split, std::span<const int> labels, int num_classes, int n_way,
                            int k_shot, std::uint64_t seed);

class UndefinedMetricError : public ContractError {
 public:
  using ContractError::ContractError;
};

double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
double roc_auc(std::span<const double> scores, std::span<const int> truth);

using NodePair = std::pair<NodeId, NodeId>;

struct LinkPairs {
  std::vector<NodePair> pairs;
  std::vector<int> labels;  // 1 = edge, 0 = sampled non-edge
};

/// Held-out link evaluation data: a seeded random partition of the edges into
/// train/val/test positives. Only train edges remain in `observed`. Each
/// split gets as many uniformly sampled non-edges as positives.
struct LinkSplit {
  EmbeddedGraph observed;
  LinkPairs train;
  LinkPairs val;
  LinkPairs test;
};

LinkSplit make_link_split(const EmbeddedGraph& graph, double train_fraction, double val_fraction,
                          std::uint64_t seed);

/// Concatenated pair features. With `both_orders` every pair contributes
/// [z_u||z_v] and [z_v||z_u] with the same label.
std::pair<Matrix, std::vector<int>> pair_features(const Matrix& node_z, const LinkPairs& pairs, bool both_orders);

}  // namespace boog
