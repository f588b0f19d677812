#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "boog/encoder.hpp"

namespace boog {

/// Denominator of the contrastive objective. `Verbatim` sums only over the
/// C-1 sibling super nodes; `Standard` also includes the positive pair
/// (the usual NT-Xent form).
enum class LossForm { Verbatim, Standard };

const char* to_string(LossForm form);
LossForm parse_loss_form(std::string_view text);

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 0.0;  // decoupled, scaled by lr
  double dropout = 0.0;       // on neighbor embeddings, training only
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;
  Hyper hyper;
  LossForm loss_form = LossForm::Verbatim;
  /// Threads per batch. Results are bit-identical for any value.
  int workers = 1;

  void validate() const;
};

struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  EncoderParams params;
  Hyper hyper;
  TrainConfig train_config;
  double final_loss = 0.0;
  int format_version = kFormatVersion;
};

/// Contrastive loss over a batch of bundles, averaged over classes and
/// instances. Every bundle must have the same C >= 2.
double pretrain_loss(std::span<const SuperNodeBundle> bundles, double tau,
                     LossForm form = LossForm::Verbatim);

/// Loss of one instance summed over its classes (not averaged), and, when
/// `post_cotangent` is non-null, its gradient with respect to `post`.
double instance_loss(const Matrix& pre, const Matrix& post, double tau, LossForm form,
                     Matrix* post_cotangent = nullptr);

struct LossGrad {
  double loss = 0.0;
  EncoderParams grad;
};

/// Loss over the anchors (as one batch) and its exact gradient with respect
/// to every encoder tensor.
LossGrad pretrain_loss_grad(std::span<const AnchorTask> anchors, const Matrix& classes,
                            const EncoderParams& params, const Hyper& hyper,
                            LossForm form = LossForm::Verbatim, int workers = 1);

/// Forward-only objective over the anchors (as one batch).
double pretrain_objective(std::span<const AnchorTask> anchors, const Matrix& classes,
                          const EncoderParams& params, const Hyper& hyper,
                          LossForm form = LossForm::Verbatim, int workers = 1);

struct PretrainRun {
  Checkpoint checkpoint;
  double initial_loss = 0.0;
  std::vector<double> loss_trace;  // mean minibatch loss per epoch
};

/// Self-supervised training on the train-split instances. Deterministic
/// given `config.seed`. Throws NumericalError naming epoch and batch when
/// the loss goes non-finite.
PretrainRun run_pretraining(const Dataset& ds, const TrainConfig& config,
                            const std::function<void(int, double)>& on_epoch = {});

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Content hash of the encoder tensors (FNV-1a over their bytes).
std::uint64_t params_checksum(const EncoderParams& params);

}  // namespace boog
