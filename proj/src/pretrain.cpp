#include "boog/pretrain.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "boog/parallel.hpp"
#include "json.hpp"

namespace boog {

using nlohmann::json;

const char* to_string(LossForm form) {
  return form == LossForm::Verbatim ? "verbatim" : "standard";
}

LossForm parse_loss_form(std::string_view text) {
  if (text == "verbatim") return LossForm::Verbatim;
  if (text == "standard") return LossForm::Standard;
  throw ParameterError("unknown loss form '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ParameterError("lr must be positive");
  if (!(weight_decay >= 0.0)) throw ParameterError("weight_decay must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("dropout must lie in [0,1)");
  if (epochs < 0) throw ParameterError("epochs must be non-negative");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (workers < 1) throw ParameterError("workers must be >= 1");
  hyper.validate();
}

// ---------------------------------------------------------------------------
// Loss

double instance_loss(const Matrix& pre, const Matrix& post, double tau, LossForm form,
                     Matrix* post_cotangent) {
  const Eigen::Index C = post.rows();
  if (C < 2) throw ContractError("contrastive loss needs at least 2 classes, got " + std::to_string(C));
  if (pre.rows() != C || pre.cols() != post.cols()) {
    throw ShapeError("instance_loss: pre " + shape_of(pre) + " vs post " + shape_of(post));
  }
  if (post_cotangent) *post_cotangent = Matrix::Zero(C, post.cols());

  // sims(j, q) = sim(post_j, post_q); positive(j) = sim(post_j, pre_j).
  Matrix sims(C, C);
  Vector positive(C);
  for (Eigen::Index j = 0; j < C; ++j) {
    positive[j] = cosine_sim(post.row(j), pre.row(j));
    for (Eigen::Index q = j + 1; q < C; ++q) {
      sims(j, q) = sims(q, j) = cosine_sim(post.row(j), post.row(q));
    }
  }

  const bool with_positive = form == LossForm::Standard;
  double total = 0.0;
  Vector terms(with_positive ? C : C - 1);
  for (Eigen::Index j = 0; j < C; ++j) {
    // terms = [positive (standard form only), negatives q != j] / tau
    Eigen::Index t = 0;
    if (with_positive) terms[t++] = positive[j] / tau;
    for (Eigen::Index q = 0; q < C; ++q) {
      if (q != j) terms[t++] = sims(j, q) / tau;
    }
    const double top = terms.maxCoeff();
    const double lse = top + std::log((terms.array() - top).exp().sum());
    total += lse - positive[j] / tau;

    if (!post_cotangent) continue;
    const Vector pi = (terms.array() - lse).exp().matrix();
    Matrix& cot = *post_cotangent;
    const double d_positive = ((with_positive ? pi[0] : 0.0) - 1.0) / tau;
    cot.row(j) += d_positive * cosine_sim_grad(post.row(j).transpose(), pre.row(j).transpose()).transpose();
    t = with_positive ? 1 : 0;
    for (Eigen::Index q = 0; q < C; ++q) {
      if (q == j) continue;
      const double w = pi[t++] / tau;
      cot.row(j) += w * cosine_sim_grad(post.row(j).transpose(), post.row(q).transpose()).transpose();
      cot.row(q) += w * cosine_sim_grad(post.row(q).transpose(), post.row(j).transpose()).transpose();
    }
  }
  return total;
}

double pretrain_loss(std::span<const SuperNodeBundle> bundles, double tau, LossForm form) {
  if (!(tau > 0.0)) throw ContractError("tau must be positive");
  if (bundles.empty()) throw ContractError("pretrain_loss: empty batch");
  const int C = bundles.front().classes();
  double total = 0.0;
  for (const SuperNodeBundle& b : bundles) {
    if (b.classes() != C) throw ShapeError("pretrain_loss: bundles disagree on class count");
    total += instance_loss(b.pre, b.post, tau, form);
  }
  return total / (static_cast<double>(C) * static_cast<double>(bundles.size()));
}

double pretrain_objective(std::span<const AnchorTask> anchors, const Matrix& classes,
                          const EncoderParams& params, const Hyper& hyper, LossForm form, int workers) {
  if (anchors.empty()) throw ContractError("pretrain_objective: empty batch");
  std::vector<double> losses(anchors.size());
  parallel_for(anchors.size(), workers, [&](std::size_t i) {
    const SuperNodeBundle b = encode<double>(anchors[i], classes, params, hyper);
    losses[i] = instance_loss(b.pre, b.post, hyper.tau, form);
  });
  double total = 0.0;
  for (double l : losses) total += l;
  return total / (static_cast<double>(classes.rows()) * static_cast<double>(anchors.size()));
}

LossGrad pretrain_loss_grad(std::span<const AnchorTask> anchors, const Matrix& classes,
                            const EncoderParams& params, const Hyper& hyper, LossForm form, int workers) {
  if (anchors.empty()) throw ContractError("pretrain_loss_grad: empty batch");
  const double scale = 1.0 / (static_cast<double>(classes.rows()) * static_cast<double>(anchors.size()));
  std::vector<double> losses(anchors.size());
  std::vector<EncoderParams> grads(anchors.size());
  parallel_for(anchors.size(), workers, [&](std::size_t i) {
    const SuperNodeBundle b = encode<double>(anchors[i], classes, params, hyper);
    Matrix cot;
    losses[i] = instance_loss(b.pre, b.post, hyper.tau, form, &cot);
    cot *= scale;
    grads[i] = encode_grad<double>(anchors[i], classes, params, hyper, cot);
  });
  LossGrad out{0.0, EncoderParams::zeros(params.dim())};
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    out.loss += losses[i];
    out.grad += grads[i];
  }
  out.loss *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

PretrainRun run_pretraining(const Dataset& ds, const TrainConfig& config,
                            const std::function<void(int, double)>& on_epoch) {
  config.validate();
  if (ds.catalog.size() < 2) throw ContractError("pre-training needs at least 2 classes");
  if (ds.split.train.empty()) throw ContractError("pre-training needs a non-empty train split");
  const Hyper& hyper = config.hyper;
  const Matrix& classes = ds.catalog.embeddings;
  const std::vector<AnchorTask> anchors = build_anchors(ds, ds.split.train, hyper.k);

  PretrainRun run;
  EncoderParams params = EncoderParams::init(ds.dim(), config.seed);
  run.initial_loss = pretrain_objective(anchors, classes, params, hyper, config.loss_form, config.workers);

  Rng rng(config.seed ^ 0x5eed5eed5eed5eedULL);
  AdamState adam = AdamState::fresh(params.size(), AdamConfig{config.lr});
  std::vector<std::size_t> order(anchors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const double keep = 1.0 - config.dropout;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size), ++batch_index) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<AnchorTask> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(anchors[order[i]]);
        if (config.dropout > 0.0) {
          Matrix& h = batch.back().neighbor_reprs;
          for (Eigen::Index r = 0; r < h.rows(); ++r)
            for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = rng.uniform() < keep ? h(r, c) / keep : 0.0;
        }
      }
      const LossGrad lg = pretrain_loss_grad(batch, classes, params, hyper, config.loss_form, config.workers);
      const Vector grad = lg.grad.flatten();
      if (!std::isfinite(lg.loss) || !all_finite(grad)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index));
      }
      Vector flat = params.flatten();
      if (config.weight_decay > 0.0) flat *= 1.0 - config.lr * config.weight_decay;
      adam_step(flat, grad, adam);
      params = EncoderParams::unflatten(ds.dim(), flat);
      epoch_loss += lg.loss * static_cast<double>(end - start);
    }
    epoch_loss /= static_cast<double>(anchors.size());
    run.loss_trace.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }

  run.checkpoint.params = std::move(params);
  run.checkpoint.hyper = hyper;
  run.checkpoint.train_config = config;
  run.checkpoint.final_loss =
      pretrain_objective(anchors, classes, run.checkpoint.params, hyper, config.loss_form, config.workers);
  if (!std::isfinite(run.checkpoint.final_loss)) {
    throw NumericalError("non-finite final loss after " + std::to_string(config.epochs) + " epochs");
  }
  return run;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

json matrix_json(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

Matrix matrix_from(const json& arr, int rows, int cols, const std::string& where) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw LoadError(LoadErrorKind::DimensionMismatch, where,
                    "expected " + std::to_string(rows * cols) + " values");
  }
  Matrix m(rows, cols);
  std::size_t at = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = arr[at++].get<double>();
  return m;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  const TrainConfig& t = c.train_config;
  const Hyper& h = c.hyper;
  json doc;
  doc["format_version"] = c.format_version;
  doc["hyper"] = {{"alpha", h.alpha}, {"beta", h.beta}, {"tau", h.tau}, {"threshold", h.threshold}, {"k", h.k}};
  doc["train_config"] = {{"lr", t.lr},         {"weight_decay", t.weight_decay},
                         {"dropout", t.dropout}, {"epochs", t.epochs},
                         {"batch_size", t.batch_size}, {"seed", t.seed},
                         {"loss_form", to_string(t.loss_form)}};
  doc["params"] = {{"dim", c.params.dim()},
                   {"W1", matrix_json(c.params.w1)},
                   {"W2", matrix_json(c.params.w2)},
                   {"W3", matrix_json(c.params.w3)},
                   {"g", matrix_json(c.params.g)}};
  doc["final_loss"] = c.final_loss;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint to " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path);
  if (!in) throw LoadError(LoadErrorKind::MissingFile, file, "cannot open checkpoint");
  Checkpoint c;
  try {
    const json doc = json::parse(in);
    c.format_version = doc.at("format_version").get<int>();
    if (c.format_version != Checkpoint::kFormatVersion) {
      throw LoadError(LoadErrorKind::VersionMismatch, file,
                      "format_version " + std::to_string(c.format_version) + ", expected " +
                          std::to_string(Checkpoint::kFormatVersion));
    }
    const json& h = doc.at("hyper");
    c.hyper = Hyper{h.at("alpha").get<double>(), h.at("beta").get<double>(), h.at("tau").get<double>(),
                    h.at("threshold").get<double>(), h.at("k").get<int>()};
    const json& t = doc.at("train_config");
    c.train_config.lr = t.at("lr").get<double>();
    c.train_config.weight_decay = t.at("weight_decay").get<double>();
    c.train_config.dropout = t.at("dropout").get<double>();
    c.train_config.epochs = t.at("epochs").get<int>();
    c.train_config.batch_size = t.at("batch_size").get<int>();
    c.train_config.seed = t.at("seed").get<std::uint64_t>();
    c.train_config.loss_form = parse_loss_form(t.at("loss_form").get<std::string>());
    c.train_config.hyper = c.hyper;
    const json& p = doc.at("params");
    const int d = p.at("dim").get<int>();
    if (d < 1) throw LoadError(LoadErrorKind::DimensionMismatch, file + ": params.dim", "must be positive");
    c.params.w1 = matrix_from(p.at("W1"), d, d, file + ": params.W1");
    c.params.w2 = matrix_from(p.at("W2"), d, d, file + ": params.W2");
    c.params.w3 = matrix_from(p.at("W3"), d, d, file + ": params.W3");
    c.params.g = matrix_from(p.at("g"), 2 * d, 1, file + ": params.g");
    c.final_loss = doc.at("final_loss").get<double>();
  } catch (const json::exception& e) {
    throw LoadError(LoadErrorKind::Malformed, file, e.what());
  } catch (const ParameterError& e) {
    throw LoadError(LoadErrorKind::Malformed, file, e.what());
  }
  c.params.validate();
  return c;
}

std::uint64_t params_checksum(const EncoderParams& params) {
  const Vector flat = params.flatten();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(flat[i]);
    for (int b = 0; b < 8; ++b, bits >>= 8) {
      h ^= bits & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace boog
