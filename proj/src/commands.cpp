#include "boog/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace boog::cli {

using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (const auto* le = dynamic_cast<const LoadError*>(&e)) {
    return le->kind() == LoadErrorKind::MissingFile ? kIo : kValidation;
  }
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
  return kValidation;
}

std::vector<int> instance_labels(const Dataset& ds) {
  std::vector<int> labels(ds.instance_count(), -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (auto y = ds.label(static_cast<std::uint32_t>(i))) labels[i] = *y;
  }
  return labels;
}

// ---------------------------------------------------------------------------

void cmd_synth(const SynthOptions& options, const std::filesystem::path& out) {
  save_dataset(generate_synthetic(options), out);
}

json cmd_pretrain(const std::filesystem::path& dataset, const TrainConfig& config,
                  const std::filesystem::path& out, std::ostream& trace) {
  config.validate();
  const Dataset ds = load_dataset(dataset);
  const PretrainRun run = run_pretraining(ds, config, [&](int epoch, double loss) {
    trace << json{{"epoch", epoch}, {"loss", loss}}.dump() << '\n';
  });
  save_checkpoint(run.checkpoint, out);
  return {{"checkpoint", out.string()},
          {"epochs", config.epochs},
          {"initial_loss", run.initial_loss},
          {"final_loss", run.checkpoint.final_loss}};
}

// ---------------------------------------------------------------------------

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::ZeroShot: return "zero-shot";
    case Regime::FewShot: return "few-shot";
    case Regime::Supervised: return "supervised";
    case Regime::LinkZero: return "link-zero";
    case Regime::LinkSupervised: return "link-supervised";
  }
  return "zero-shot";
}

Regime parse_regime(std::string_view text) {
  for (Regime r : {Regime::ZeroShot, Regime::FewShot, Regime::Supervised, Regime::LinkZero, Regime::LinkSupervised}) {
    if (text == to_string(r)) return r;
  }
  throw ParameterError("unknown regime '" + std::string(text) + "'");
}

namespace {

std::vector<std::uint32_t> labeled(const std::vector<std::uint32_t>& ids, const std::vector<int>& labels) {
  std::vector<std::uint32_t> out;
  for (auto id : ids) {
    if (labels[id] >= 0) out.push_back(id);
  }
  return out;
}

std::vector<int> gather(const std::vector<std::uint32_t>& ids, const std::vector<int>& labels) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(labels[id]);
  return out;
}

json vec_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) p.row(i) = softmax(logits.row(i).transpose()).transpose();
  return p;
}

struct ClassificationResult {
  std::vector<std::uint32_t> ids;
  std::vector<int> predicted;
  Matrix scores;
};

ClassificationResult classify(const Dataset& ds, const Checkpoint& ck, const EvalSettings& s,
                              const std::vector<std::uint32_t>& eval_ids, const std::vector<int>& labels) {
  const int C = ds.catalog.size();
  const int k = ck.hyper.k;
  ClassificationResult r;
  auto features = [&](const std::vector<std::uint32_t>& ids) {
    return extract_representations(build_anchors(ds, ids, k), ds.catalog, ck, s.workers);
  };

  if (s.regime == Regime::ZeroShot) {
    r.ids = labeled(eval_ids, labels);
    const auto matches = match_all(build_anchors(ds, r.ids, k), ds.catalog, ck, s.workers);
    r.scores.resize(static_cast<Eigen::Index>(matches.size()), C);
    for (std::size_t i = 0; i < matches.size(); ++i) {
      r.predicted.push_back(matches[i].chosen_index);
      r.scores.row(static_cast<Eigen::Index>(i)) = matches[i].scores.transpose();
    }
    return r;
  }

  MlpParams mlp;
  if (s.regime == Regime::FewShot) {
    DatasetSplit pool = ds.split;
    pool.test = eval_ids;
    const FewShotTask task = sample_few_shot(pool, labels, C, s.n_way > 0 ? s.n_way : C, s.k_shot, s.seed);
    MlpConfig cfg = s.mlp;
    cfg.seed = s.seed;
    mlp = train_mlp(features(task.support), gather(task.support, labels), Matrix(0, ds.dim()), {}, C, cfg);
    r.ids = task.query;
  } else {
    const auto train = labeled(ds.split.train, labels);
    const auto val = labeled(ds.split.val, labels);
    if (train.empty()) throw ContractError("supervised regime needs labeled train instances");
    MlpConfig cfg = s.mlp;
    cfg.seed = s.seed;
    const Matrix val_z = val.empty() ? Matrix(0, ds.dim()) : features(val);
    mlp = train_mlp(features(train), gather(train, labels), val_z, gather(val, labels), C, cfg);
    r.ids = labeled(eval_ids, labels);
  }
  const Matrix z = features(r.ids);
  r.predicted = predict_mlp(z, mlp);
  r.scores = softmax_rows(mlp.logits(z));
  return r;
}

}  // namespace

json run_eval(const Dataset& ds, const Checkpoint& checkpoint, const EvalSettings& s, std::ostream* predictions) {
  check_compatible(checkpoint, ds.catalog);
  if (s.split != "test" && s.split != "val") throw ParameterError("eval split must be 'test' or 'val'");
  const std::uint64_t checksum = params_checksum(checkpoint.params);
  const auto& eval_ids = s.split == "test" ? ds.split.test : ds.split.val;
  const std::vector<int> labels = instance_labels(ds);

  json report{{"task", to_string(ds.task)}, {"regime", to_string(s.regime)}, {"seed", s.seed}};

  if (s.regime == Regime::LinkZero || s.regime == Regime::LinkSupervised) {
    if (ds.task == TaskKind::Graph) throw ParameterError("link regimes need a node or link dataset");
    // Edge fractions follow the dataset's node split proportions.
    const double n = static_cast<double>(ds.graph().node_count());
    const LinkSplit ls = make_link_split(ds.graph(), static_cast<double>(ds.split.train.size()) / n,
                                         static_cast<double>(ds.split.val.size()) / n, s.seed);
    RepresentationCache cache;
    const Matrix& z = cache.node_representations(ls.observed, ds.catalog, checkpoint, s.workers);
    const LinkPairs& target = s.split == "test" ? ls.test : ls.val;
    const double T = s.threshold.value_or(checkpoint.hyper.threshold);
    const auto links = predict_links(target.pairs, z, T);

    std::vector<double> scores;
    std::vector<int> decided;
    if (s.regime == Regime::LinkZero) {
      for (const auto& l : links) {
        scores.push_back(l.sim);
        decided.push_back(l.predicted);
      }
      report["accuracy_at_threshold"] = accuracy(decided, target.labels);
      report["threshold"] = T;
    } else {
      auto [train_x, train_y] = pair_features(z, ls.train, true);
      auto [val_x, val_y] = pair_features(z, ls.val, false);
      auto [test_x, test_y] = pair_features(z, target, false);
      if (train_x.rows() == 0) throw ContractError("link-supervised regime needs train edges");
      MlpConfig cfg = s.mlp;
      cfg.seed = s.seed;
      if (!cfg.hidden_dims) cfg.hidden_dims = std::vector<int>{static_cast<int>(z.cols())};
      const MlpParams mlp = train_mlp(train_x, train_y, val_x, val_y, 2, cfg);
      const Vector p = positive_scores(test_x, mlp);
      scores.assign(p.data(), p.data() + p.size());
      decided = predict_mlp(test_x, mlp);
    }
    if (predictions) {
      for (std::size_t i = 0; i < links.size(); ++i) {
        json line{{"u", links[i].u}, {"v", links[i].v}, {"sim", links[i].sim}, {"predicted", decided[i]}};
        if (s.regime == Regime::LinkSupervised) line["score"] = scores[i];
        *predictions << line.dump() << '\n';
      }
    }
    report["metric"] = "roc_auc";
    report["value"] = roc_auc(scores, target.labels);
    report["n_test"] = target.pairs.size();
  } else {
    const ClassificationResult r = classify(ds, checkpoint, s, eval_ids, labels);
    if (predictions) {
      for (std::size_t i = 0; i < r.ids.size(); ++i) {
        *predictions << json{{"id", r.ids[i]},
                             {"predicted", r.predicted[i]},
                             {"scores", vec_json(r.scores.row(static_cast<Eigen::Index>(i)).transpose())}}
                            .dump()
                     << '\n';
      }
    }
    report["metric"] = "accuracy";
    report["value"] = accuracy(r.predicted, gather(r.ids, labels));
    report["n_test"] = r.ids.size();
  }

  if (params_checksum(checkpoint.params) != checksum) {
    throw ContractError("frozen checkpoint was modified during evaluation");
  }
  return report;
}

json cmd_eval(const std::filesystem::path& dataset, const std::filesystem::path& checkpoint,
              const EvalSettings& settings, const std::optional<std::filesystem::path>& predictions_out,
              const std::optional<std::filesystem::path>& results_out) {
  const Dataset ds = load_dataset(dataset);
  const Checkpoint ck = load_checkpoint(checkpoint);
  check_compatible(ck, ds.catalog);

  std::ofstream pred_file;
  if (predictions_out) {
    pred_file.open(*predictions_out);
    if (!pred_file) throw IoError("cannot write predictions to " + predictions_out->string());
  }
  json report = run_eval(ds, ck, settings, predictions_out ? &pred_file : nullptr);
  if (results_out) {
    std::ofstream res(*results_out, std::ios::app);
    if (!res) throw IoError("cannot append results to " + results_out->string());
    res << report.dump() << '\n';
  }
  return report;
}

// ---------------------------------------------------------------------------

GridSpec parse_grid_spec(std::string_view text) {
  static const std::vector<std::string> known = {"alpha", "batch_size", "beta", "dropout", "epochs",
                                                 "k",     "lr",         "tau",  "threshold", "weight_decay"};
  GridSpec grid;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError("grid line " + std::to_string(line_no) + ": expected key=values");
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ParameterError("grid line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    std::vector<double> values;
    std::istringstream vs(line.substr(eq + 1));
    std::string item;
    while (std::getline(vs, item, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw ParameterError("grid line " + std::to_string(line_no) + ": bad value '" + item + "'");
      }
    }
    if (values.empty()) throw ParameterError("grid line " + std::to_string(line_no) + ": no values");
    grid[key] = std::move(values);
  }
  return grid;
}

namespace {

void apply_axis(TrainConfig& c, const std::string& key, double v) {
  if (key == "lr") c.lr = v;
  else if (key == "weight_decay") c.weight_decay = v;
  else if (key == "dropout") c.dropout = v;
  else if (key == "epochs") c.epochs = static_cast<int>(v);
  else if (key == "batch_size") c.batch_size = static_cast<int>(v);
  else if (key == "alpha") c.hyper.alpha = v;
  else if (key == "beta") c.hyper.beta = v;
  else if (key == "tau") c.hyper.tau = v;
  else if (key == "threshold") c.hyper.threshold = v;
  else if (key == "k") c.hyper.k = static_cast<int>(v);
  else throw ParameterError("unknown grid key '" + key + "'");
}

}  // namespace

json run_grid(const Dataset& ds, const GridSpec& grid, const TrainConfig& base, EvalSettings eval) {
  eval.split = "val";
  std::vector<std::pair<std::string, std::vector<double>>> axes(grid.begin(), grid.end());
  std::size_t total = 1;
  for (const auto& [key, values] : axes) {
    if (values.empty()) throw ParameterError("grid axis '" + key + "' has no values");
    total *= values.size();
  }

  json table = json::array();
  std::optional<std::size_t> best;
  std::vector<std::vector<double>> points;
  std::vector<double> metrics;
  for (std::size_t index = 0; index < total; ++index) {
    TrainConfig cfg = base;
    std::vector<double> point;
    json config = json::object();
    std::size_t rest = index;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      const double v = it->second[rest % it->second.size()];
      rest /= it->second.size();
      point.insert(point.begin(), v);
      apply_axis(cfg, it->first, v);
      config[it->first] = v;
    }
    cfg.validate();
    const PretrainRun run = run_pretraining(ds, cfg);
    const json report = run_eval(ds, run.checkpoint, eval);
    const double value = report.at("value").get<double>();
    table.push_back({{"config", config}, {"value", value}, {"final_loss", run.checkpoint.final_loss}});
    points.push_back(point);
    metrics.push_back(value);
    const std::size_t row = points.size() - 1;
    if (!best || value > metrics[*best] || (value == metrics[*best] && point < points[*best])) best = row;
  }
  const bool link = eval.regime == Regime::LinkZero || eval.regime == Regime::LinkSupervised;
  return {{"metric", link ? "roc_auc" : "accuracy"},
          {"regime", to_string(eval.regime)},
          {"table", table},
          {"best", table.at(*best)}};
}

// ---------------------------------------------------------------------------

json run_bench(const BenchSettings& s) {
  if (s.sizes.empty()) throw ParameterError("bench: need at least one size");
  if (!std::is_sorted(s.sizes.begin(), s.sizes.end())) throw ParameterError("bench: sizes must be ascending");
  if (s.repetitions < 1) throw ParameterError("bench: repetitions must be >= 1");
  Hyper hyper;
  hyper.k = s.k;
  hyper.validate();

  std::vector<Dataset> graphs;
  for (int n : s.sizes) {
    SynthOptions o;
    o.profile = SynthProfile::Citation;
    o.n = n;
    o.classes = s.classes;
    o.dim = s.dim;
    o.avg_degree = s.avg_degree;
    o.seed = s.seed;
    graphs.push_back(generate_synthetic(o));
  }
  const EncoderParams params = EncoderParams::init(s.dim, s.seed);
  double sink = 0.0;
  auto pass = [&](const Dataset& ds) {
    const EmbeddedGraph& g = ds.graph();
    NeighborhoodFinder finder(g);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      const AnchorTask a = finder.anchor(static_cast<NodeId>(v), hyper.k);
      const SuperNodeBundle b = encode<double>(a, ds.catalog.embeddings, params, hyper);
      sink += instance_loss(b.pre, b.post, hyper.tau, LossForm::Verbatim);
    }
  };
  // Sizes are interleaved within each repetition so that slow periods of the
  // machine hit every size alike. Each measurement follows an untimed
  // warm-up pass on the same graph and repeats the pass enough times to stay
  // well above timer noise. Times are per pass.
  std::vector<std::vector<double>> times(graphs.size());
  for (int rep = 0; rep < s.repetitions; ++rep) {
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      pass(graphs[i]);
      const int passes = std::max(1, 16000 / s.sizes[i]);
      const auto start = std::chrono::steady_clock::now();
      for (int p = 0; p < passes; ++p) pass(graphs[i]);
      const auto stop = std::chrono::steady_clock::now();
      times[i].push_back(std::chrono::duration<double>(stop - start).count() / passes);
    }
  }
  if (!std::isfinite(sink)) throw NumericalError("bench: non-finite loss");

  json rows = json::array();
  std::vector<double> medians;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    std::sort(times[i].begin(), times[i].end());
    const double median = times[i][times[i].size() / 2];
    medians.push_back(median);
    rows.push_back({{"n", s.sizes[i]}, {"seconds", median}, {"per_instance", median / s.sizes[i]}});
  }
  json ratios = json::array();
  for (std::size_t i = 1; i < medians.size(); ++i) ratios.push_back(medians[i] / medians[i - 1]);
  return {{"rows", rows}, {"ratios", ratios}, {"repetitions", s.repetitions}, {"dim", s.dim}, {"k", s.k},
          {"avg_degree", s.avg_degree}};
}

// ---------------------------------------------------------------------------

json cmd_export_repr(const std::filesystem::path& dataset, const std::filesystem::path& checkpoint,
                     const std::filesystem::path& out, int workers) {
  const Dataset ds = load_dataset(dataset);
  const Checkpoint ck = load_checkpoint(checkpoint);
  check_compatible(ck, ds.catalog);
  std::vector<std::uint32_t> ids(ds.instance_count());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
  const Matrix z = extract_representations(build_anchors(ds, ids, ck.hyper.k), ds.catalog, ck, workers);
  save_embeddings(z, out);
  return {{"count", z.rows()}, {"dim", z.cols()}, {"path", out.string()}};
}

}  // namespace boog::cli
