// boog: synthetic data, pre-training, evaluation, grid search and scaling
// benchmark for the super-node graph encoder.
//
// Machine-readable output is JSON on stdout; diagnostics go to stderr.
// Exit codes: 0 ok, 1 validation/parameter, 2 I/O, 3 numerical.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "boog/commands.hpp"

namespace {

using nlohmann::json;
using namespace boog;

/// Expands `--config FILE` (flat key=value lines) into `--key value` tokens
/// placed right after the subcommand, so explicit flags later on the command
/// line override them.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> injected;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      continue;
    }
    --i;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line.erase(0, line.find_first_not_of(" \t\r"));
      line.erase(line.find_last_not_of(" \t\r") + 1);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParameterError(path + ":" + std::to_string(line_no) + ": expected key=value");
      }
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      key.erase(key.find_last_not_of(" \t") + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      std::replace(key.begin(), key.end(), '_', '-');
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  if (!injected.empty()) {
    auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return !a.starts_with("-"); });
    if (sub == args.end()) throw ParameterError("--config needs a subcommand");
    args.insert(sub + 1, injected.begin(), injected.end());
  }
  return args;
}

void add_train_flags(CLI::App* cmd, TrainConfig& c, std::string& loss_form) {
  cmd->add_option("--lr", c.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--weight-decay", c.weight_decay, "Decoupled weight decay")->capture_default_str();
  cmd->add_option("--dropout", c.dropout, "Dropout on neighbor embeddings")->capture_default_str();
  cmd->add_option("--epochs", c.epochs)->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size)->capture_default_str();
  cmd->add_option("--seed", c.seed)->envname("BOOG_SEED")->capture_default_str();
  cmd->add_option("--alpha", c.hyper.alpha, "Class-label weight in super nodes")->capture_default_str();
  cmd->add_option("--beta", c.hyper.beta, "Self vs. neighborhood mix")->capture_default_str();
  cmd->add_option("--tau", c.hyper.tau, "Contrastive temperature")->capture_default_str();
  cmd->add_option("--threshold", c.hyper.threshold, "Zero-shot link threshold T")->capture_default_str();
  cmd->add_option("--k", c.hyper.k, "Neighborhood hops")->capture_default_str();
  cmd->add_option("--loss-form", loss_form, "verbatim | standard")->capture_default_str();
  cmd->add_option("--workers", c.workers, "Worker threads (results do not depend on it)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-node graph encoder: pre-training and zero/few-shot inference"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.footer("Any subcommand accepts --config FILE with flat key=value lines (keys are long flag names).");

  // synth
  SynthOptions synth;
  std::string synth_profile = "citation", synth_task = "node", synth_out;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--profile", synth_profile, "citation | molecule")->capture_default_str();
  c_synth->add_option("--n", synth.n, "Nodes (citation) or graphs (molecule)")->capture_default_str();
  c_synth->add_option("--classes", synth.classes)->capture_default_str();
  c_synth->add_option("--dim", synth.dim)->capture_default_str();
  c_synth->add_option("--noise", synth.noise)->capture_default_str();
  c_synth->add_option("--seed", synth.seed)->envname("BOOG_SEED")->capture_default_str();
  c_synth->add_option("--catalog-seed", synth.catalog_seed)->capture_default_str();
  c_synth->add_option("--avg-degree", synth.avg_degree)->capture_default_str();
  c_synth->add_option("--homophily", synth.homophily)->capture_default_str();
  c_synth->add_option("--backbone-fraction", synth.backbone_fraction, "Share of class-agnostic molecule atoms")
      ->capture_default_str();
  c_synth->add_option("--task", synth_task, "node | link (citation profile)")->capture_default_str();
  c_synth->add_option("--out", synth_out, "Output dataset JSON")->required();

  // pretrain
  TrainConfig train;
  std::string train_loss_form = "verbatim", pre_dataset, pre_out, pre_trace;
  auto* c_pre = app.add_subcommand("pretrain", "Contrastive pre-training");
  c_pre->add_option("--dataset", pre_dataset)->required();
  c_pre->add_option("--out", pre_out, "Checkpoint path")->required();
  c_pre->add_option("--trace", pre_trace, "Write the per-epoch loss trace here instead of stdout");
  add_train_flags(c_pre, train, train_loss_form);

  // eval
  cli::EvalSettings eval;
  std::string eval_regime = "zero-shot", eval_dataset, eval_ck, eval_pred, eval_results;
  double eval_threshold = -1.0;
  std::vector<int> mlp_hidden;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a frozen checkpoint");
  c_eval->add_option("--dataset", eval_dataset)->required();
  c_eval->add_option("--checkpoint", eval_ck)->required();
  c_eval->add_option("--regime", eval_regime, "zero-shot | few-shot | supervised | link-zero | link-supervised")
      ->capture_default_str();
  c_eval->add_option("--split", eval.split, "test | val")->capture_default_str();
  c_eval->add_option("--n-way", eval.n_way, "Few-shot classes (0 = all)")->capture_default_str();
  c_eval->add_option("--k-shot", eval.k_shot)->capture_default_str();
  c_eval->add_option("--threshold", eval_threshold, "Link threshold T (default: checkpoint's)");
  c_eval->add_option("--mlp-steps", eval.mlp.steps)->capture_default_str();
  c_eval->add_option("--mlp-lr", eval.mlp.lr)->capture_default_str();
  c_eval->add_option("--mlp-weight-decay", eval.mlp.weight_decay)->capture_default_str();
  c_eval->add_option("--mlp-hidden", mlp_hidden, "Hidden widths (default: one layer of width d)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->delimiter(',');
  c_eval->add_option("--seed", eval.seed)->envname("BOOG_SEED")->capture_default_str();
  c_eval->add_option("--workers", eval.workers)->capture_default_str();
  c_eval->add_option("--predictions", eval_pred, "Per-instance JSON lines");
  c_eval->add_option("--results", eval_results, "Append the metric report to this file");

  // grid
  TrainConfig grid_base;
  std::string grid_loss_form = "verbatim", grid_dataset, grid_file, grid_regime = "zero-shot";
  std::vector<std::string> grid_params;
  auto* c_grid = app.add_subcommand("grid", "Grid search on the validation split");
  c_grid->add_option("--dataset", grid_dataset)->required();
  c_grid->add_option("--grid", grid_file, "Grid spec file: key=v1,v2,... per line");
  c_grid->add_option("--param", grid_params, "Inline axis key=v1,v2,...")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  c_grid->add_option("--regime", grid_regime)->capture_default_str();
  add_train_flags(c_grid, grid_base, grid_loss_form);

  // bench
  cli::BenchSettings bench;
  auto* c_bench = app.add_subcommand("bench", "Per-size timing of encode + loss");
  c_bench->add_option("--sizes", bench.sizes, "Ascending instance counts")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->delimiter(',')
      ->capture_default_str();
  c_bench->add_option("--repetitions", bench.repetitions)->capture_default_str();
  c_bench->add_option("--seed", bench.seed)->envname("BOOG_SEED")->capture_default_str();
  c_bench->add_option("--dim", bench.dim)->capture_default_str();
  c_bench->add_option("--k", bench.k)->capture_default_str();
  c_bench->add_option("--avg-degree", bench.avg_degree)->capture_default_str();

  // export-repr
  std::string ex_dataset, ex_ck, ex_out;
  int ex_workers = 1;
  auto* c_export = app.add_subcommand("export-repr", "Dump final representations as BOOGEMB1");
  c_export->add_option("--dataset", ex_dataset)->required();
  c_export->add_option("--checkpoint", ex_ck)->required();
  c_export->add_option("--out", ex_out)->required();
  c_export->add_option("--workers", ex_workers)->capture_default_str();

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? cli::kOk : cli::kValidation;
    }

    json out;
    if (c_synth->parsed()) {
      synth.profile = parse_synth_profile(synth_profile);
      synth.task = parse_task_kind(synth_task);
      cli::cmd_synth(synth, synth_out);
      out = {{"dataset", synth_out}, {"profile", synth_profile}, {"n", synth.n}, {"seed", synth.seed}};
    } else if (c_pre->parsed()) {
      train.loss_form = parse_loss_form(train_loss_form);
      train.hyper.validate();
      if (pre_trace.empty()) {
        out = cli::cmd_pretrain(pre_dataset, train, pre_out, std::cout);
      } else {
        std::ofstream trace(pre_trace);
        if (!trace) throw IoError("cannot write trace to " + pre_trace);
        out = cli::cmd_pretrain(pre_dataset, train, pre_out, trace);
      }
    } else if (c_eval->parsed()) {
      eval.regime = cli::parse_regime(eval_regime);
      if (eval_threshold >= 0.0) eval.threshold = eval_threshold;
      if (!mlp_hidden.empty()) eval.mlp.hidden_dims = mlp_hidden;
      out = cli::cmd_eval(eval_dataset, eval_ck, eval,
                          eval_pred.empty() ? std::nullopt : std::optional<std::filesystem::path>(eval_pred),
                          eval_results.empty() ? std::nullopt : std::optional<std::filesystem::path>(eval_results));
    } else if (c_grid->parsed()) {
      grid_base.loss_form = parse_loss_form(grid_loss_form);
      std::string spec;
      if (!grid_file.empty()) {
        std::ifstream in(grid_file);
        if (!in) throw IoError("cannot open grid spec " + grid_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        spec = ss.str();
      }
      for (const auto& p : grid_params) spec += "\n" + p;
      cli::EvalSettings ge;
      ge.regime = cli::parse_regime(grid_regime);
      ge.workers = grid_base.workers;
      ge.seed = grid_base.seed;
      grid_base.validate();
      const Dataset ds = load_dataset(grid_dataset);
      out = cli::run_grid(ds, cli::parse_grid_spec(spec), grid_base, ge);
    } else if (c_bench->parsed()) {
      out = cli::run_bench(bench);
    } else if (c_export->parsed()) {
      out = cli::cmd_export_repr(ex_dataset, ex_ck, ex_out, ex_workers);
    }
    std::cout << out.dump() << std::endl;
    return cli::kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return cli::exit_code_for(e);
  }
}
