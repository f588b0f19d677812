#pragma once

#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "boog/downstream.hpp"
#include "json.hpp"

namespace boog::cli {

/// Process exit codes; a stable contract for scripts.
enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kNumerical = 3 };

int exit_code_for(const std::exception& e);

// synth ---------------------------------------------------------------------

void cmd_synth(const SynthOptions& options, const std::filesystem::path& out);

// pretrain ------------------------------------------------------------------

/// Trains, writes the checkpoint, streams one {"epoch","loss"} JSON line per
/// epoch to `trace`, and returns a summary.
nlohmann::json cmd_pretrain(const std::filesystem::path& dataset, const TrainConfig& config,
                            const std::filesystem::path& out, std::ostream& trace);

// eval ----------------------------------------------------------------------

enum class Regime { ZeroShot, FewShot, Supervised, LinkZero, LinkSupervised };

const char* to_string(Regime regime);
Regime parse_regime(std::string_view text);

struct EvalSettings {
  Regime regime = Regime::ZeroShot;
  /// Instances to score: "test" or "val".
  std::string split = "test";
  int n_way = 0;  // 0 = all classes
  int k_shot = 5;
  /// Zero-shot link threshold; unset uses the checkpoint's T.
  std::optional<double> threshold;
  MlpConfig mlp;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Evaluates a frozen checkpoint on a dataset. Returns the metric report
/// {task, regime, metric, value, seed, n_test}. When `predictions` is set,
/// per-instance JSON lines go there.
nlohmann::json run_eval(const Dataset& ds, const Checkpoint& checkpoint, const EvalSettings& settings,
                        std::ostream* predictions = nullptr);

nlohmann::json cmd_eval(const std::filesystem::path& dataset, const std::filesystem::path& checkpoint,
                        const EvalSettings& settings,
                        const std::optional<std::filesystem::path>& predictions_out = std::nullopt,
                        const std::optional<std::filesystem::path>& results_out = std::nullopt);

// grid ----------------------------------------------------------------------

/// Axis name -> candidate values, e.g. {"lr": {0.01, 0.1}}.
using GridSpec = std::map<std::string, std::vector<double>>;

/// Parses flat `key=v1,v2,...` lines ('#' comments allowed).
GridSpec parse_grid_spec(std::string_view text);

/// Trains one model per grid point, scores it on the validation split with
/// `eval.regime`, and picks the best (ties: lowest config, compared
/// key by key). Returns {"metric", "table": [...], "best": {...}}.
nlohmann::json run_grid(const Dataset& ds, const GridSpec& grid, const TrainConfig& base, EvalSettings eval);

// bench ---------------------------------------------------------------------

struct BenchSettings {
  std::vector<int> sizes{500, 1000, 2000, 4000};
  int repetitions = 5;
  std::uint64_t seed = 0;
  int dim = 32;
  int k = 2;
  int classes = 3;
  double avg_degree = 4.0;
};

/// Median wall-clock time of neighborhood extraction + encoding + loss over
/// all n instances, per size. Returns {"rows": [{n, seconds, per_instance}],
/// "ratios": [t(n_i+1)/t(n_i)]}.
nlohmann::json run_bench(const BenchSettings& settings);

// export-repr ---------------------------------------------------------------

/// Writes the final representation of every instance (id order) as a
/// BOOGEMB1 file. Returns {"count", "dim", "path"}.
nlohmann::json cmd_export_repr(const std::filesystem::path& dataset, const std::filesystem::path& checkpoint,
                               const std::filesystem::path& out, int workers = 1);

/// Instance labels indexed by id, -1 when unknown.
std::vector<int> instance_labels(const Dataset& ds);

}  // namespace boog::cli
