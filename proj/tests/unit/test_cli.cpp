#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include "boog/commands.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace boog;
using namespace testing_support;
using nlohmann::json;

namespace {

const std::filesystem::path kDir = scratch_dir("cli");

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Runs the CLI with stdout captured to `out_name` in the scratch dir.
int run(const std::string& args, const std::string& out_name = "stdout.txt", const std::string& env = "") {
  const std::string cmd = env + " " + BOOG_CLI_PATH + " " + args + " > " + (kDir / out_name).string() + " 2> " +
                          (kDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json last_json(const std::string& out_name) {
  const std::string text = slurp(kDir / out_name);
  const auto end = text.find_last_not_of('\n');
  const auto start = text.rfind('\n', end);
  return json::parse(text.substr(start == std::string::npos ? 0 : start + 1, end - start));
}

std::string p(const std::string& name) { return (kDir / name).string(); }

const std::string& small_dataset() {
  static const std::string path = [] {
    const std::string out = p("small.json");
    REQUIRE(run("synth --n 90 --dim 8 --seed 1 --out " + out) == 0);
    return out;
  }();
  return path;
}

const std::string& small_checkpoint() {
  static const std::string path = [] {
    const std::string out = p("small.ckpt");
    REQUIRE(run("pretrain --dataset " + small_dataset() + " --epochs 2 --out " + out, "pretrain.txt") == 0);
    return out;
  }();
  return path;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("synth --n 90 --out " + p("ok.json")) == 0);
  CHECK(run("synth --n 2 --classes 3 --out " + p("few.json")) == 1);
  CHECK(run("synth --no-such-flag 1 --out " + p("x.json")) == 1);
  CHECK(run("pretrain --dataset " + p("absent.json") + " --out " + p("x.ckpt")) == 2);
  CHECK(run("pretrain --dataset " + small_dataset() + " --tau 0 --out " + p("x.ckpt")) == 1);

  Dataset ds = load_dataset(small_dataset());
  const EmbeddedGraph& g = ds.graph();
  ds.collection.graphs[0] = EmbeddedGraph(g.embeddings() * 1e200, g.edges(), g.labels());
  save_dataset(ds, kDir / "huge.json");
  CHECK(run("pretrain --dataset " + p("huge.json") + " --epochs 2 --out " + p("x.ckpt")) == 3);
}

TEST_CASE("synth is byte-stable and honours BOOG_SEED") {
  REQUIRE(run("synth --n 60 --seed 3 --out " + p("a.json")) == 0);
  REQUIRE(run("synth --n 60 --seed 3 --out " + p("b.json")) == 0);
  REQUIRE(run("synth --n 60 --out " + p("c.json"), "stdout.txt", "BOOG_SEED=3") == 0);
  REQUIRE(run("synth --n 60 --seed 4 --out " + p("d.json")) == 0);
  CHECK(slurp(kDir / "a.json") == slurp(kDir / "b.json"));
  CHECK(slurp(kDir / "a.json") == slurp(kDir / "c.json"));
  CHECK(slurp(kDir / "a.json") != slurp(kDir / "d.json"));
}

TEST_CASE("config files") {
  std::ofstream(kDir / "run.cfg") << "# pretraining\nepochs = 0\nseed=4\nbatch_size=16\n";
  REQUIRE(run("pretrain --config " + p("run.cfg") + " --dataset " + small_dataset() + " --out " + p("cfg.ckpt"),
              "cfg.txt") == 0);
  const Checkpoint a = load_checkpoint(kDir / "cfg.ckpt");
  CHECK(a.params.flatten() == EncoderParams::init(8, 4).flatten());
  CHECK(a.train_config.batch_size == 16);

  REQUIRE(run("pretrain --config " + p("run.cfg") + " --dataset " + small_dataset() + " --seed 5 --out " +
                  p("cfg5.ckpt"),
              "cfg.txt") == 0);
  CHECK(load_checkpoint(kDir / "cfg5.ckpt").params.flatten() == EncoderParams::init(8, 5).flatten());

  std::ofstream(kDir / "bad.cfg") << "bogus_key=1\n";
  CHECK(run("pretrain --config " + p("bad.cfg") + " --dataset " + small_dataset() + " --out " + p("x.ckpt")) == 1);
  CHECK(run("pretrain --config " + p("nope.cfg") + " --dataset " + small_dataset() + " --out " + p("x.ckpt")) == 2);
}

TEST_CASE("pretrain trace and eval") {
  const Checkpoint c = load_checkpoint(small_checkpoint());
  const std::string trace = slurp(kDir / "pretrain.txt");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 3);  // two epochs and the summary
  CHECK(json::parse(trace.substr(0, trace.find('\n'))).at("epoch") == 0);

  for (const std::string regime : {"zero-shot", "few-shot", "supervised"}) {
    CAPTURE(regime);
    REQUIRE(run("eval --dataset " + small_dataset() + " --checkpoint " + small_checkpoint() + " --regime " + regime,
                "eval1.txt") == 0);
    REQUIRE(run("eval --dataset " + small_dataset() + " --checkpoint " + small_checkpoint() + " --regime " + regime +
                    " --workers 3",
                "eval3.txt") == 0);
    const json r = last_json("eval1.txt");
    CHECK(r.at("metric") == "accuracy");
    CHECK(r.at("value").get<double>() >= 0.0);
    CHECK(slurp(kDir / "eval1.txt") == slurp(kDir / "eval3.txt"));
  }

  REQUIRE(run("synth --n 90 --dim 16 --seed 1 --out " + p("wide.json")) == 0);
  CHECK(run("eval --dataset " + p("wide.json") + " --checkpoint " + small_checkpoint()) == 1);
}

TEST_CASE("link regimes") {
  REQUIRE(run("synth --n 90 --dim 8 --task link --out " + p("link.json")) == 0);
  REQUIRE(run("pretrain --dataset " + p("link.json") + " --epochs 2 --out " + p("link.ckpt"), "lp.txt") == 0);
  for (const std::string regime : {"link-zero", "link-supervised"}) {
    REQUIRE(run("eval --dataset " + p("link.json") + " --checkpoint " + p("link.ckpt") + " --regime " + regime,
                "link.txt") == 0);
    const json r = last_json("link.txt");
    CHECK(r.at("metric") == "roc_auc");
    CHECK(r.at("value").get<double>() >= 0.0);
    CHECK(r.at("value").get<double>() <= 1.0);
  }
  CHECK(run("eval --dataset " + p("link.json") + " --checkpoint " + p("link.ckpt") +
            " --regime link-zero --threshold 1.5") == 1);
}

TEST_CASE("grid search") {
  REQUIRE(run("grid --dataset " + small_dataset() + " --epochs 1 --param lr=0.01", "grid1.txt") == 0);
  CHECK(last_json("grid1.txt").at("table").size() == 1);

  REQUIRE(run("grid --dataset " + small_dataset() + " --epochs 1 --param lr=0.01,0.05 --param tau=0.1,1",
              "grid4.txt") == 0);
  const json g = last_json("grid4.txt");
  REQUIRE(g.at("table").size() == 4);
  double top = -1.0;
  for (const json& row : g.at("table")) top = std::max(top, row.at("value").get<double>());
  CHECK(g.at("best").at("value").get<double>() == top);
}

TEST_CASE("bench with one size") {
  REQUIRE(run("bench --sizes 200 --repetitions 1", "bench.txt") == 0);
  const json b = last_json("bench.txt");
  CHECK(b.at("rows").size() == 1);
  CHECK(b.at("ratios").empty());
  CHECK(b.at("rows")[0].at("n") == 200);
}

TEST_CASE("export-repr writes BOOGEMB1") {
  REQUIRE(run("export-repr --dataset " + small_dataset() + " --checkpoint " + small_checkpoint() + " --out " +
                  p("z.bin"),
              "export.txt") == 0);
  const std::string bytes = slurp(kDir / "z.bin");
  CHECK(bytes.substr(0, 8) == "BOOGEMB1");
  const Matrix z = load_embeddings(kDir / "z.bin");
  CHECK(z.rows() == 90);
  CHECK(z.cols() == 8);
  const json r = last_json("export.txt");
  CHECK(r.at("count") == 90);
}
