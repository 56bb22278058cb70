#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <sys/wait.h>

#include "support.hpp"
#include "ttr/cli.hpp"

using namespace ttr;
using namespace ttr::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

/// Generated corpus, vectors and trained models shared by every case.
const fs::path& workspace() {
  static const fs::path dir = [] {
    const fs::path d = scratch_dir("cli");
    const Run gen = run({"gen-corpus", (d / "corpus").string(), "--size", "14"});
    REQUIRE(gen.code == 0);
    const Run train = run({"--models-dir", (d / "models").string(), "train", "all", (d / "corpus").string(),
                           "--epochs", "20"});
    REQUIRE(train.code == 0);
    return d;
  }();
  return dir;
}

std::vector<std::string> common() {
  return {"--embeddings", (workspace() / "corpus" / "embeddings.txt").string(), "--models-dir",
          (workspace() / "models").string()};
}

Run with_common(std::vector<std::string> rest, const std::string& input = "") {
  auto args = common();
  args.insert(args.end(), rest.begin(), rest.end());
  return run(args, input);
}

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("gen-corpus and train write their artifacts") {
  const auto& d = workspace();
  for (const char* f : {"corpus/embeddings.txt", "corpus/states.tsv", "models/task.crf", "models/argument.crf",
                        "models/semantic.crf"}) {
    CHECK(fs::exists(d / f));
  }
  const Run zero = run({"--models-dir", (d / "zero").string(), "train", "semantic",
                        (d / "corpus" / "semantic.tsv").string(), "--epochs", "0"});
  CHECK(zero.code == 0);
  const auto m = crf::CrfModel::load(d / "zero" / "semantic.crf");
  for (double w : m.feature_weights()) REQUIRE(w == 0.0);
  CHECK(contains(zero.out, "epoch 0 objective"));
}

TEST_CASE("input errors exit with code 2") {
  CHECK(run({"train", "semantic", "/nonexistent/data.tsv"}).code == 2);
  CHECK(run({"train", "bogus", "x"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--no-such-flag"}).code == 2);
  CHECK(with_common({"ground", "take the cup", "/nonexistent/scene.json"}).code == 2);
  CHECK(run({"--embeddings", "/nonexistent/e.txt", "eval", fixture("states.tsv").string()}).code == 2);

  const auto dir = scratch_dir("cli-bad");
  {
    std::ofstream bad(dir / "bad.tsv");
    bad << "red\tattribute\ncup\tx\ty\n";
    std::ofstream empty(dir / "empty.tsv");
  }
  const Run r = run({"--models-dir", dir.string(), "train", "semantic", (dir / "bad.tsv").string()});
  CHECK(r.code == 2);
  CHECK(contains(r.err, ":2:"));
  CHECK(with_common({"eval", (dir / "empty.tsv").string()}).code == 2);
}

TEST_CASE("ground prints the report and the question") {
  const Run nq = with_common({"ground", "bring me the red cup", fixture("nq.json").string()});
  CHECK(nq.code == 0);
  CHECK(contains(nq.out, "task: Bringing"));
  CHECK(contains(nq.out, "plan:"));
  CHECK(contains(nq.out, "state: NQ"));
  CHECK(nq.out.ends_with("\nOk\n"));

  const Run fig = with_common({"ground", "bring me the red container", fixture("fig1_am.json").string()});
  CHECK(fig.code == 0);
  CHECK(contains(fig.out, "state: AM"));
  CHECK(contains(fig.out, "I see a container, but its blue plastic. Should I continue?"));

  const Run empty = with_common({"ground", "find the red cup", fixture("empty.json").string()});
  CHECK(empty.code == 0);
  CHECK(contains(empty.out, "state: NF"));
  CHECK(contains(empty.out, "I can't find any red cup. What should I do?"));

  const Run parse = with_common({"ground", "", fixture("nq.json").string()});
  CHECK(parse.code == 3);
  CHECK(contains(parse.err, "parse failure"));
}

TEST_CASE("dialogue exit codes follow the session outcome") {
  const auto transcript = scratch_dir("cli-transcript") / "t.log";
  auto args = [&](const char* instruction, const char* scene) {
    return std::vector<std::string>{"--transcript", transcript.string(), "dialogue", instruction,
                                    fixture(scene).string()};
  };
  const Run aa = with_common(args("turn on the lamp", "aa.json"), "the red one\n");
  CHECK(aa.code == 0);
  CHECK(contains(aa.out, "I see a red lamp and a white lamp. Which one did you mean?"));
  CHECK(contains(aa.out, "grounded: a red lamp [30, 40, 80, 120]"));
  std::ifstream t(transcript);
  std::string first;
  std::getline(t, first);
  CHECK(contains(first, "\tuser\tturn on the lamp"));

  const Run nf = with_common(args("find the red cup", "nf.json"), "abort\n");
  CHECK(nf.code == 1);
  CHECK(contains(nf.out, "(aborted)"));

  const Run ima = with_common(args("take the cup", "ima.json"), "\nyes\n");
  CHECK(ima.code == 0);
  CHECK(contains(ima.out, "I see a red cup. Should I continue?"));

  const Run eof = with_common(args("take the cup", "ima.json"), "");
  CHECK(eof.code == 1);
}

TEST_CASE("eval and tune report per-state scores") {
  const auto data = (workspace() / "corpus" / "states.tsv").string();
  const Run oracle = with_common({"--oracle-labels", "eval", data});
  CHECK(oracle.code == 0);
  const auto macro = oracle.out.find("macro avg");
  REQUIRE(macro != std::string::npos);
  CHECK(oracle.out.substr(macro, oracle.out.find('\n', macro) - macro).ends_with("1.000"));

  const auto out = scratch_dir("cli-tune") / "w.cfg";
  const Run tune = with_common({"tune", data, "--object-grid", "0.6", "--attribute-grid", "0.2",
                                "--landmark-grid", "0.1", "--other-grid", "0.1", "--alpha-grid", "0.5",
                                "--beta-grid", "0.5", "--output", out.string()});
  CHECK(tune.code == 0);
  CHECK(contains(tune.out, "evaluated 1 grid points"));
  const PipelineConfig c = load_pipeline_config(out);
  CHECK(c.weights.values == std::array<double, 4>{0.6, 0.2, 0.1, 0.1});
  CHECK(c.cutoffs.alpha == 0.5);
  CHECK(with_common({"tune", data, "--alpha-grid", "1.5"}).code == 2);

  const Run tuned = with_common({"--weights", out.string(), "eval", data});
  CHECK(tuned.code == 0);
  CHECK(contains(tuned.out, "Ambiguity state identification"));
}

TEST_CASE("the installed binary reports exit codes to the shell") {
  const std::string cmd = std::string(TTR_CLI_PATH) + " --embeddings " +
                          (workspace() / "corpus" / "embeddings.txt").string() + " --models-dir " +
                          (workspace() / "models").string() + " dialogue 'find the red cup' " +
                          fixture("nf.json").string() + " < /dev/null > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 1);
  const int help = std::system((std::string(TTR_CLI_PATH) + " --help > /dev/null").c_str());
  CHECK(WEXITSTATUS(help) == 0);
}
