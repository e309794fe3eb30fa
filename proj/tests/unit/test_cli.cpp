#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "wse/cli.hpp"
#include "wse/config.hpp"
#include "wse/error.hpp"
#include "wse/learn.hpp"
#include "wse/report.hpp"

using namespace wse;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "wse");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> toy_args(const test::TempDir& dir) {
  return {"--out", dir.path().string(), "-s", "corpus=" + (test::data_dir() / "toy_corpus.jsonl").string(),
          "-s", "first_sense=" + (test::data_dir() / "toy_first_sense.jsonl").string(),
          "-s", "encoder_dimension=8"};
}

std::vector<std::string> with(std::vector<std::string> args, std::initializer_list<std::string> more) {
  args.insert(args.begin(), more);
  return args;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config precedence: default, file, command line") {
  test::TempDir dir("cli");
  test::write_file(dir / "run.cfg", "# comment\nepochs = 3\n\nbatch_size=4  # trailing\n");
  const fs::path file = dir / "run.cfg";
  const RunConfig cfg = resolve_config(&file, {{"epochs", "5"}});
  CHECK(cfg.get_size("epochs") == 5);
  CHECK(cfg.source("epochs") == RunConfig::Source::kCli);
  CHECK(cfg.get_size("batch_size") == 4);
  CHECK(cfg.source("batch_size") == RunConfig::Source::kFile);
  CHECK(cfg.get_double("learning_rate") == 2e-5);
  CHECK(cfg.source("learning_rate") == RunConfig::Source::kDefault);
  CHECK(source_name(RunConfig::Source::kFile) == "file");

  CHECK_THROWS_AS(resolve_config(nullptr, {{"no_such_key", "1"}}), UsageError);
  test::write_file(dir / "unknown.cfg", "epochs = 3\nbogus = 1\n");
  try {
    RunConfig c;
    c.load_file(dir / "unknown.cfg");
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  test::write_file(dir / "bad.cfg", "epochs 3\n");
  RunConfig c;
  CHECK_THROWS_AS(c.load_file(dir / "bad.cfg"), UsageError);
  c.set("epochs", "three");
  CHECK_THROWS_AS(c.get_size("epochs"), UsageError);
  c.set("use_bias", "maybe");
  CHECK_THROWS_AS(c.get_bool("use_bias"), UsageError);
}

TEST_CASE("report round-trip") {
  test::TempDir dir("cli");
  Report r("demo");
  r.echo_config(RunConfig());
  r.provenance("note", "hello");
  r.metric("t", "row", "col", 0.125);
  r.metric("t", "row", "n", 42);
  r.write(dir.path());
  const Report back = Report::from_jsonl(dir / "demo.report.jsonl");
  CHECK(back.command() == "demo");
  CHECK(back.value("t", "row", "col") == 0.125);
  CHECK(back.metrics_jsonl() == r.metrics_jsonl());
  CHECK(back.to_table() == r.to_table());
  CHECK(test::read_file(dir / "demo.report.txt") == r.to_table());
  CHECK_THROWS_AS(r.value("t", "row", "missing"), InvariantError);
}

TEST_CASE("exit codes") {
  test::TempDir dir("cli");
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"build", "-s", "no_such_key=1"}).code == 1);
  CHECK(run({"build", "-s", "epochs"}).code == 1);
  CHECK(run({"build", "--out", dir.path().string()}).code == 1);

  const Run missing = run({"build", "--out", dir.path().string(), "-s", "corpus=/nonexistent/c.jsonl"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("missing upstream artifact") != std::string::npos);
  CHECK(run({"train", "--out", (dir / "empty").string()}).code == 2);

  // Two filtered words cannot provide 99 negatives.
  const auto args = toy_args(dir);
  REQUIRE(run(with(args, {"build"})).code == 0);
  REQUIRE(run(with(args, {"encode"})).code == 0);
  REQUIRE(run(with(args, {"train", "-s", "epochs=1"})).code == 0);
  const Run inv = run(with(args, {"eval-wse"}));
  CHECK(inv.code == 3);
  CHECK(inv.err.find("invariant") != std::string::npos);

  const Run rep = run({"report", (dir / "build.report.jsonl").string()});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("word_types") != std::string::npos);
}

TEST_CASE("toy build writes one manifest per partition set, deterministically") {
  test::TempDir a("cli");
  test::TempDir b("cli");
  REQUIRE(run(with(toy_args(a), {"build", "--seed", "11"})).code == 0);
  REQUIRE(run(with(toy_args(b), {"build", "--seed", "11"})).code == 0);
  for (int i = 0; i < 5; ++i) {
    const std::string m = "manifest_" + std::to_string(i) + ".jsonl";
    REQUIRE(fs::exists(a / m));
    CHECK(test::read_file(a / m) == test::read_file(b / m));
  }
  CHECK_FALSE(fs::exists(a / "manifest_5.jsonl"));
  CHECK(test::read_file(a / "split.jsonl") == test::read_file(b / "split.jsonl"));
  const Report r = Report::from_jsonl(a / "build.report.jsonl");
  CHECK(r.value("corpus", "input", "word_types") == 5);
  CHECK(r.value("corpus", "filtered", "word_types") == 2);
  CHECK(r.value("corpus", "filtered", "usages") == 53);
  CHECK(r.value("corpus", "filtered", "mean_senses") == 2.5);
  CHECK(r.metrics_jsonl() == Report::from_jsonl(b / "build.report.jsonl").metrics_jsonl());
}

TEST_CASE("zero epochs leave the seeded initialization") {
  test::TempDir dir("cli");
  const auto args = toy_args(dir);
  REQUIRE(run(with(args, {"build", "--seed", "4"})).code == 0);
  REQUIRE(run(with(args, {"encode", "--seed", "4"})).code == 0);
  REQUIRE(run(with(args, {"train", "--seed", "4", "-s", "epochs=0"})).code == 0);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const TransformModel init = TransformModel::initialize(8, derive_seed(4, 100 + i), 1e-3);
    CHECK(load_checkpoint(dir / ("checkpoint_" + std::to_string(i) + ".bin")) == init);
  }
}

}  // TEST_SUITE
