#include <gtest/gtest.h>

#include <sstream>

#include "../../tools/cli.hpp"
#include "hsnli/corpus.hpp"
#include "hsnli/io.hpp"
#include "hsnli/strategies.hpp"
#include "json.hpp"
#include "support/temp_dir.hpp"
#include "support/toy_grid.hpp"

namespace {

using namespace hsnli;

const std::string kCatalog =
    (std::filesystem::path(HSNLI_SOURCE_DIR) / "data/catalog.toml").string();

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hsnli");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  std::string path(const std::string& name) { return (dir / name).string(); }

  void write_corpus(const std::string& name, const std::vector<LabeledPost>& posts) {
    test::write_text(dir / name, to_corpus_jsonl(posts));
  }

  test::TempDir dir;
};

TEST_F(Cli, UsageErrors) {
  const auto r = cli({"sample", "--in", "x"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_EQ(r.err.rfind("error: usage: ", 0), 0u);
  EXPECT_EQ(cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(cli({"grid", "--config", "a", "--out", "b", "--jobs", "0"}).code, cli::kExitUsage);
  const auto help = cli({"--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  EXPECT_NE(help.out.find("classify"), std::string::npos);
}

TEST_F(Cli, MissingInputIsAnIoError) {
  const auto r = cli({"sample", "--in", path("absent.jsonl"), "--out", path("o.jsonl"), "--n", "3"});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_EQ(r.err.rfind("error: io: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(Cli, PreprocessNormalizesAndDownsamples) {
  std::vector<LabeledPost> posts;
  for (int i = 0; i < 100; ++i) {
    posts.push_back({"p" + std::to_string(i), "@bob see https://t.co/" + std::to_string(i),
                     i < 5 ? HateLabel::hate : HateLabel::not_hate, "en", Split::train});
  }
  write_corpus("in.jsonl", posts);
  auto r = cli({"preprocess", "--in", path("in.jsonl"), "--out", path("out.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto all = read_corpus_jsonl(dir / "out.jsonl");
  ASSERT_EQ(all.size(), 100u);
  EXPECT_EQ(all[0].text, "@user see https");

  r = cli({"preprocess", "--in", path("in.jsonl"), "--out", path("ds.jsonl"),
           "--downsample-ratio", "0.22", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kept = read_corpus_jsonl(dir / "ds.jsonl");
  const auto stats = compute_stats(kept);
  EXPECT_EQ(stats.hate_total(), 5u);
  EXPECT_EQ(kept.size(), 5u + downsample_keep_count(5, 0.22));
}

TEST_F(Cli, PreprocessChecksManifest) {
  write_corpus("in.jsonl", {{"a", "x", HateLabel::hate, "en", Split::train}});
  test::write_text(dir / "m.toml", "code = \"T\"\n[expected_sizes]\ntrain = 2\n");
  auto r = cli({"preprocess", "--in", path("in.jsonl"), "--out", path("o.jsonl"), "--manifest",
                path("m.toml")});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_EQ(r.err.rfind("error: validation: ", 0), 0u) << r.err;
  r = cli({"preprocess", "--in", path("in.jsonl"), "--out", path("o.jsonl"), "--manifest",
           path("m.toml"), "--lenient"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.err.rfind("warning: ", 0), 0u) << r.err;
}

TEST_F(Cli, SampleWritesMetadata) {
  write_corpus("in.jsonl", test::toy_posts("es", "train", Split::train, 50, 3));
  const auto r = cli({"sample", "--in", path("in.jsonl"), "--out", path("s.jsonl"), "--n", "20",
                      "--seed", "9", "--stratified"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_corpus_jsonl(dir / "s.jsonl").size(), 20u);
  const auto meta = nlohmann::json::parse(read_file(dir / "s.jsonl.meta.json"));
  EXPECT_EQ(meta["n"], 20);
  EXPECT_EQ(meta["seed"], 9);
  EXPECT_EQ(meta["hate"].get<int>() + meta["not_hate"].get<int>(), 20);
  const auto too_many =
      cli({"sample", "--in", path("in.jsonl"), "--out", path("s.jsonl"), "--n", "51"});
  EXPECT_EQ(too_many.code, cli::kExitError);
}

TEST_F(Cli, ConvertAndShuffle) {
  write_corpus("in.jsonl", test::toy_posts("es", "train", Split::train, 6, 3));
  auto r = cli({"convert-nli", "--in", path("in.jsonl"), "--out", path("nli.jsonl"), "--catalog",
                kCatalog, "--language", "es"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto nli = read_nli_jsonl(dir / "nli.jsonl");
  ASSERT_EQ(nli.size(), 6u);
  EXPECT_EQ(nli[0].label, NliLabel::entailment);
  EXPECT_EQ(nli[1].label, NliLabel::contradiction);

  std::string parallel;
  for (int i = 0; i < 40; ++i) {
    nlohmann::json row = {{"id", "x" + std::to_string(i)},
                          {"label", "neutral"},
                          {"premise", {{"en", "p en"}, {"es", "p es"}}},
                          {"hypothesis", {{"en", "h en"}, {"es", "h es"}}}};
    parallel += row.dump() + "\n";
  }
  test::write_text(dir / "xnli.jsonl", parallel);
  r = cli({"shuffle-xnli", "--in", path("xnli.jsonl"), "--out", path("mixed.jsonl"),
           "--languages", "en,es", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_nli_jsonl(dir / "mixed.jsonl").size(), 40u);
}

TEST_F(Cli, ClassifyThenEvaluate) {
  const auto posts = test::toy_posts("es", "test", Split::test, 30, 3);
  write_corpus("gold.jsonl", posts);
  test::write_text(dir / "mock.jsonl", test::toy_mock(0, 0));
  auto r = cli({"classify", "--backend", path("mock.jsonl"), "--catalog", kCatalog, "--in",
                path("gold.jsonl"), "--out", path("traces.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto traces = parse_traces_jsonl(read_file(dir / "traces.jsonl"));
  ASSERT_EQ(traces.size(), 30u);
  bool filtered = false;
  for (const auto& t : traces) {
    if (t.final_label == HateLabel::hate) {
      EXPECT_EQ(t.main_label, HateLabel::hate);
      EXPECT_TRUE(t.fired_filters.empty());
    }
    filtered = filtered || !t.fired_filters.empty();
  }
  EXPECT_TRUE(filtered);

  r = cli({"classify", "--backend", path("mock.jsonl"), "--catalog", kCatalog, "--in",
           path("gold.jsonl"), "--out", path("std.jsonl"), "--standard"});
  ASSERT_EQ(r.code, 0) << r.err;

  r = cli({"evaluate", "--traces", path("traces.jsonl"), "--gold", path("gold.jsonl"),
           "--resamples", "100", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto filtered_eval = nlohmann::json::parse(r.out);
  EXPECT_EQ(filtered_eval["items"], 30);
  EXPECT_TRUE(filtered_eval.contains("ci_low"));

  r = cli({"evaluate", "--traces", path("std.jsonl"), "--gold", path("gold.jsonl"), "--out",
           path("std_eval.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto standard_eval = nlohmann::json::parse(read_file(dir / "std_eval.json"));
  EXPECT_GT(filtered_eval["macro_f1"].get<double>(), standard_eval["macro_f1"].get<double>());
}

TEST_F(Cli, ClassifyMissingTranslation) {
  write_corpus("gold.jsonl", {{"a", "text", HateLabel::hate, "xx", Split::test}});
  test::write_text(dir / "mock.jsonl", test::toy_mock(0, 0));
  const auto r = cli({"classify", "--backend", path("mock.jsonl"), "--catalog", kCatalog, "--in",
                      path("gold.jsonl"), "--out", path("t.jsonl"), "--model-kind",
                      "monolingual"});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_EQ(r.err.rfind("error: missing_translation: ", 0), 0u) << r.err;
}

TEST_F(Cli, GridResumesAndReports) {
  const auto config = test::write_toy_grid(dir.path());
  auto r = cli({"grid", "--config", config.string(), "--out", path("out"), "--max-new-cells", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "cells 6 computed 6 resumed 0 failed 0 (incomplete)\n");
  r = cli({"grid", "--config", config.string(), "--out", path("out"), "--jobs", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "cells 16 computed 10 resumed 6 failed 0\n");

  test::write_text(dir / "ref.csv",
                   "table,variant,dataset,n,macro_f1\n"
                   "held_out,M+NLI,TOY_es,0,0.50\n");
  r = cli({"report", "--results", path("out/results.jsonl"), "--reference", path("ref.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("variant,TOY_es/0,", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("\nAvg. Diff.,"), std::string::npos);
  EXPECT_NE(r.err.find("warning: no reference value"), std::string::npos);
}

TEST_F(Cli, GridFailuresExitThree) {
  const auto config = test::write_toy_grid(dir.path());
  std::filesystem::remove(dir / "mocks/M+NLI/n20_s1.jsonl");
  const auto r = cli({"grid", "--config", config.string(), "--out", path("out")});
  EXPECT_EQ(r.code, cli::kExitGridFailures);
  EXPECT_EQ(r.out, "cells 16 computed 16 resumed 0 failed 4\n");
  EXPECT_NE(r.err.find("cell failed: M+NLI|es|20|held_out"), std::string::npos) << r.err;
}

TEST_F(Cli, ModelDirectoryFlagOverridesConfig) {
  const auto config = test::write_toy_grid(dir.path());
  const auto r = cli({"grid", "--config", config.string(), "--out", path("out"), "--model-dir",
                      path("nowhere"), "--max-new-cells", "1"});
  EXPECT_EQ(r.code, cli::kExitGridFailures);
}

TEST_F(Cli, ReportRejectsPercentages) {
  test::write_text(dir / "r.jsonl",
                   R"({"variant":"X+DEN","dataset":"BAS19_ES","n":20,"macro_f1":66,"ok":true})"
                   "\n");
  const auto r = cli({"report", "--results", path("r.jsonl"), "--reference",
                      (std::filesystem::path(HSNLI_SOURCE_DIR) / "references/table1.csv").string()});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_EQ(r.err.rfind("error: validation: ", 0), 0u) << r.err;
}

}  // namespace
