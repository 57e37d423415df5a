#include "cli.hpp"

#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hsnli/catalog.hpp"
#include "hsnli/corpus.hpp"
#include "hsnli/error.hpp"
#include "hsnli/grid.hpp"
#include "hsnli/io.hpp"
#include "hsnli/metrics.hpp"
#include "hsnli/mock_backend.hpp"
#include "hsnli/model.hpp"
#include "hsnli/report.hpp"
#include "hsnli/strategies.hpp"
#include "hsnli/text.hpp"
#include "json.hpp"

namespace hsnli::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorKind::io, std::string(what) + " not found: " + path.string());
  }
}

void require_exists(const fs::path& path, std::string_view what) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::io, std::string(what) + " not found: " + path.string());
  }
}

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return value != nullptr && *value != '\0' ? std::string(value) : fallback;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

HypothesisCatalog load_catalog(const std::string& path) {
  if (path.empty()) return default_hypothesis_catalog();
  require_file(path, "catalog");
  return HypothesisCatalog::load(path);
}

std::shared_ptr<const InferenceBackend> load_backend(const fs::path& path,
                                                     const HypothesisCatalog& catalog) {
  require_exists(path, "backend");
  if (fs::is_directory(path)) return load_model_backend(path);
  return std::make_shared<const MockBackend>(MockBackend::load(path, &catalog));
}

struct PreprocessArgs {
  std::string in, out, manifest;
  bool lenient = false;
  std::optional<double> ratio;
  std::uint64_t seed = 0;
};

int preprocess(const PreprocessArgs& a, std::ostream& err) {
  require_file(a.in, "input");
  const Strictness strictness = a.lenient ? Strictness::lenient : Strictness::strict;
  std::optional<DatasetManifest> manifest;
  if (!a.manifest.empty()) {
    require_file(a.manifest, "manifest");
    manifest = load_manifest(a.manifest);
  }
  LoadedDataset data = load_dataset(a.in, manifest ? &*manifest : nullptr, strictness);
  for (const auto& w : data.warnings) err << "warning: " << w << '\n';
  for (auto& post : data.posts) post.text = normalize(post.text);
  std::vector<LabeledPost> posts = std::move(data.posts);
  if (a.ratio) posts = downsample_non_hate(posts, *a.ratio, a.seed, strictness);
  write_file_atomic(a.out, to_corpus_jsonl(posts));
  return kExitOk;
}

struct SampleArgs {
  std::string in, out, split = "train";
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool stratified = false;
};

int sample(const SampleArgs& a) {
  require_file(a.in, "input");
  const auto split = parse_split(a.split);
  if (!split) throw Error(ErrorKind::validation, "unknown split \"" + a.split + "\"");
  std::vector<LabeledPost> pool;
  for (auto& post : read_corpus_jsonl(a.in)) {
    if (post.split == *split) pool.push_back(std::move(post));
  }
  const NShotSample s = sample_n_shot(pool, {a.n, a.seed, a.stratified});
  const json meta = {{"source", a.in},     {"split", a.split},       {"n", a.n},
                     {"seed", a.seed},     {"stratified", a.stratified},
                     {"hate", s.hate},     {"not_hate", s.not_hate}};
  write_file_atomic(a.out, to_corpus_jsonl(s.posts));
  write_file_atomic(a.out + ".meta.json", meta.dump(2) + "\n");
  return kExitOk;
}

struct ConvertArgs {
  std::string in, out, hypothesis, catalog, language;
};

int convert_nli(const ConvertArgs& a) {
  require_file(a.in, "input");
  std::string hypothesis = a.hypothesis;
  if (hypothesis.empty()) {
    const HypothesisCatalog catalog = load_catalog(a.catalog);
    const std::string language = a.language.empty() ? catalog.default_language() : a.language;
    const ModelKind kind = language == catalog.default_language() ? ModelKind::multilingual
                                                                  : ModelKind::monolingual;
    hypothesis = resolve_hypothesis(catalog, HypothesisSlot::main(), language, kind);
  }
  const auto posts = read_corpus_jsonl(a.in);
  write_file_atomic(a.out, to_nli_jsonl(hs_to_nli(posts, hypothesis)));
  return kExitOk;
}

struct ShuffleArgs {
  std::string in, out, languages;
  std::uint64_t seed = 0;
};

int shuffle_xnli(const ShuffleArgs& a) {
  require_file(a.in, "input");
  const auto languages = split_list(a.languages);
  const auto corpus = read_parallel_nli_jsonl(a.in);
  write_file_atomic(a.out, to_nli_jsonl(shuffle_xnli_languages(corpus, languages, a.seed)));
  return kExitOk;
}

struct ClassifyArgs {
  std::string backend, aux_backend, catalog, strategies, in, out, language;
  std::string model_kind = "multilingual";
  std::string rule = "argmax";
  double threshold = 0.5;
  bool standard = false;
};

int classify(const ClassifyArgs& a) {
  require_file(a.in, "input");
  const HypothesisCatalog catalog = load_catalog(a.catalog);
  std::optional<StrategyConfig> config;
  if (!a.standard) {
    if (a.strategies.empty()) {
      config = StrategyConfig{};
    } else {
      require_file(a.strategies, "strategy config");
      config = StrategyConfig::load(a.strategies);
    }
    check_catalog(catalog, *config);
  }
  DecisionPolicy policy;
  policy.rule = a.rule == "renormalized_threshold" ? DecisionRule::renormalized_threshold
                                                   : DecisionRule::argmax;
  policy.threshold = a.threshold;
  policy.validate();
  const ModelKind kind =
      a.model_kind == "monolingual" ? ModelKind::monolingual : ModelKind::multilingual;

  const auto main_backend = load_backend(a.backend, catalog);
  const auto aux_backend =
      a.aux_backend.empty() ? main_backend : load_backend(a.aux_backend, catalog);
  const auto posts = read_corpus_jsonl(a.in);

  std::string out;
  for (const auto& post : posts) {
    const std::string& language = a.language.empty() ? post.language : a.language;
    const StrategyInput input{post.id, post.text, language};
    const ClassificationTrace trace =
        config ? classify_with_strategies(input, *main_backend, *aux_backend, catalog, policy,
                                          *config, kind)
               : classify_standard(input, *main_backend, catalog, policy, kind);
    out += trace_to_json(trace, config ? &*config : nullptr);
    out += '\n';
  }
  write_file_atomic(a.out, out);
  return kExitOk;
}

struct EvaluateArgs {
  std::string traces, gold, out;
  std::size_t resamples = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

int evaluate(const EvaluateArgs& a, std::ostream& stdout_stream) {
  require_file(a.traces, "traces");
  require_file(a.gold, "gold corpus");
  std::map<std::string, HateLabel> gold_by_id;
  for (const auto& post : read_corpus_jsonl(a.gold)) gold_by_id.emplace(post.id, post.label);
  const auto traces = parse_traces_jsonl(read_file(a.traces));
  std::vector<HateLabel> predictions;
  std::vector<HateLabel> gold;
  for (const auto& t : traces) {
    const auto it = gold_by_id.find(t.input_id);
    if (it == gold_by_id.end()) {
      throw Error(ErrorKind::validation, "no gold label for id \"" + t.input_id + "\"");
    }
    predictions.push_back(t.final_label);
    gold.push_back(it->second);
  }
  const MacroF1 f1 = macro_f1(predictions, gold);
  json result = {{"items", predictions.size()},
                 {"macro_f1", f1.value},
                 {"f1_hate", f1.f1_hate},
                 {"f1_not_hate", f1.f1_not_hate}};
  json absent = json::array();
  for (HateLabel l : f1.absent_classes) absent.push_back(std::string(to_string(l)));
  result["absent_classes"] = absent;
  if (a.resamples > 0) {
    const std::vector<std::vector<HateLabel>> runs = {predictions};
    const Interval ci = bootstrap_ci_items(runs, gold, a.resamples, a.alpha, a.seed);
    result["ci_low"] = ci.low;
    result["ci_high"] = ci.high;
  }
  const std::string text = result.dump(2) + "\n";
  if (a.out.empty()) {
    stdout_stream << text;
  } else {
    write_file_atomic(a.out, text);
  }
  return kExitOk;
}

struct GridArgs {
  std::string config, out, model_dir;
  std::size_t jobs = 1;
  std::size_t max_new_cells = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
};

int grid(const GridArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.config, "grid config");
  GridConfig config = GridConfig::load(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.runs) config.runs = *a.runs;
  if (!a.model_dir.empty()) {
    config.model_dir = a.model_dir;
  } else if (const char* env = std::getenv("HSNLI_MODEL_DIR"); env != nullptr && *env != '\0') {
    config.model_dir = env;
  }
  config.validate();

  const HypothesisCatalog catalog =
      config.catalog.empty() ? default_hypothesis_catalog() : HypothesisCatalog::load(config.catalog);
  const StrategyConfig strategies =
      config.strategies.empty() ? StrategyConfig{} : StrategyConfig::load(config.strategies);
  check_catalog(catalog, strategies);
  for (const auto& lang : config.languages) {
    if (!lang.corpus.empty()) require_file(lang.corpus, "corpus");
    if (!lang.hatecheck.empty()) require_file(lang.hatecheck, "hatecheck set");
  }

  FileBackendRegistry registry(config.model_dir, &catalog);
  const GridData data = load_grid_data(config);
  GridRunOptions options;
  options.jobs = a.jobs;
  options.out_dir = a.out;
  options.max_new_cells = a.max_new_cells;
  const GridOutcome outcome = run_grid(config, registry, data, catalog, strategies, options);
  write_grid_outputs(a.out, outcome, config);

  for (const auto& r : outcome.results) {
    if (!r.ok) err << "cell failed: " << r.cell.key() << ": " << r.error << '\n';
  }
  out << "cells " << outcome.results.size() << " computed " << outcome.computed << " resumed "
      << outcome.resumed << " failed " << outcome.failed
      << (outcome.complete ? "" : " (incomplete)") << '\n';
  return outcome.failed > 0 ? kExitGridFailures : kExitOk;
}

struct ReportArgs {
  std::string results, reference, out;
  int precision = 2;
};

int report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.results, "results");
  fs::path reference = a.reference;
  if (reference.empty()) {
    reference = fs::path(env_or("HSNLI_REFERENCE_DIR", "references")) / "table1.csv";
  }
  require_file(reference, "reference table");
  const auto entries = read_results_jsonl(a.results);
  const DiffTable table = compare_to_reference(entries, ReferenceTable::load(reference));
  for (const auto& w : table.warnings) err << "warning: " << w << '\n';
  const std::string csv = diff_table_csv(table, a.precision);
  if (a.out.empty()) {
    out << csv;
  } else {
    write_file_atomic(a.out, csv);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hypothesis-engineered NLI hate speech detection toolkit", "hsnli"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Normalize a corpus, check it, downsample it");
  pre_cmd->add_option("--in", pre.in, "corpus JSONL")->required();
  pre_cmd->add_option("--out", pre.out, "output JSONL")->required();
  pre_cmd->add_option("--manifest", pre.manifest, "dataset manifest TOML");
  pre_cmd->add_flag("--lenient", pre.lenient, "report manifest mismatches as warnings");
  pre_cmd->add_option("--downsample-ratio", pre.ratio, "target hate ratio")
      ->check(CLI::Range(0.0, 1.0));
  pre_cmd->add_option("--seed", pre.seed);

  SampleArgs smp;
  auto* smp_cmd = app.add_subcommand("sample", "Draw an N-shot training sample");
  smp_cmd->add_option("--in", smp.in)->required();
  smp_cmd->add_option("--out", smp.out)->required();
  smp_cmd->add_option("--n", smp.n)->required();
  smp_cmd->add_option("--seed", smp.seed);
  smp_cmd->add_option("--split", smp.split, "split to sample from")->capture_default_str();
  smp_cmd->add_flag("--stratified", smp.stratified);

  ConvertArgs cnv;
  auto* cnv_cmd = app.add_subcommand("convert-nli", "Turn labeled posts into NLI pairs");
  cnv_cmd->add_option("--in", cnv.in)->required();
  cnv_cmd->add_option("--out", cnv.out)->required();
  cnv_cmd->add_option("--hypothesis", cnv.hypothesis, "literal hypothesis text");
  cnv_cmd->add_option("--catalog", cnv.catalog, "hypothesis catalog TOML");
  cnv_cmd->add_option("--language", cnv.language);

  ShuffleArgs shf;
  auto* shf_cmd =
      app.add_subcommand("shuffle-xnli", "Mix premise and hypothesis languages of XNLI");
  shf_cmd->add_option("--in", shf.in, "parallel NLI JSONL")->required();
  shf_cmd->add_option("--out", shf.out)->required();
  shf_cmd->add_option("--languages", shf.languages, "comma separated codes")->required();
  shf_cmd->add_option("--seed", shf.seed);

  ClassifyArgs cls;
  auto* cls_cmd = app.add_subcommand("classify", "Classify posts and write traces");
  cls_cmd->add_option("--backend", cls.backend, "mock JSONL or model directory")->required();
  cls_cmd->add_option("--aux-backend", cls.aux_backend, "backend for auxiliary hypotheses");
  cls_cmd->add_option("--catalog", cls.catalog);
  cls_cmd->add_option("--strategies", cls.strategies, "strategy config TOML");
  cls_cmd->add_flag("--standard", cls.standard, "main hypothesis only");
  cls_cmd->add_option("--in", cls.in)->required();
  cls_cmd->add_option("--out", cls.out)->required();
  cls_cmd->add_option("--language", cls.language, "overrides the per-post language");
  cls_cmd->add_option("--model-kind", cls.model_kind)
      ->check(CLI::IsMember({"monolingual", "multilingual"}));
  cls_cmd->add_option("--rule", cls.rule)
      ->check(CLI::IsMember({"argmax", "renormalized_threshold"}));
  cls_cmd->add_option("--threshold", cls.threshold);

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Macro-F1 of traces against gold labels");
  ev_cmd->add_option("--traces", ev.traces)->required();
  ev_cmd->add_option("--gold", ev.gold)->required();
  ev_cmd->add_option("--out", ev.out);
  ev_cmd->add_option("--resamples", ev.resamples, "item bootstrap resamples (0 = none)");
  ev_cmd->add_option("--alpha", ev.alpha);
  ev_cmd->add_option("--seed", ev.seed);

  GridArgs grd;
  auto* grd_cmd = app.add_subcommand("grid", "Run the experiment grid");
  grd_cmd->add_option("--config", grd.config)->required();
  grd_cmd->add_option("--out", grd.out)->required();
  grd_cmd->add_option("--jobs", grd.jobs)->check(CLI::PositiveNumber);
  grd_cmd->add_option("--model-dir", grd.model_dir);
  grd_cmd->add_option("--max-new-cells", grd.max_new_cells);
  grd_cmd->add_option("--seed", grd.seed);
  grd_cmd->add_option("--runs", grd.runs);

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Compare grid results to the reference table");
  rep_cmd->add_option("--results", rep.results)->required();
  rep_cmd->add_option("--reference", rep.reference);
  rep_cmd->add_option("--out", rep.out);
  rep_cmd->add_option("--precision", rep.precision)->check(CLI::Range(0, 6));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*pre_cmd) return preprocess(pre, err);
    if (*smp_cmd) return sample(smp);
    if (*cnv_cmd) return convert_nli(cnv);
    if (*shf_cmd) return shuffle_xnli(shf);
    if (*cls_cmd) return classify(cls);
    if (*ev_cmd) return evaluate(ev, out);
    if (*grd_cmd) return grid(grd, out, err);
    if (*rep_cmd) return report(rep, out, err);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace hsnli::cli
