#include "hsnli/grid.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "hsnli/error.hpp"
#include "hsnli/io.hpp"
#include "hsnli/metrics.hpp"
#include "hsnli/mock_backend.hpp"
#include "hsnli/model.hpp"
#include "hsnli/random.hpp"
#include "hsnli/report.hpp"
#include "json.hpp"

namespace hsnli {
namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t sampling_seed(const GridConfig& config, const std::string& language,
                            std::size_t n, std::uint64_t run) {
  std::ostringstream salt;
  salt << "sample/" << language << "/" << n << "/" << run;
  return mix_seed(config.seed, fnv1a(salt.str()));
}

std::uint64_t ids_digest(const std::vector<LabeledPost>& posts) {
  std::string joined;
  for (const auto& p : posts) {
    joined += p.id;
    joined += '\n';
  }
  return fnv1a(joined);
}

const LanguageData* find_language(const GridConfig& config, std::string_view code) {
  for (const auto& l : config.languages) {
    if (l.code == code) return &l;
  }
  return nullptr;
}

std::string main_pattern(const GridConfig& config, const VariantSpec& spec) {
  return spec.backend.empty() ? config.backend : spec.backend;
}

std::string aux_pattern(const GridConfig& config, const VariantSpec& spec) {
  if (!spec.aux_backend.empty()) return spec.aux_backend;
  if (!config.aux_backend.empty()) return config.aux_backend;
  return main_pattern(config, spec);
}

}  // namespace

std::string expand_backend_pattern(std::string_view pattern, const BackendRequest& request) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      const std::size_t close = pattern.find('}', i);
      if (close == std::string_view::npos) {
        throw Error(ErrorKind::config, "unterminated placeholder in \"" + std::string(pattern) + "\"");
      }
      const std::string_view name = pattern.substr(i + 1, close - i - 1);
      if (name == "tag") {
        out += request.tag;
      } else if (name == "language") {
        out += request.language;
      } else if (name == "n") {
        out += std::to_string(request.n);
      } else if (name == "seed") {
        out += std::to_string(request.seed);
      } else {
        throw Error(ErrorKind::config, "unknown placeholder {" + std::string(name) + "}");
      }
      i = close + 1;
    } else {
      out += pattern[i++];
    }
  }
  return out;
}

FileBackendRegistry::FileBackendRegistry(std::filesystem::path base_dir,
                                         const HypothesisCatalog* catalog)
    : base_dir_(std::move(base_dir)), catalog_(catalog) {}

std::shared_ptr<const InferenceBackend> FileBackendRegistry::resolve(
    const BackendRequest& request) {
  std::filesystem::path path = expand_backend_pattern(request.pattern, request);
  if (path.is_relative() && !base_dir_.empty()) path = base_dir_ / path;
  {
    std::lock_guard lock(mutex_);
    if (const auto it = cache_.find(path); it != cache_.end()) return it->second;
  }
  std::shared_ptr<const InferenceBackend> backend;
  if (std::filesystem::is_directory(path)) {
    backend = load_model_backend(path);
  } else if (std::filesystem::is_regular_file(path) && path.extension() == ".jsonl") {
    backend = std::make_shared<const MockBackend>(MockBackend::load(path, catalog_));
  } else {
    throw Error(ErrorKind::io, "no backend at " + path.string());
  }
  ++loads_;
  std::lock_guard lock(mutex_);
  return cache_.emplace(path, std::move(backend)).first->second;
}

GridData load_grid_data(const GridConfig& config) {
  GridData data;
  for (const auto& lang : config.languages) {
    LanguageSplits splits;
    if (lang.corpus.empty()) {
      splits.corpus_error = "no corpus configured for " + lang.code;
    } else {
      try {
        for (auto& post : read_corpus_jsonl(lang.corpus)) {
          if (post.split == Split::train) {
            splits.train.push_back(std::move(post));
          } else if (post.split == Split::test) {
            splits.held_out.push_back(std::move(post));
          }
        }
      } catch (const std::exception& e) {
        splits.corpus_error = e.what();
      }
    }
    if (lang.hatecheck.empty()) {
      splits.hatecheck_error = "no hatecheck set configured for " + lang.code;
    } else {
      try {
        splits.hatecheck = read_corpus_jsonl(lang.hatecheck);
      } catch (const std::exception& e) {
        splits.hatecheck_error = e.what();
      }
    }
    data.emplace(lang.code, std::move(splits));
  }
  return data;
}

CellResult run_cell(const ExperimentCell& cell, const GridConfig& config,
                    BackendRegistry& registry, const GridData& data,
                    const HypothesisCatalog& catalog, const StrategyConfig& strategy_config,
                    const std::filesystem::path* sample_dir) {
  CellResult result;
  result.cell = cell;
  try {
    const LanguageData* lang = find_language(config, cell.language);
    const auto splits_it = data.find(cell.language);
    if (lang == nullptr || splits_it == data.end()) {
      throw Error(ErrorKind::config, "no data for language " + cell.language);
    }
    const LanguageSplits& splits = splits_it->second;
    result.dataset = cell.test_set == TestSet::held_out ? lang->held_out_name : lang->hatecheck_name;

    const std::string& load_error =
        cell.test_set == TestSet::held_out ? splits.corpus_error : splits.hatecheck_error;
    if (!load_error.empty()) throw Error(ErrorKind::io, load_error);
    if (cell.n_shot > 0 && !splits.corpus_error.empty()) {
      throw Error(ErrorKind::io, splits.corpus_error);
    }
    const std::vector<LabeledPost>& eval_posts =
        cell.test_set == TestSet::held_out ? splits.held_out : splits.hatecheck;
    if (eval_posts.empty()) throw Error(ErrorKind::validation, "empty evaluation set");

    std::vector<HateLabel> gold;
    gold.reserve(eval_posts.size());
    for (const auto& p : eval_posts) gold.push_back(p.label);

    const VariantSpec& spec = config.variants.at(cell.variant_index);
    const ModelKind kind = cell.variant.base;
    std::vector<std::vector<HateLabel>> run_predictions;
    std::vector<double> run_scores;

    for (std::uint64_t s = 0; s < config.runs; ++s) {
      RunRecord run;
      run.seed = s;
      if (cell.n_shot > 0) {
        // The trainer consumes this sample; here it pins what the backend for
        // (language, N, seed) was trained on.
        const NShotSample sample = sample_n_shot(
            splits.train, {cell.n_shot, sampling_seed(config, cell.language, cell.n_shot, s),
                           config.stratified_sampling});
        run.train_hate = sample.hate;
        run.train_not_hate = sample.not_hate;
        run.train_digest = ids_digest(sample.posts);
        if (sample_dir != nullptr && config.write_samples) {
          const auto path = *sample_dir / cell.language / ("n" + std::to_string(cell.n_shot)) /
                            ("seed" + std::to_string(s) + ".jsonl");
          if (!std::filesystem::exists(path)) write_file_atomic(path, to_corpus_jsonl(sample.posts));
        }
      }

      BackendRequest main_req{cell.variant.tag(), cell.language, cell.n_shot, s, false,
                              main_pattern(config, spec)};
      const auto main_backend = registry.resolve(main_req);
      std::shared_ptr<const InferenceBackend> aux_backend;
      if (cell.variant.mode == EvalMode::strategies) {
        BackendRequest aux_req{cell.variant.nli_base_tag(), cell.language, 0, s, true,
                               aux_pattern(config, spec)};
        aux_backend = registry.resolve(aux_req);
      }

      std::vector<HateLabel> predictions;
      predictions.reserve(eval_posts.size());
      for (const auto& post : eval_posts) {
        const StrategyInput input{post.id, post.text, cell.language};
        const ClassificationTrace trace =
            cell.variant.mode == EvalMode::strategies
                ? classify_with_strategies(input, *main_backend, *aux_backend, catalog,
                                           config.policy, strategy_config, kind)
                : classify_standard(input, *main_backend, catalog, config.policy, kind);
        predictions.push_back(trace.final_label);
      }
      const MacroF1 f1 = macro_f1(predictions, gold);
      run.macro_f1 = f1.value;
      run.f1_hate = f1.f1_hate;
      run.f1_not_hate = f1.f1_not_hate;
      run.absent_class = !f1.absent_classes.empty();
      run_scores.push_back(f1.value);
      run_predictions.push_back(std::move(predictions));
      result.runs.push_back(run);
    }

    MetricReport& report = result.report;
    report.runs = result.runs.size();
    report.macro_f1 = mean(run_scores);
    double hate_sum = 0.0;
    double not_hate_sum = 0.0;
    for (const auto& r : result.runs) {
      hate_sum += r.f1_hate;
      not_hate_sum += r.f1_not_hate;
    }
    report.f1_hate = hate_sum / static_cast<double>(report.runs);
    report.f1_not_hate = not_hate_sum / static_cast<double>(report.runs);
    const std::uint64_t ci_seed = mix_seed(config.seed, fnv1a("ci/" + cell.key()));
    const Interval ci =
        config.bootstrap == BootstrapUnit::runs
            ? bootstrap_ci(run_scores, config.resamples, config.alpha, ci_seed)
            : bootstrap_ci_items(run_predictions, gold, config.resamples, config.alpha, ci_seed);
    report.ci_low = ci.low;
    report.ci_high = ci.high;
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
    result.runs.clear();
  }
  return result;
}

std::string cell_result_to_json(const CellResult& r, std::string_view fingerprint) {
  json runs = json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"seed", run.seed},
                    {"macro_f1", run.macro_f1},
                    {"f1_hate", run.f1_hate},
                    {"f1_not_hate", run.f1_not_hate},
                    {"train_hate", run.train_hate},
                    {"train_not_hate", run.train_not_hate},
                    {"train_digest", hex64(run.train_digest)},
                    {"absent_class", run.absent_class}});
  }
  json out = {{"fingerprint", fingerprint},
              {"key", r.cell.key()},
              {"variant", r.cell.variant.label()},
              {"tag", r.cell.variant.tag()},
              {"mode", to_string(r.cell.variant.mode)},
              {"language", r.cell.language},
              {"n", r.cell.n_shot},
              {"test_set", to_string(r.cell.test_set)},
              {"dataset", r.dataset},
              {"ok", r.ok}};
  if (r.ok) {
    out["macro_f1"] = r.report.macro_f1;
    out["f1_hate"] = r.report.f1_hate;
    out["f1_not_hate"] = r.report.f1_not_hate;
    out["ci_low"] = r.report.ci_low;
    out["ci_high"] = r.report.ci_high;
    out["runs"] = r.report.runs;
    out["run_records"] = std::move(runs);
  } else {
    out["error"] = r.error;
  }
  return out.dump();
}

std::optional<CellResult> cell_result_from_json(std::string_view line, std::string* fingerprint) {
  try {
    const json obj = json::parse(line);
    CellResult r;
    const std::string mode = obj.at("mode").get<std::string>();
    r.cell.variant = ModelVariant::parse(
        obj.at("tag").get<std::string>(),
        mode == "strategies" ? EvalMode::strategies : EvalMode::standard);
    r.cell.language = obj.at("language").get<std::string>();
    r.cell.n_shot = obj.at("n").get<std::size_t>();
    const auto test_set = parse_test_set(obj.at("test_set").get<std::string>());
    if (!test_set) return std::nullopt;
    r.cell.test_set = *test_set;
    r.dataset = obj.value("dataset", std::string{});
    r.ok = obj.at("ok").get<bool>();
    if (r.ok) {
      r.report.macro_f1 = obj.at("macro_f1").get<double>();
      r.report.f1_hate = obj.at("f1_hate").get<double>();
      r.report.f1_not_hate = obj.at("f1_not_hate").get<double>();
      r.report.ci_low = obj.at("ci_low").get<double>();
      r.report.ci_high = obj.at("ci_high").get<double>();
      r.report.runs = obj.at("runs").get<std::size_t>();
      for (const auto& run : obj.at("run_records")) {
        RunRecord rec;
        rec.seed = run.at("seed").get<std::uint64_t>();
        rec.macro_f1 = run.at("macro_f1").get<double>();
        rec.f1_hate = run.at("f1_hate").get<double>();
        rec.f1_not_hate = run.at("f1_not_hate").get<double>();
        rec.train_hate = run.at("train_hate").get<std::size_t>();
        rec.train_not_hate = run.at("train_not_hate").get<std::size_t>();
        rec.train_digest = std::stoull(run.at("train_digest").get<std::string>(), nullptr, 16);
        rec.absent_class = run.value("absent_class", false);
        r.runs.push_back(rec);
      }
    } else {
      r.error = obj.value("error", std::string{});
    }
    if (fingerprint != nullptr) *fingerprint = obj.value("fingerprint", std::string{});
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

GridOutcome run_grid(const GridConfig& config, BackendRegistry& registry, const GridData& data,
                     const HypothesisCatalog& catalog, const StrategyConfig& strategy_config,
                     const GridRunOptions& options) {
  config.validate();
  const std::vector<ExperimentCell> cells = enumerate_cells(config);
  const std::string fingerprint = config.fingerprint();

  std::vector<std::optional<CellResult>> slots(cells.size());
  GridOutcome outcome;

  std::filesystem::path journal;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    journal = *options.out_dir / "cells.jsonl";
    if (std::filesystem::exists(journal)) {
      std::unordered_map<std::string, CellResult> finished;
      std::istringstream in(read_file(journal));
      std::string line;
      while (std::getline(in, line)) {
        std::string fp;
        auto r = cell_result_from_json(line, &fp);
        if (r && r->ok && fp == fingerprint) finished.insert_or_assign(r->cell.key(), std::move(*r));
      }
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (auto it = finished.find(cells[i].key()); it != finished.end()) {
          it->second.cell = cells[i];
          slots[i] = std::move(it->second);
          ++outcome.resumed;
        }
      }
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!slots[i]) pending.push_back(i);
  }
  if (options.max_new_cells > 0 && pending.size() > options.max_new_cells) {
    pending.resize(options.max_new_cells);
  }

  std::mutex journal_mutex;
  std::ofstream journal_out;
  if (!journal.empty()) journal_out.open(journal, std::ios::app);
  const std::filesystem::path sample_dir =
      options.out_dir ? *options.out_dir / "samples" : std::filesystem::path{};

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const std::size_t i = pending[k];
      CellResult r = run_cell(cells[i], config, registry, data, catalog, strategy_config,
                              options.out_dir ? &sample_dir : nullptr);
      if (journal_out.is_open()) {
        std::lock_guard lock(journal_mutex);
        journal_out << cell_result_to_json(r, fingerprint) << '\n';
        journal_out.flush();
      }
      slots[i] = std::move(r);
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, pending.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
  }
  outcome.computed = pending.size();

  outcome.complete = true;
  for (auto& slot : slots) {
    if (!slot) {
      outcome.complete = false;
      continue;
    }
    if (!slot->ok) ++outcome.failed;
    outcome.results.push_back(std::move(*slot));
  }
  return outcome;
}

void write_grid_outputs(const std::filesystem::path& out_dir, const GridOutcome& outcome,
                        const GridConfig& config) {
  const std::string fingerprint = config.fingerprint();
  std::string jsonl;
  std::vector<ResultEntry> entries;
  for (const auto& r : outcome.results) {
    jsonl += cell_result_to_json(r, fingerprint);
    jsonl += '\n';
    if (r.ok) entries.push_back({r.cell.variant.label(), r.dataset, r.cell.n_shot, r.report.macro_f1});
  }
  write_file_atomic(out_dir / "results.jsonl", jsonl);
  write_file_atomic(out_dir / "report.csv", results_table_csv(entries));
}

}  // namespace hsnli
