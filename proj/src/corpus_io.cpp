#include <sstream>
#include <unordered_set>

#include "hsnli/corpus.hpp"
#include "hsnli/error.hpp"
#include "hsnli/io.hpp"
#include "json.hpp"
#include "toml_util.hpp"

namespace hsnli {
namespace {

using nlohmann::json;

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + what);
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    fail_line(line, std::string("missing string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

// Calls fn(json, line_number) for every non-blank line.
template <typename Fn>
void for_each_record(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const std::size_t end = std::min(content.find('\n', pos), content.size());
    std::string_view line = content.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == content.size()) break;
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_line(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) fail_line(line_no, "record is not a JSON object");
    fn(obj, line_no);
    if (end == content.size()) break;
  }
}

std::map<std::string, std::string> language_map(const json& obj, const char* key,
                                                std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_object()) {
    fail_line(line, std::string("field \"") + key + "\" must map language to text");
  }
  std::map<std::string, std::string> out;
  for (const auto& [lang, text] : it->items()) {
    if (!text.is_string()) fail_line(line, std::string("non-string text in \"") + key + "\"");
    out[lang] = text.get<std::string>();
  }
  return out;
}

}  // namespace

std::vector<LabeledPost> parse_corpus_jsonl(std::string_view content) {
  std::vector<LabeledPost> posts;
  std::unordered_set<std::string> ids;
  for_each_record(content, [&](const json& obj, std::size_t line) {
    LabeledPost post;
    post.id = required_string(obj, "id", line);
    post.text = required_string(obj, "text", line);
    const std::string label = required_string(obj, "label", line);
    const auto parsed_label = parse_hate_label(label);
    if (!parsed_label) fail_line(line, "unknown label \"" + label + "\"");
    post.label = *parsed_label;
    post.language = required_string(obj, "language", line);
    const std::string split = required_string(obj, "split", line);
    const auto parsed_split = parse_split(split);
    if (!parsed_split) fail_line(line, "unknown split \"" + split + "\"");
    post.split = *parsed_split;
    if (!ids.insert(post.id).second) fail_line(line, "duplicate id \"" + post.id + "\"");
    posts.push_back(std::move(post));
  });
  return posts;
}

std::vector<LabeledPost> read_corpus_jsonl(const std::filesystem::path& path) {
  try {
    return parse_corpus_jsonl(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse) {
      throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string to_corpus_jsonl(std::span<const LabeledPost> posts) {
  std::string out;
  for (const auto& post : posts) {
    json obj = {{"id", post.id},
                {"text", post.text},
                {"label", to_string(post.label)},
                {"language", post.language},
                {"split", to_string(post.split)}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<NliExample> parse_nli_jsonl(std::string_view content) {
  std::vector<NliExample> out;
  for_each_record(content, [&](const json& obj, std::size_t line) {
    NliExample ex;
    ex.premise = required_string(obj, "premise", line);
    ex.hypothesis = required_string(obj, "hypothesis", line);
    const std::string label = required_string(obj, "label", line);
    const auto parsed = parse_nli_label(label);
    if (!parsed) fail_line(line, "unknown NLI label \"" + label + "\"");
    ex.label = *parsed;
    ex.premise_language = required_string(obj, "premise_language", line);
    ex.hypothesis_language = required_string(obj, "hypothesis_language", line);
    out.push_back(std::move(ex));
  });
  return out;
}

std::vector<NliExample> read_nli_jsonl(const std::filesystem::path& path) {
  return parse_nli_jsonl(read_file(path));
}

std::string to_nli_jsonl(std::span<const NliExample> examples) {
  std::string out;
  for (const auto& ex : examples) {
    json obj = {{"premise", ex.premise},
                {"hypothesis", ex.hypothesis},
                {"label", to_string(ex.label)},
                {"premise_language", ex.premise_language},
                {"hypothesis_language", ex.hypothesis_language}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<ParallelNliExample> parse_parallel_nli_jsonl(std::string_view content) {
  std::vector<ParallelNliExample> out;
  for_each_record(content, [&](const json& obj, std::size_t line) {
    ParallelNliExample ex;
    ex.id = required_string(obj, "id", line);
    const std::string label = required_string(obj, "label", line);
    const auto parsed = parse_nli_label(label);
    if (!parsed) fail_line(line, "unknown NLI label \"" + label + "\"");
    ex.label = *parsed;
    ex.premise = language_map(obj, "premise", line);
    ex.hypothesis = language_map(obj, "hypothesis", line);
    out.push_back(std::move(ex));
  });
  return out;
}

std::vector<ParallelNliExample> read_parallel_nli_jsonl(const std::filesystem::path& path) {
  return parse_parallel_nli_jsonl(read_file(path));
}

DatasetManifest parse_manifest(std::string_view toml_text) {
  const toml::table doc = detail::parse_toml(toml_text, "manifest");
  DatasetManifest m;
  const auto code = doc["code"].value<std::string>();
  if (!code) throw Error(ErrorKind::config, "manifest: missing \"code\"");
  m.code = *code;
  m.source = doc["source"].value_or(std::string{});
  if (const toml::table* sizes = doc["expected_sizes"].as_table()) {
    for (const auto& [key, node] : *sizes) {
      const auto split = parse_split(key.str());
      if (!split) {
        throw Error(ErrorKind::config, "manifest " + m.code + ": unknown split \"" +
                                           std::string(key.str()) + "\"");
      }
      const auto count = node.value<std::int64_t>();
      if (!count || *count < 0) {
        throw Error(ErrorKind::config,
                    "manifest " + m.code + ": split sizes must be non-negative integers");
      }
      m.expected_sizes[*split] = static_cast<std::size_t>(*count);
    }
  }
  if (const auto pct = doc["expected_hate_pct"].value<double>()) m.expected_hate_pct = *pct;
  if (const auto split = doc["hate_pct_split"].value<std::string>()) {
    m.hate_pct_split = parse_split(*split);
    if (!m.hate_pct_split) {
      throw Error(ErrorKind::config, "manifest " + m.code + ": unknown hate_pct_split");
    }
  }
  if (const auto tol = doc["size_tolerance"].value<std::int64_t>()) {
    m.size_tolerance = static_cast<std::size_t>(std::max<std::int64_t>(0, *tol));
  }
  if (const auto tol = doc["hate_pct_tolerance"].value<double>()) m.hate_pct_tolerance = *tol;
  m.validate();
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

}  // namespace hsnli
