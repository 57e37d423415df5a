#include "hsnli/tokenizer.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <unordered_map>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "hsnli/error.hpp"
#include "hsnli/io.hpp"
#include "json.hpp"

namespace hsnli {
namespace {

using nlohmann::json;
using Normalize = std::function<std::string(const std::string&)>;
using PreTokenize = std::function<std::vector<std::string>(const std::string&)>;

[[noreturn]] void unsupported(std::string_view what, std::string_view type) {
  throw Error(ErrorKind::config,
              "unsupported tokenizer " + std::string(what) + " \"" + std::string(type) + "\"");
}

std::vector<UChar32> code_points(std::string_view s) {
  std::vector<UChar32> out;
  std::int32_t i = 0;
  const auto len = static_cast<std::int32_t>(s.size());
  while (i < len) {
    UChar32 c;
    U8_NEXT(s.data(), i, len, c);
    out.push_back(c < 0 ? 0xFFFD : c);
  }
  return out;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[4];
  std::int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, 4, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(n));
}

std::string from_code_points(const std::vector<UChar32>& cps) {
  std::string out;
  for (UChar32 c : cps) append_utf8(out, c);
  return out;
}

const icu::Normalizer2& normalizer_instance(std::string_view form) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = nullptr;
  if (form == "NFC") n = icu::Normalizer2::getNFCInstance(status);
  if (form == "NFD") n = icu::Normalizer2::getNFDInstance(status);
  if (form == "NFKC") n = icu::Normalizer2::getNFKCInstance(status);
  if (form == "NFKD") n = icu::Normalizer2::getNFKDInstance(status);
  if (n == nullptr || U_FAILURE(status)) {
    throw Error(ErrorKind::backend, "ICU normalizer " + std::string(form) + " unavailable");
  }
  return *n;
}

std::string unicode_normalize(const std::string& s, std::string_view form) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString out =
      normalizer_instance(form).normalize(icu::UnicodeString::fromUTF8(s), status);
  if (U_FAILURE(status)) throw Error(ErrorKind::backend, "normalization failed");
  std::string utf8;
  out.toUTF8String(utf8);
  return utf8;
}

std::string lowercase(const std::string& s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(s);
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::string strip_accents(const std::string& s) {
  std::vector<UChar32> kept;
  for (UChar32 c : code_points(unicode_normalize(s, "NFD"))) {
    if (u_charType(c) != U_NON_SPACING_MARK) kept.push_back(c);
  }
  return from_code_points(kept);
}

bool is_whitespace(UChar32 c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || u_charType(c) == U_SPACE_SEPARATOR;
}

bool is_control(UChar32 c) {
  if (c == '\t' || c == '\n' || c == '\r') return false;
  const auto t = u_charType(c);
  return t == U_CONTROL_CHAR || t == U_FORMAT_CHAR || t == U_PRIVATE_USE_CHAR ||
         t == U_SURROGATE || t == U_UNASSIGNED;
}

bool is_punctuation(UChar32 c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  return u_ispunct(c);
}

bool is_cjk(UChar32 c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

bool is_word(UChar32 c) {
  if (u_hasBinaryProperty(c, UCHAR_ALPHABETIC) || u_hasBinaryProperty(c, UCHAR_JOIN_CONTROL)) {
    return true;
  }
  const auto t = u_charType(c);
  return t == U_NON_SPACING_MARK || t == U_ENCLOSING_MARK || t == U_COMBINING_SPACING_MARK ||
         t == U_DECIMAL_DIGIT_NUMBER || t == U_CONNECTOR_PUNCTUATION;
}

std::string bert_normalize(const std::string& s, bool clean_text, bool chinese,
                           bool strip, bool lower) {
  std::vector<UChar32> out;
  for (UChar32 c : code_points(s)) {
    if (clean_text) {
      if (c == 0 || c == 0xFFFD || is_control(c)) continue;
      if (is_whitespace(c)) c = ' ';
    }
    if (chinese && is_cjk(c)) {
      out.push_back(' ');
      out.push_back(c);
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  std::string text = from_code_points(out);
  if (strip) text = strip_accents(text);
  if (lower) text = lowercase(text);
  return text;
}

std::string replace_all(const std::string& s, const std::string& from, const std::string& to) {
  if (from.empty()) return s;
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const auto hit = s.find(from, pos);
    if (hit == std::string::npos) break;
    out.append(s, pos, hit - pos);
    out += to;
    pos = hit + from.size();
  }
  out.append(s, pos, std::string::npos);
  return out;
}

Normalize make_normalizer(const json& spec) {
  if (spec.is_null()) return [](const std::string& s) { return s; };
  const std::string type = spec.at("type").get<std::string>();
  if (type == "Sequence") {
    std::vector<Normalize> steps;
    for (const auto& n : spec.at("normalizers")) steps.push_back(make_normalizer(n));
    return [steps](const std::string& s) {
      std::string out = s;
      for (const auto& step : steps) out = step(out);
      return out;
    };
  }
  if (type == "BertNormalizer") {
    const bool clean = spec.value("clean_text", true);
    const bool chinese = spec.value("handle_chinese_chars", true);
    const bool lower = spec.value("lowercase", true);
    const bool strip = spec.contains("strip_accents") && !spec["strip_accents"].is_null()
                           ? spec["strip_accents"].get<bool>()
                           : lower;
    return [=](const std::string& s) { return bert_normalize(s, clean, chinese, strip, lower); };
  }
  if (type == "Lowercase") return lowercase;
  if (type == "StripAccents") return strip_accents;
  if (type == "NFC" || type == "NFD" || type == "NFKC" || type == "NFKD") {
    return [type](const std::string& s) { return unicode_normalize(s, type); };
  }
  if (type == "Precompiled") {
    return [](const std::string& s) { return unicode_normalize(s, "NFKC"); };
  }
  if (type == "Strip") {
    const bool left = spec.value("strip_left", true);
    const bool right = spec.value("strip_right", true);
    return [=](const std::string& s) {
      auto cps = code_points(s);
      std::size_t b = 0;
      std::size_t e = cps.size();
      if (left) {
        while (b < e && u_isUWhiteSpace(cps[b])) ++b;
      }
      if (right) {
        while (e > b && u_isUWhiteSpace(cps[e - 1])) --e;
      }
      return from_code_points({cps.begin() + static_cast<std::ptrdiff_t>(b),
                               cps.begin() + static_cast<std::ptrdiff_t>(e)});
    };
  }
  if (type == "Replace") {
    const json& pattern = spec.at("pattern");
    if (!pattern.contains("String")) unsupported("Replace pattern", pattern.dump());
    const std::string from = pattern.at("String").get<std::string>();
    const std::string to = spec.at("content").get<std::string>();
    return [from, to](const std::string& s) { return replace_all(s, from, to); };
  }
  unsupported("normalizer", type);
}

PreTokenize make_pre_tokenizer(const json& spec) {
  if (spec.is_null()) return [](const std::string& s) { return std::vector<std::string>{s}; };
  const std::string type = spec.at("type").get<std::string>();
  if (type == "Sequence") {
    std::vector<PreTokenize> steps;
    for (const auto& p : spec.at("pretokenizers")) steps.push_back(make_pre_tokenizer(p));
    return [steps](const std::string& s) {
      std::vector<std::string> pieces{s};
      for (const auto& step : steps) {
        std::vector<std::string> next;
        for (const auto& piece : pieces) {
          auto split = step(piece);
          next.insert(next.end(), split.begin(), split.end());
        }
        pieces = std::move(next);
      }
      return pieces;
    };
  }
  if (type == "Metaspace") {
    const std::string replacement = spec.value("replacement", std::string("\xE2\x96\x81"));
    bool prefix = spec.value("add_prefix_space", true);
    if (spec.contains("prepend_scheme")) {
      prefix = spec["prepend_scheme"].get<std::string>() != "never";
    }
    const bool split = spec.value("split", true);
    return [=](const std::string& s) {
      std::string text = replace_all(s, " ", replacement);
      if (prefix && text.rfind(replacement, 0) != 0) text = replacement + text;
      std::vector<std::string> out;
      if (!split) {
        if (!text.empty()) out.push_back(text);
        return out;
      }
      std::size_t start = 0;
      for (;;) {
        const auto next = text.find(replacement, start + 1);
        if (next == std::string::npos || start >= text.size()) break;
        out.push_back(text.substr(start, next - start));
        start = next;
      }
      if (start < text.size()) out.push_back(text.substr(start));
      return out;
    };
  }
  if (type == "WhitespaceSplit") {
    return [](const std::string& s) {
      std::vector<std::string> out;
      std::vector<UChar32> current;
      for (UChar32 c : code_points(s)) {
        if (u_isUWhiteSpace(c)) {
          if (!current.empty()) out.push_back(from_code_points(current));
          current.clear();
        } else {
          current.push_back(c);
        }
      }
      if (!current.empty()) out.push_back(from_code_points(current));
      return out;
    };
  }
  if (type == "Whitespace") {
    return [](const std::string& s) {
      std::vector<std::string> out;
      std::vector<UChar32> current;
      int current_kind = 0;
      for (UChar32 c : code_points(s)) {
        const int kind = u_isUWhiteSpace(c) ? 0 : (is_word(c) ? 1 : 2);
        if (kind != current_kind && !current.empty()) {
          out.push_back(from_code_points(current));
          current.clear();
        }
        current_kind = kind;
        if (kind != 0) current.push_back(c);
      }
      if (!current.empty()) out.push_back(from_code_points(current));
      return out;
    };
  }
  if (type == "BertPreTokenizer") {
    return [](const std::string& s) {
      std::vector<std::string> out;
      std::vector<UChar32> current;
      auto flush = [&] {
        if (!current.empty()) out.push_back(from_code_points(current));
        current.clear();
      };
      for (UChar32 c : code_points(s)) {
        if (u_isUWhiteSpace(c)) {
          flush();
        } else if (is_punctuation(c)) {
          flush();
          out.push_back(from_code_points({c}));
        } else {
          current.push_back(c);
        }
      }
      flush();
      return out;
    };
  }
  unsupported("pre_tokenizer", type);
}

class Model {
 public:
  virtual ~Model() = default;
  virtual void tokenize(const std::string& piece, std::vector<std::string>& tokens,
                        std::vector<std::int64_t>& ids) const = 0;
  virtual std::optional<std::int64_t> token_to_id(const std::string& token) const = 0;
};

class UnigramModel final : public Model {
 public:
  explicit UnigramModel(const json& spec) {
    const auto& vocab = spec.at("vocab");
    double min_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const std::string piece = vocab[i].at(0).get<std::string>();
      const double score = vocab[i].at(1).get<double>();
      pieces_.emplace(piece, Entry{static_cast<std::int64_t>(i), score});
      tokens_.push_back(piece);
      min_score = std::min(min_score, score);
      max_piece_bytes_ = std::max(max_piece_bytes_, piece.size());
    }
    if (spec.contains("unk_id") && !spec["unk_id"].is_null()) {
      unk_id_ = spec["unk_id"].get<std::int64_t>();
      if (unk_id_ < 0 || static_cast<std::size_t>(unk_id_) >= tokens_.size()) {
        throw Error(ErrorKind::config, "unk_id out of range");
      }
    }
    unk_score_ = min_score - 10.0;
  }

  void tokenize(const std::string& piece, std::vector<std::string>& tokens,
                std::vector<std::int64_t>& ids) const override {
    const std::size_t n = piece.size();
    struct Node {
      double score = -std::numeric_limits<double>::infinity();
      std::size_t start = 0;
      std::int64_t id = -1;
    };
    std::vector<Node> best(n + 1);
    best[0].score = 0.0;
    std::size_t pos = 0;
    while (pos < n) {
      if (best[pos].score == -std::numeric_limits<double>::infinity()) {
        ++pos;
        continue;
      }
      const std::size_t char_len = char_length(piece, pos);
      bool single_found = false;
      for (std::size_t len = 1; len <= max_piece_bytes_ && pos + len <= n; ++len) {
        const auto it = pieces_.find(piece.substr(pos, len));
        if (it == pieces_.end()) continue;
        if (len == char_len) single_found = true;
        const double score = best[pos].score + it->second.score;
        if (score > best[pos + len].score) best[pos + len] = {score, pos, it->second.id};
      }
      if (!single_found && pos + char_len <= n) {
        const double score = best[pos].score + unk_score_;
        if (score > best[pos + char_len].score) best[pos + char_len] = {score, pos, unk_marker};
      }
      pos += char_len;
    }
    std::vector<std::pair<std::size_t, std::int64_t>> path;
    for (std::size_t end = n; end > 0; end = best[end].start) {
      path.emplace_back(end, best[end].id);
    }
    std::reverse(path.begin(), path.end());
    std::size_t start = 0;
    bool previous_unk = false;
    for (const auto& [end, id] : path) {
      if (id == unk_marker) {
        if (unk_id_ < 0) throw Error(ErrorKind::backend, "unknown piece and no unk_id");
        if (previous_unk) {
          tokens.back() += piece.substr(start, end - start);
        } else {
          tokens.push_back(piece.substr(start, end - start));
          ids.push_back(unk_id_);
        }
        previous_unk = true;
      } else {
        tokens.push_back(tokens_[static_cast<std::size_t>(id)]);
        ids.push_back(id);
        previous_unk = false;
      }
      start = end;
    }
  }

  std::optional<std::int64_t> token_to_id(const std::string& token) const override {
    const auto it = pieces_.find(token);
    if (it == pieces_.end()) return std::nullopt;
    return it->second.id;
  }

 private:
  static constexpr std::int64_t unk_marker = -2;

  static std::size_t char_length(const std::string& s, std::size_t pos) {
    auto i = static_cast<std::int32_t>(pos);
    UChar32 c;
    U8_NEXT(s.data(), i, static_cast<std::int32_t>(s.size()), c);
    (void)c;
    return static_cast<std::size_t>(i) - pos;
  }

  struct Entry {
    std::int64_t id;
    double score;
  };
  std::unordered_map<std::string, Entry> pieces_;
  std::vector<std::string> tokens_;
  std::size_t max_piece_bytes_ = 0;
  std::int64_t unk_id_ = -1;
  double unk_score_ = 0.0;
};

class WordPieceModel final : public Model {
 public:
  explicit WordPieceModel(const json& spec)
      : prefix_(spec.value("continuing_subword_prefix", std::string("##"))),
        max_chars_(spec.value("max_input_chars_per_word", std::size_t{100})) {
    for (const auto& [token, id] : spec.at("vocab").items()) {
      vocab_.emplace(token, id.get<std::int64_t>());
    }
    const std::string unk = spec.value("unk_token", std::string("[UNK]"));
    const auto it = vocab_.find(unk);
    if (it == vocab_.end()) throw Error(ErrorKind::config, "unk_token " + unk + " not in vocab");
    unk_ = {unk, it->second};
  }

  void tokenize(const std::string& piece, std::vector<std::string>& tokens,
                std::vector<std::int64_t>& ids) const override {
    const auto cps = code_points(piece);
    if (cps.size() > max_chars_) {
      tokens.push_back(unk_.first);
      ids.push_back(unk_.second);
      return;
    }
    std::vector<std::pair<std::string, std::int64_t>> found;
    std::size_t start = 0;
    while (start < cps.size()) {
      std::size_t end = cps.size();
      std::optional<std::pair<std::string, std::int64_t>> match;
      while (start < end) {
        std::string candidate = from_code_points({cps.begin() + static_cast<std::ptrdiff_t>(start),
                                                  cps.begin() + static_cast<std::ptrdiff_t>(end)});
        if (start > 0) candidate = prefix_ + candidate;
        if (const auto it = vocab_.find(candidate); it != vocab_.end()) {
          match.emplace(candidate, it->second);
          break;
        }
        --end;
      }
      if (!match) {
        tokens.push_back(unk_.first);
        ids.push_back(unk_.second);
        return;
      }
      found.push_back(std::move(*match));
      start = end;
    }
    for (auto& [token, id] : found) {
      tokens.push_back(std::move(token));
      ids.push_back(id);
    }
  }

  std::optional<std::int64_t> token_to_id(const std::string& token) const override {
    const auto it = vocab_.find(token);
    if (it == vocab_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::unordered_map<std::string, std::int64_t> vocab_;
  std::string prefix_;
  std::size_t max_chars_;
  std::pair<std::string, std::int64_t> unk_;
};

// Pair layout: special ids around the two sequences, with type ids.
struct PairTemplate {
  struct Item {
    int sequence = -1;  // 0 = first, 1 = second, -1 = special
    std::vector<std::int64_t> ids;
    std::int64_t type_id = 0;
  };
  std::vector<Item> items;

  std::size_t special_count() const {
    std::size_t n = 0;
    for (const auto& item : items) n += item.sequence < 0 ? item.ids.size() : 0;
    return n;
  }
};

std::int64_t special_id(const json& pair) { return pair.at(1).get<std::int64_t>(); }

PairTemplate make_template(const json& spec) {
  PairTemplate t;
  using Item = PairTemplate::Item;
  if (spec.is_null()) {
    t.items = {Item{0, {}, 0}, Item{1, {}, 1}};
    return t;
  }
  const std::string type = spec.at("type").get<std::string>();
  if (type == "RobertaProcessing") {
    const auto cls = special_id(spec.at("cls"));
    const auto sep = special_id(spec.at("sep"));
    t.items = {Item{-1, {cls}, 0}, Item{0, {}, 0},   Item{-1, {sep}, 0},
               Item{-1, {sep}, 0}, Item{1, {}, 0},   Item{-1, {sep}, 0}};
    return t;
  }
  if (type == "BertProcessing") {
    const auto cls = special_id(spec.at("cls"));
    const auto sep = special_id(spec.at("sep"));
    t.items = {Item{-1, {cls}, 0}, Item{0, {}, 0}, Item{-1, {sep}, 0}, Item{1, {}, 1},
               Item{-1, {sep}, 1}};
    return t;
  }
  if (type == "TemplateProcessing") {
    const json& specials = spec.at("special_tokens");
    for (const auto& piece : spec.at("pair")) {
      if (piece.contains("Sequence")) {
        const std::string id = piece["Sequence"].at("id").get<std::string>();
        t.items.push_back({id == "A" ? 0 : 1, {}, piece["Sequence"].value("type_id", 0)});
      } else if (piece.contains("SpecialToken")) {
        const std::string id = piece["SpecialToken"].at("id").get<std::string>();
        if (!specials.contains(id)) {
          throw Error(ErrorKind::config, "template uses undefined special token " + id);
        }
        t.items.push_back(
            {-1, specials[id].at("ids").get<std::vector<std::int64_t>>(),
             piece["SpecialToken"].value("type_id", 0)});
      } else {
        unsupported("template piece", piece.dump());
      }
    }
    return t;
  }
  unsupported("post_processor", type);
}

}  // namespace

struct Tokenizer::Impl {
  Normalize normalize;
  PreTokenize pre_tokenize;
  std::unique_ptr<Model> model;
  PairTemplate pair;

  void run(std::string_view text, std::vector<std::string>& tokens,
           std::vector<std::int64_t>& ids) const {
    for (const auto& piece : pre_tokenize(normalize(std::string(text)))) {
      if (!piece.empty()) model->tokenize(piece, tokens, ids);
    }
  }
};

Tokenizer::Tokenizer(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Tokenizer::~Tokenizer() = default;
Tokenizer::Tokenizer(Tokenizer&&) noexcept = default;
Tokenizer& Tokenizer::operator=(Tokenizer&&) noexcept = default;

Tokenizer Tokenizer::parse(std::string_view json_text) {
  auto impl = std::make_unique<Impl>();
  try {
    const json spec = json::parse(json_text);
    impl->normalize = make_normalizer(spec.value("normalizer", json()));
    impl->pre_tokenize = make_pre_tokenizer(spec.value("pre_tokenizer", json()));
    const json& model = spec.at("model");
    const std::string type = model.value("type", std::string{});
    if (type == "Unigram") {
      impl->model = std::make_unique<UnigramModel>(model);
    } else if (type == "WordPiece") {
      impl->model = std::make_unique<WordPieceModel>(model);
    } else {
      unsupported("model", type);
    }
    impl->pair = make_template(spec.value("post_processor", json()));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("tokenizer: ") + e.what());
  }
  return Tokenizer(std::move(impl));
}

Tokenizer Tokenizer::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::int64_t> Tokenizer::encode(std::string_view text) const {
  std::vector<std::string> tokens;
  std::vector<std::int64_t> ids;
  impl_->run(text, tokens, ids);
  return ids;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> tokens;
  std::vector<std::int64_t> ids;
  impl_->run(text, tokens, ids);
  return tokens;
}

Encoding Tokenizer::encode_pair(std::string_view first, std::string_view second,
                                std::size_t max_length) const {
  std::vector<std::int64_t> a = encode(first);
  std::vector<std::int64_t> b = encode(second);
  const std::size_t specials = impl_->pair.special_count();
  if (max_length <= specials) {
    throw Error(ErrorKind::config, "max_length leaves no room for the sequences");
  }
  const std::size_t budget = max_length - specials;
  while (a.size() + b.size() > budget) {
    if (a.size() > b.size()) {
      a.pop_back();
    } else {
      b.pop_back();
    }
  }
  Encoding enc;
  for (const auto& item : impl_->pair.items) {
    const auto& ids = item.sequence < 0 ? item.ids : (item.sequence == 0 ? a : b);
    enc.ids.insert(enc.ids.end(), ids.begin(), ids.end());
    enc.type_ids.insert(enc.type_ids.end(), ids.size(), item.type_id);
  }
  enc.attention_mask.assign(enc.ids.size(), 1);
  return enc;
}

}  // namespace hsnli
