#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hsnli {

struct Encoding {
  std::vector<std::int64_t> ids;
  std::vector<std::int64_t> type_ids;
  std::vector<std::int64_t> attention_mask;
};

// Reader for the tokenizer.json files written by the Hugging Face tokenizers
// library. Supported components:
//   normalizer     Sequence, BertNormalizer, Lowercase, NFC, NFD, NFKC, NFKD,
//                  StripAccents, Strip, Replace (literal pattern), Precompiled
//                  (applied as NFKC)
//   pre_tokenizer  Sequence, Metaspace, Whitespace, WhitespaceSplit,
//                  BertPreTokenizer
//   model          Unigram, WordPiece
//   post_processor RobertaProcessing, BertProcessing, TemplateProcessing
// Anything else is a config error at load time.
class Tokenizer {
 public:
  ~Tokenizer();
  Tokenizer(Tokenizer&&) noexcept;
  Tokenizer& operator=(Tokenizer&&) noexcept;

  static Tokenizer parse(std::string_view json_text);
  static Tokenizer load(const std::filesystem::path& path);

  // Token ids without special tokens.
  std::vector<std::int64_t> encode(std::string_view text) const;
  std::vector<std::string> tokenize(std::string_view text) const;

  // Pair encoding with special tokens. Sequences are truncated longest-first
  // so the result has at most `max_length` ids.
  Encoding encode_pair(std::string_view first, std::string_view second,
                       std::size_t max_length) const;

 private:
  struct Impl;
  explicit Tokenizer(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace hsnli
