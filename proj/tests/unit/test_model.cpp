#include <gtest/gtest.h>

#include <cmath>

#include "hsnli/error.hpp"
#include "hsnli/model.hpp"
#include "hsnli/tokenizer.hpp"
#include "support/temp_dir.hpp"
#include "support/toy_grid.hpp"

namespace {

using namespace hsnli;

const char* const kMetadata = R"({
  "format": "hsnli-nli-model", "version": 1, "identity": "X+NLI/es/n0/seed0",
  "model_file": "model.onnx", "tokenizer_file": "tokenizer.json",
  "label_indices": {"entailment": 2, "neutral": 1, "contradiction": 0},
  "max_length": 64, "model_kind": "monolingual",
  "inputs": ["input_ids", "attention_mask"], "output": "logits"})";

std::string with(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

TEST(ModelMetadata, Parses) {
  const auto meta = parse_model_metadata(kMetadata);
  EXPECT_EQ(meta.identity, "X+NLI/es/n0/seed0");
  EXPECT_EQ(meta.label_indices, (std::array<std::size_t, 3>{2, 1, 0}));
  EXPECT_EQ(meta.max_length, 64u);
  EXPECT_EQ(meta.model_kind, ModelKind::monolingual);
  EXPECT_EQ(meta.inputs.size(), 2u);
}

TEST(ModelMetadata, Rejects) {
  EXPECT_THROW(parse_model_metadata(with(kMetadata, "hsnli-nli-model", "other")), Error);
  EXPECT_THROW(parse_model_metadata(with(kMetadata, "\"version\": 1", "\"version\": 2")), Error);
  EXPECT_THROW(parse_model_metadata(with(kMetadata, "\"neutral\": 1", "\"neutral\": 2")), Error);
  EXPECT_THROW(parse_model_metadata(with(kMetadata, "\"max_length\": 64", "\"max_length\": 4")),
               Error);
  EXPECT_THROW(parse_model_metadata(with(kMetadata, "monolingual", "bilingual")), Error);
  EXPECT_THROW(parse_model_metadata(with(kMetadata, "[\"input_ids\", ", "[")), Error);
  EXPECT_THROW(parse_model_metadata("{"), Error);
  try {
    parse_model_metadata(with(kMetadata, "\"identity\"", "\"name\""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
}

TEST(ModelDirectory, ChecksFiles) {
  test::TempDir dir;
  EXPECT_THROW(load_model_directory(dir / "absent"), Error);
  test::write_text(dir / "m/metadata.json", kMetadata);
  EXPECT_THROW(load_model_directory(dir / "m"), Error);
  test::write_text(dir / "m/model.onnx", "x");
  EXPECT_THROW(load_model_directory(dir / "m"), Error);
  test::write_text(dir / "m/tokenizer.json", "{}");
  const auto meta = load_model_directory(dir / "m");
  EXPECT_EQ(meta.model_file, dir / "m/model.onnx");
  EXPECT_EQ(meta.tokenizer_file, dir / "m/tokenizer.json");
  if (!onnxruntime_available()) {
    try {
      load_model_backend(dir / "m");
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::backend);
    }
  }
}

TEST(ScoresFromLogits, SoftmaxAndReorder) {
  const float logits[] = {0.0f, std::log(2.0f), std::log(5.0f)};
  const auto s = scores_from_logits(logits, {2, 1, 0});
  EXPECT_NEAR(s.entailment, 5.0 / 8.0, 1e-6);
  EXPECT_NEAR(s.neutral, 2.0 / 8.0, 1e-6);
  EXPECT_NEAR(s.contradiction, 1.0 / 8.0, 1e-6);
  const float large[] = {1000.0f, 1000.0f, -1000.0f};
  const auto t = scores_from_logits(large, {0, 1, 2});
  EXPECT_NEAR(t.entailment, 0.5, 1e-12);
  EXPECT_TRUE(is_valid(t));
  const float two[] = {1.0f, 2.0f};
  EXPECT_THROW(scores_from_logits(two, {0, 1, 2}), Error);
  const float bad[] = {1.0f, NAN, 0.0f};
  EXPECT_THROW(scores_from_logits(bad, {0, 1, 2}), Error);
}

const char* const kWordPiece = R"({
  "normalizer": {"type": "BertNormalizer", "lowercase": true},
  "pre_tokenizer": {"type": "BertPreTokenizer"},
  "model": {"type": "WordPiece", "unk_token": "[UNK]", "continuing_subword_prefix": "##",
            "vocab": {"[UNK]": 0, "[CLS]": 1, "[SEP]": 2, "un": 3, "##aff": 4, "##able": 5,
                      "hello": 6, ",": 7, "cafe": 8}},
  "post_processor": {"type": "BertProcessing", "cls": ["[CLS]", 1], "sep": ["[SEP]", 2]}})";

TEST(Tokenizer, WordPiece) {
  const auto tok = Tokenizer::parse(kWordPiece);
  EXPECT_EQ(tok.tokenize("Unaffable, HELLO"),
            (std::vector<std::string>{"un", "##aff", "##able", ",", "hello"}));
  EXPECT_EQ(tok.encode("Café xyz"), (std::vector<std::int64_t>{8, 0}));
  const auto enc = tok.encode_pair("hello", "unaffable", 16);
  EXPECT_EQ(enc.ids, (std::vector<std::int64_t>{1, 6, 2, 3, 4, 5, 2}));
  EXPECT_EQ(enc.type_ids, (std::vector<std::int64_t>{0, 0, 0, 1, 1, 1, 1}));
  EXPECT_EQ(enc.attention_mask, std::vector<std::int64_t>(7, 1));
}

const char* const kUnigram = R"({
  "normalizer": {"type": "Precompiled", "precompiled_charsmap": ""},
  "pre_tokenizer": {"type": "Metaspace", "replacement": "▁", "prepend_scheme": "always"},
  "model": {"type": "Unigram", "unk_id": 0,
            "vocab": [["<unk>", 0.0], ["▁", -1.0], ["▁hel", -2.0], ["lo", -2.0],
                      ["▁hello", -3.5], ["h", -3.0], ["e", -3.0], ["l", -3.0],
                      ["o", -3.0], ["<s>", 0.0], ["</s>", 0.0]]},
  "post_processor": {"type": "RobertaProcessing", "cls": ["<s>", 9], "sep": ["</s>", 10]}})";

TEST(Tokenizer, UnigramViterbi) {
  const auto tok = Tokenizer::parse(kUnigram);
  EXPECT_EQ(tok.tokenize("hello"), (std::vector<std::string>{"▁hello"}));
  EXPECT_EQ(tok.tokenize("hellx"), (std::vector<std::string>{"▁hel", "l", "x"}));
  EXPECT_EQ(tok.encode("hellx"), (std::vector<std::int64_t>{2, 7, 0}));
  EXPECT_EQ(tok.tokenize("xy"), (std::vector<std::string>{"▁", "xy"}));
  EXPECT_EQ(tok.encode("hello hello"), (std::vector<std::int64_t>{4, 4}));
  // Full-width letters fold to ASCII under NFKC.
  EXPECT_EQ(tok.encode("ｈｅｌｌｏ"), (std::vector<std::int64_t>{4}));
}

TEST(Tokenizer, RobertaPairAndTruncation) {
  const auto tok = Tokenizer::parse(kUnigram);
  const auto enc = tok.encode_pair("hello", "hello", 64);
  EXPECT_EQ(enc.ids, (std::vector<std::int64_t>{9, 4, 10, 10, 4, 10}));
  EXPECT_EQ(enc.type_ids, std::vector<std::int64_t>(6, 0));

  // 5 + 3 ids into a budget of 6: the longer side is trimmed first.
  const auto trimmed = tok.encode_pair("hello hello hello hello hello", "hello hello hello", 10);
  EXPECT_EQ(trimmed.ids.size(), 10u);
  EXPECT_EQ(trimmed.ids, (std::vector<std::int64_t>{9, 4, 4, 4, 10, 10, 4, 4, 4, 10}));
  // Ties trim the second sequence.
  const auto tie = tok.encode_pair("hello hello", "hello hello", 7);
  EXPECT_EQ(tie.ids, (std::vector<std::int64_t>{9, 4, 4, 10, 10, 4, 10}));
  EXPECT_THROW(tok.encode_pair("hello", "hello", 4), Error);
}

TEST(Tokenizer, TemplateProcessing) {
  std::string spec = kWordPiece;
  spec = with(spec, R"({"type": "BertProcessing", "cls": ["[CLS]", 1], "sep": ["[SEP]", 2]})",
              R"({"type": "TemplateProcessing",
                  "pair": [{"SpecialToken": {"id": "[CLS]", "type_id": 0}},
                           {"Sequence": {"id": "A", "type_id": 0}},
                           {"SpecialToken": {"id": "[SEP]", "type_id": 0}},
                           {"Sequence": {"id": "B", "type_id": 1}}],
                  "special_tokens": {"[CLS]": {"id": "[CLS]", "ids": [1], "tokens": ["[CLS]"]},
                                     "[SEP]": {"id": "[SEP]", "ids": [2], "tokens": ["[SEP]"]}}})");
  const auto tok = Tokenizer::parse(spec);
  const auto enc = tok.encode_pair("hello", "hello", 32);
  EXPECT_EQ(enc.ids, (std::vector<std::int64_t>{1, 6, 2, 6}));
  EXPECT_EQ(enc.type_ids, (std::vector<std::int64_t>{0, 0, 0, 1}));
}

TEST(Tokenizer, Whitespace) {
  std::string spec = with(kWordPiece, R"({"type": "BertPreTokenizer"})",
                          R"({"type": "Sequence", "pretokenizers": [{"type": "Whitespace"}]})");
  const auto tok = Tokenizer::parse(spec);
  EXPECT_EQ(tok.tokenize("hello,,  cafe"), (std::vector<std::string>{"hello", "[UNK]", "cafe"}));
}

TEST(Tokenizer, RejectsUnsupported) {
  EXPECT_THROW(Tokenizer::parse(with(kWordPiece, "\"WordPiece\"", "\"BPE\"")), Error);
  EXPECT_THROW(Tokenizer::parse(with(kWordPiece, "\"BertPreTokenizer\"", "\"ByteLevel\"")), Error);
  EXPECT_THROW(Tokenizer::parse(with(kWordPiece, "\"[UNK]\", \"continuing", "\"<unk>\", \"continuing")),
               Error);
  EXPECT_THROW(Tokenizer::parse("{"), Error);
  test::TempDir dir;
  EXPECT_THROW(Tokenizer::load(dir / "none.json"), Error);
}

}  // namespace
