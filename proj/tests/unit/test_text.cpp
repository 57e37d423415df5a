#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "hsnli/text.hpp"

namespace {

using hsnli::normalize;

struct GoldenCase {
  std::string input;
  std::string expected;
};

std::vector<GoldenCase> read_golden() {
  std::ifstream in(std::string(HSNLI_TEST_DATA_DIR) + "/normalizer_golden.tsv");
  std::vector<GoldenCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    cases.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return cases;
}

TEST(Normalize, GoldenFile) {
  const auto cases = read_golden();
  ASSERT_GE(cases.size(), 30u);
  for (const auto& c : cases) EXPECT_EQ(normalize(c.input), c.expected) << "input: " << c.input;
}

TEST(Normalize, GoldenOutputsAreFixedPoints) {
  for (const auto& c : read_golden()) EXPECT_EQ(normalize(c.expected), c.expected);
}

TEST(Normalize, EmptyAndPlain) {
  EXPECT_EQ(normalize(""), "");
  EXPECT_EQ(normalize("plain text"), "plain text");
}

TEST(Normalize, UrlStopsAtAnyAsciiWhitespace) {
  EXPECT_EQ(normalize("a https://x.y\tb"), "a https\tb");
  EXPECT_EQ(normalize("a https://x.y\nb"), "a https\nb");
}

TEST(Normalize, InvalidUtf8PassesThrough) {
  const std::string bad = "\xC3@bob \xFF";
  EXPECT_EQ(normalize(bad), "\xC3@user \xFF");
}

std::string random_string(std::mt19937_64& rng) {
  static const std::vector<std::string> alphabet = {
      "@", "@", "w", "w", "w", ".", "h", "t", "t", "p", "s", ":", "/", "/", " ", "\t",
      "a", "B", "_", "1", "é", "ß", "…", "😀", "日", "\xC3", "\xA9", "\xFF", "user",
      "https://", "www.", "@user", "-", "(", "\n", "×", "्", "ا"};
  std::uniform_int_distribution<std::size_t> len(0, 24);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng)];
  return s;
}

TEST(Normalize, IdempotentOnRandomStrings) {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 10000; ++i) {
    const std::string s = random_string(rng);
    const std::string once = normalize(s);
    ASSERT_EQ(normalize(once), once) << "input: " << s;
  }
}

TEST(WordCodepoint, Classes) {
  EXPECT_TRUE(hsnli::is_word_codepoint(U'a'));
  EXPECT_TRUE(hsnli::is_word_codepoint(U'_'));
  EXPECT_TRUE(hsnli::is_word_codepoint(U'9'));
  EXPECT_FALSE(hsnli::is_word_codepoint(U'-'));
  EXPECT_TRUE(hsnli::is_word_codepoint(U'é'));
  EXPECT_FALSE(hsnli::is_word_codepoint(U'×'));
  EXPECT_FALSE(hsnli::is_word_codepoint(U'÷'));
  EXPECT_FALSE(hsnli::is_word_codepoint(U'’'));
  EXPECT_FALSE(hsnli::is_word_codepoint(U'。'));
  EXPECT_FALSE(hsnli::is_word_codepoint(U'\U0001F600'));
  EXPECT_TRUE(hsnli::is_word_codepoint(U'न'));
}

TEST(ContainsTerm, WordBoundaries) {
  EXPECT_TRUE(hsnli::contains_term("you are a Slur!", "slur"));
  EXPECT_TRUE(hsnli::contains_term("slur", "SLUR"));
  EXPECT_FALSE(hsnli::contains_term("slurring words", "slur"));
  EXPECT_FALSE(hsnli::contains_term("noslur", "slur"));
  EXPECT_TRUE(hsnli::contains_term("(slur)", "slur"));
  EXPECT_FALSE(hsnli::contains_term("anything", ""));
  EXPECT_TRUE(hsnli::contains_term("two word term here", "word term"));
  EXPECT_FALSE(hsnli::contains_term("sluré", "slur"));
}

}  // namespace
