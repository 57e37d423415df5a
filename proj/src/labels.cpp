#include "hsnli/labels.hpp"

namespace hsnli {

std::string_view to_string(HateLabel label) {
  return label == HateLabel::hate ? "hate" : "not_hate";
}

std::string_view to_string(NliLabel label) {
  switch (label) {
    case NliLabel::entailment:
      return "entailment";
    case NliLabel::neutral:
      return "neutral";
    case NliLabel::contradiction:
      return "contradiction";
  }
  return "neutral";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::test:
      return "test";
  }
  return "train";
}

std::optional<HateLabel> parse_hate_label(std::string_view text) {
  if (text == "hate") return HateLabel::hate;
  if (text == "not_hate") return HateLabel::not_hate;
  return std::nullopt;
}

std::optional<NliLabel> parse_nli_label(std::string_view text) {
  if (text == "entailment") return NliLabel::entailment;
  if (text == "neutral") return NliLabel::neutral;
  if (text == "contradiction") return NliLabel::contradiction;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "validation") return Split::validation;
  if (text == "test") return Split::test;
  return std::nullopt;
}

}  // namespace hsnli
