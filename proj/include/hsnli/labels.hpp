#pragma once

#include <optional>
#include <string_view>

namespace hsnli {

enum class HateLabel { not_hate, hate };

enum class NliLabel { entailment, neutral, contradiction };

enum class Split { train, validation, test };

std::string_view to_string(HateLabel label);
std::string_view to_string(NliLabel label);
std::string_view to_string(Split split);

std::optional<HateLabel> parse_hate_label(std::string_view text);
std::optional<NliLabel> parse_nli_label(std::string_view text);
std::optional<Split> parse_split(std::string_view text);

}  // namespace hsnli
