#pragma once

#include <string>
#include <string_view>

namespace hsnli {

// Replaces URLs with "https" and user handles with "@user".
//
// A URL starts where "http://", "https://" or "www." (ASCII case-insensitive)
// begins at the start of the text or right after a non-word character, and it
// runs to the next whitespace. A handle is "@" preceded by the start of the
// text or a non-word character and followed by one or more word characters;
// only "@" plus that word run is replaced. Everything else is copied through
// byte for byte. normalize(normalize(x)) == normalize(x).
std::string normalize(std::string_view text);

// Word characters are ASCII letters, digits and '_', plus non-ASCII letters
// approximated as code points >= U+00C0 outside the punctuation, symbol and
// emoji blocks.
bool is_word_codepoint(char32_t cp);

bool is_ascii_space(char c);

std::string ascii_lower(std::string_view text);

// Case-insensitive (ASCII folding) search for `term` occurring with word
// boundaries on both sides.
bool contains_term(std::string_view text, std::string_view term);

}  // namespace hsnli
