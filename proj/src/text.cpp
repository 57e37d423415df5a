#include "hsnli/text.hpp"

#include <array>

namespace hsnli {
namespace {

struct Decoded {
  char32_t cp;
  std::size_t length;
};

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Malformed sequences decode as a single invalid byte so they pass through
// untouched and never count as word characters.
Decoded decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {kInvalid, 1};
  }
  if (i + len > s.size()) return {kInvalid, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {kInvalid, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

// Code point of the character ending right before byte offset `end`.
char32_t decode_before(std::string_view s, std::size_t end) {
  if (end == 0) return kInvalid;
  std::size_t start = end - 1;
  std::size_t back = 0;
  while (start > 0 && back < 3 &&
         (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) {
    --start;
    ++back;
  }
  const Decoded d = decode_utf8(s, start);
  if (start + d.length != end) return kInvalid;
  return d.cp;
}

bool word_before(std::string_view s, std::size_t pos) {
  if (pos == 0) return false;
  const char32_t cp = decode_before(s, pos);
  return cp != kInvalid && is_word_codepoint(cp);
}

bool word_at(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return false;
  const Decoded d = decode_utf8(s, pos);
  return d.cp != kInvalid && is_word_codepoint(d.cp);
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    char c = s[pos + k];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[k]) return false;
  }
  return true;
}

constexpr std::array<std::string_view, 3> kUrlPrefixes = {"http://", "https://", "www."};

bool url_starts_at(std::string_view s, std::size_t pos) {
  if (word_before(s, pos)) return false;
  for (auto prefix : kUrlPrefixes) {
    if (starts_with_ci(s, pos, prefix)) return true;
  }
  return false;
}

// Length of "@" plus its word run, or 0 when no handle starts at pos.
std::size_t handle_length_at(std::string_view s, std::size_t pos) {
  if (s[pos] != '@' || word_before(s, pos)) return 0;
  std::size_t end = pos + 1;
  while (end < s.size()) {
    const Decoded d = decode_utf8(s, end);
    if (d.cp == kInvalid || !is_word_codepoint(d.cp)) break;
    end += d.length;
  }
  return end == pos + 1 ? 0 : end - pos;
}

}  // namespace

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_codepoint(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= '0' && cp <= '9') || cp == '_';
  }
  if (cp < 0xC0) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE00 && cp <= 0xFE0F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0x1F000) return false;
  return cp <= 0x10FFFF;
}

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (const std::size_t handle = handle_length_at(text, i); handle > 0) {
      out += "@user";
      i += handle;
      continue;
    }
    if (url_starts_at(text, i)) {
      out += "https";
      while (i < text.size() && !is_ascii_space(text[i])) ++i;
      continue;
    }
    out += text[i];
    ++i;
  }
  return out;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool contains_term(std::string_view text, std::string_view term) {
  if (term.empty()) return false;
  const std::string hay = ascii_lower(text);
  const std::string needle = ascii_lower(term);
  std::size_t pos = hay.find(needle);
  while (pos != std::string::npos) {
    const std::size_t end = pos + needle.size();
    const bool left_ok = !word_before(hay, pos) || !word_at(hay, pos);
    const bool right_ok = !word_at(hay, end) || !word_before(hay, end);
    if (left_ok && right_ok) return true;
    pos = hay.find(needle, pos + 1);
  }
  return false;
}

}  // namespace hsnli
