#include "apt/normalize.hpp"

#include <optional>

#include "apt/utf8.hpp"

namespace apt::corpus {
namespace {

// Byte a code point came from when UTF-8 was misread as Windows-1252.
// C1 positions that 1252 leaves undefined fall back to Latin-1.
std::optional<unsigned char> misread_byte(char32_t cp) {
  if (cp >= 0x80 && cp <= 0xFF) return static_cast<unsigned char>(cp);
  switch (cp) {
    case 0x20AC: return 0x80;
    case 0x201A: return 0x82;
    case 0x0192: return 0x83;
    case 0x201E: return 0x84;
    case 0x2026: return 0x85;
    case 0x2020: return 0x86;
    case 0x2021: return 0x87;
    case 0x02C6: return 0x88;
    case 0x2030: return 0x89;
    case 0x0160: return 0x8A;
    case 0x2039: return 0x8B;
    case 0x0152: return 0x8C;
    case 0x017D: return 0x8E;
    case 0x2018: return 0x91;
    case 0x2019: return 0x92;
    case 0x201C: return 0x93;
    case 0x201D: return 0x94;
    case 0x2022: return 0x95;
    case 0x2013: return 0x96;
    case 0x2014: return 0x97;
    case 0x02DC: return 0x98;
    case 0x2122: return 0x99;
    case 0x0161: return 0x9A;
    case 0x203A: return 0x9B;
    case 0x0153: return 0x9C;
    case 0x017E: return 0x9E;
    case 0x0178: return 0x9F;
    default: return std::nullopt;
  }
}

bool is_continuation(std::optional<unsigned char> b) { return b && (*b & 0xC0) == 0x80; }

// Attempts to read a misencoded multi-byte sequence starting at pos.
std::optional<std::pair<char32_t, std::size_t>> repair_at(const std::u32string& text, std::size_t pos) {
  const auto lead = misread_byte(text[pos]);
  if (!lead) return std::nullopt;
  std::size_t len = 0;
  if (*lead >= 0xC2 && *lead <= 0xDF) len = 2;
  else if (*lead >= 0xE0 && *lead <= 0xEF) len = 3;
  else if (*lead >= 0xF0 && *lead <= 0xF4) len = 4;
  else return std::nullopt;
  if (pos + len > text.size()) return std::nullopt;

  std::string bytes(1, static_cast<char>(*lead));
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = misread_byte(text[pos + k]);
    if (!is_continuation(b)) return std::nullopt;
    bytes.push_back(static_cast<char>(*b));
  }
  const auto decoded = utf8::decode(bytes);
  // A valid sequence decodes to exactly one code point.
  if (decoded.size() != 1 || decoded[0] < 0x80) return std::nullopt;
  return std::make_pair(decoded[0], len);
}

bool is_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_invisible(char32_t cp) { return cp == 0x200B || cp == 0x200C || cp == 0x200D || cp == 0xFEFF; }

}  // namespace

std::u32string repair_mojibake(std::u32string text) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::u32string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
      if (const auto fixed = repair_at(text, i)) {
        if (!is_invisible(fixed->first)) out.push_back(fixed->first);
        i += fixed->second;
        changed = true;
      } else {
        out.push_back(text[i]);
        ++i;
      }
    }
    text = std::move(out);
  }
  return text;
}

std::string normalize_text(std::string_view raw) {
  std::u32string visible;
  for (char32_t cp : utf8::decode(raw)) {
    if (!is_invisible(cp)) visible.push_back(cp);
  }
  const std::u32string repaired = repair_mojibake(std::move(visible));

  std::u32string mapped;
  mapped.reserve(repaired.size());
  for (char32_t cp : repaired) {
    switch (cp) {
      case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x2032:
        mapped.push_back(U'\'');
        break;
      case 0x201C: case 0x201D: case 0x201E: case 0x201F: case 0x2033:
        mapped.push_back(U'"');
        break;
      case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014: case 0x2015: case 0x2212:
        mapped.push_back(U'-');
        break;
      case 0x2026:
        mapped.append(U"...");
        break;
      default:
        mapped.push_back(cp);
    }
  }

  std::u32string collapsed;
  collapsed.reserve(mapped.size());
  bool pending_space = false;
  for (char32_t cp : mapped) {
    if (is_space(cp)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed.push_back(U' ');
    pending_space = false;
    collapsed.push_back(cp);
  }
  return utf8::encode(collapsed);
}

}  // namespace apt::corpus
