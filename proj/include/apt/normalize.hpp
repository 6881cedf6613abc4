#pragma once

#include <string>
#include <string_view>

namespace apt::corpus {

// Cleans raw dataset text:
//   - repairs UTF-8 that was decoded as Windows-1252/Latin-1 and re-encoded
//     ("â€™" -> "’"), repeated until nothing changes;
//   - maps curly quotes to ' and ", en/em dashes to -, the ellipsis to "...";
//   - drops zero-width characters and the BOM;
//   - collapses every whitespace run (Unicode spaces included) to one space
//     and trims both ends.
// Idempotent: normalize_text(normalize_text(s)) == normalize_text(s).
std::string normalize_text(std::string_view raw);

// Only the mojibake repair step, exposed for the loaders' reports and tests.
std::u32string repair_mojibake(std::u32string text);

}  // namespace apt::corpus
