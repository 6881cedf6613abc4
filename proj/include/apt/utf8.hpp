#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace apt::utf8 {

// Decodes UTF-8; bytes that do not start a valid sequence decode as their
// Latin-1 code point, so the function is total.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view cps);
void append(std::string& out, char32_t cp);

// Splits into one string per code point.
std::vector<std::string> chars(std::string_view bytes);

}  // namespace apt::utf8
