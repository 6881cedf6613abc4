#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apt::pipeline {

// A rectangular table of already-formatted cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180: fields containing a comma, quote, CR or LF are quoted and inner
// quotes doubled. Lines end with LF.
std::string csv_field(std::string_view field);
std::string to_csv(const Table& t);
// Throws Schema on unterminated quotes or ragged rows.
Table parse_csv(std::string_view text);

// GitHub-flavoured pipe table; '|' in cells is escaped.
std::string to_markdown(const Table& t);

// Fixed-point with `decimals` digits; "n/a" for nullopt or non-finite values.
std::string fmt(std::optional<double> value, int decimals = 4);
// %.10g, used for training curves.
std::string fmt_g(double value);

std::string read_text(const std::filesystem::path& path);
// Creates parent directories. Throws Io.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace apt::pipeline
