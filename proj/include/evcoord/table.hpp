#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evcoord {

// 17-significant-digit decimal form: round-trips every double exactly and
// keeps serialized files byte-stable across re-runs.
std::string fmt_double(double v);

std::vector<std::string> split_csv(std::string_view line);

// Parsing helpers that raise ConfigError with "origin:line:" prefixes.
double parse_double_field(std::string_view text, const std::string& origin, int line_no);
int parse_int_field(std::string_view text, const std::string& origin, int line_no);

// Splits text into lines, dropping blank lines and '#' comments but keeping
// the 1-based line number of each surviving line for diagnostics.
struct NumberedLine {
  int number;
  std::string text;
};
std::vector<NumberedLine> significant_lines(std::string_view text);

// Minutes since midnight of day 0 from an "HH:MM" literal.
int parse_clock_minutes(std::string_view text, const std::string& origin);
std::string format_clock(int minutes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace evcoord
