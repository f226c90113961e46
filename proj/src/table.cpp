#include "evcoord/table.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evcoord/errors.hpp"

namespace evcoord {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    std::string_view field = (comma == std::string_view::npos)
                                 ? line.substr(pos)
                                 : line.substr(pos, comma - pos);
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
      field.remove_prefix(1);
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
      field.remove_suffix(1);
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

namespace {
[[noreturn]] void parse_fail(const std::string& origin, int line_no, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + what);
}
}  // namespace

double parse_double_field(std::string_view text, const std::string& origin, int line_no) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    parse_fail(origin, line_no, "expected a number, got '" + std::string(text) + "'");
  return value;
}

int parse_int_field(std::string_view text, const std::string& origin, int line_no) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    parse_fail(origin, line_no, "expected an integer, got '" + std::string(text) + "'");
  return value;
}

std::vector<NumberedLine> significant_lines(std::string_view text) {
  std::vector<NumberedLine> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = (nl == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, nl - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::string_view trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
      trimmed.remove_prefix(1);
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.remove_suffix(1);
    if (!trimmed.empty()) out.push_back({line_no, std::string(trimmed)});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

int parse_clock_minutes(std::string_view text, const std::string& origin) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ConfigError(origin + ": expected HH:MM, got '" + std::string(text) + "'");
  int hh = 0, mm = 0;
  const char* hb = text.data();
  const char* he = hb + colon;
  const char* mb = hb + colon + 1;
  const char* me = text.data() + text.size();
  const auto r1 = std::from_chars(hb, he, hh);
  const auto r2 = std::from_chars(mb, me, mm);
  if (r1.ec != std::errc{} || r1.ptr != he || r2.ec != std::errc{} || r2.ptr != me ||
      hh < 0 || hh > 47 || mm < 0 || mm > 59)
    throw ConfigError(origin + ": expected HH:MM, got '" + std::string(text) + "'");
  return hh * 60 + mm;
}

std::string format_clock(int minutes) {
  const int day_min = minutes % (24 * 60);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", day_min / 60, day_min % 60);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace evcoord
