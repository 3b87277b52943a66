#ifndef TAYLORLAW_CSV_HPP
#define TAYLORLAW_CSV_HPP

// Minimal CSV reader/writer shared by the table parsers and the CLI reports.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "taylorlaw/error.hpp"

namespace taylorlaw::csv {

struct Record {
  std::size_t line_no = 0;  // 1-based physical line number
  std::vector<std::string> fields;
};

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// A comment line starts with '#' followed by whitespace or nothing. Lines
/// such as "#400,100,..." are data: sample identifiers commonly start with '#'.
inline bool is_comment(std::string_view line) {
  if (line.empty() || line.front() != '#') return false;
  return line.size() == 1 || line[1] == ' ' || line[1] == '\t' || line[1] == '\r';
}

inline std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      if (!trim(field).empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": stray quote inside unquoted field");
      }
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      out.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      if (was_quoted && ch != ' ' && ch != '\t' && ch != '\r') {
        throw ParseError("line " + std::to_string(line_no) + ": text after closing quote");
      }
      if (!was_quoted) field.push_back(ch);
    }
  }
  if (quoted) throw ParseError("line " + std::to_string(line_no) + ": unterminated quoted field");
  out.push_back(was_quoted ? field : std::string(trim(field)));
  return out;
}

/// Reads every non-blank, non-comment line as a record.
inline std::vector<Record> read_records(std::istream& in) {
  std::vector<Record> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty() || is_comment(line)) continue;
    records.push_back({line_no, split_line(line, line_no)});
  }
  return records;
}

inline std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos && trim(s) == s) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

/// Parses a complete token as a finite double; nullopt on any trailing junk.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

/// Shortest representation that parses back to the same double.
inline std::string format_exact(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

/// Fixed 12-significant-digit formatting used by every report.
inline std::string format12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.12g", v);
  return buf.data();
}

/// Rounds to 12 significant digits so that JSON serialization is stable.
inline double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  return std::strtod(format12(v).c_str(), nullptr);
}

}  // namespace taylorlaw::csv

#endif  // TAYLORLAW_CSV_HPP
