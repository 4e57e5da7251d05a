#pragma once

// Text input and output helpers: RFC 4180-style CSV with a mandatory header,
// flat "key = value" documents, and number formatting for reports.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace betadpd::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Source line on which each row starts (1-based).
  std::vector<std::size_t> lines;
  std::string source;

  /// Throws ParseError when the column is absent.
  std::size_t column(std::string_view name) const;
  /// Parses a column as reals; errors name the file and line.
  std::vector<double> numeric(std::string_view name) const;
};

/// Throws ParseError with a line number on ragged rows, unterminated quotes or
/// an empty document.
CsvTable read_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv_file(const std::string& path);

/// '#' starts a comment; blank lines are skipped; duplicate keys throw.
std::map<std::string, std::string> read_key_values(std::istream& in,
                                                   const std::string& source = "<input>");
std::map<std::string, std::string> read_key_values_file(const std::string& path);

/// Up to 17 significant digits: the shortest text that reads back as the same double.
std::string fmt(double v);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
/// Whole-string conversion; throws ParseError naming `what`.
double parse_real(std::string_view s, std::string_view what);
long long parse_integer(std::string_view s, std::string_view what);
bool parse_bool(std::string_view s, std::string_view what);
/// Comma-separated reals.
std::vector<double> parse_real_list(std::string_view s, std::string_view what);

}  // namespace betadpd::io
