#include "betadpd/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "betadpd/error.hpp"

namespace betadpd::io {
namespace {

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw ParseError(source + ": no column named '" + std::string(name) + "'");
}

std::vector<double> CsvTable::numeric(std::string_view name) const {
  const std::size_t j = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      out.push_back(parse_real(rows[i][j], name));
    } catch (const ParseError& e) {
      throw ParseError(where(source, lines[i]) + e.what());
    }
  }
  return out;
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  t.source = source;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;        // inside a quoted field
  bool field_started = false;  // current record has content
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool first = true;

  auto finish_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    if (first) {
      for (auto& h : record) h = trim(h);
      // A UTF-8 byte-order mark would otherwise stick to the first name.
      if (!record.empty() && record[0].rfind("\xEF\xBB\xBF", 0) == 0) record[0].erase(0, 3);
      t.header = std::move(record);
      first = false;
    } else if (record.size() != t.header.size()) {
      throw ParseError(where(source, record_line) + "expected " + std::to_string(t.header.size()) +
                       " fields, found " + std::to_string(record.size()));
    } else {
      t.rows.push_back(std::move(record));
      t.lines.push_back(record_line);
    }
    record.clear();
    field_started = false;
  };

  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '\r') continue;
    if (c == '\n') {
      if (field_started || !field.empty() || !record.empty()) finish_record();
      ++line;
      record_line = line;
      continue;
    }
    if (!field_started) {
      field_started = true;
      record_line = line;
    }
    if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError(where(source, record_line) + "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) finish_record();
  if (first) throw ParseError(source + ": empty file, a header row is required");
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j].empty()) throw ParseError(where(source, 1) + "empty column name");
    for (std::size_t k = 0; k < j; ++k) {
      if (t.header[k] == t.header[j]) {
        throw ParseError(where(source, 1) + "duplicate column '" + t.header[j] + "'");
      }
    }
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_csv(in, path);
}

std::map<std::string, std::string> read_key_values(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(where(source, line) + "expected key = value");
    std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ParseError(where(source, line) + "empty key");
    if (kv.count(key)) throw ParseError(where(source, line) + "duplicate key '" + key + "'");
    kv.emplace(std::move(key), trim(s.substr(eq + 1)));
  }
  return kv;
}

std::map<std::string, std::string> read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_key_values(in, path);
}

std::string fmt(double v) {
  char buf[40];
  // Shortest of 15..17 significant digits that reads back to the same double.
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (digits == 17 || std::strtod(buf, nullptr) == v || std::isnan(v)) break;
  }
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  // strtod rather than from_chars: libstdc++ 11 lacks the floating overloads.
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ParseError("'" + t + "' is not a number (" + std::string(what) + ")");
  }
  return v;
}

long long parse_integer(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("'" + t + "' is not an integer (" + std::string(what) + ")");
  }
  return v;
}

bool parse_bool(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ParseError("'" + t + "' is not a boolean (" + std::string(what) + ")");
}

std::vector<double> parse_real_list(std::string_view s, std::string_view what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_real(part, what));
  return out;
}

}  // namespace betadpd::io
