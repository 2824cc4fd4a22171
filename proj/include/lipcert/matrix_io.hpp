#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lipcert/errors.hpp"
#include "lipcert/linalg.hpp"

namespace lipcert {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Parses a CSV matrix: one row per line, comma-separated decimal numbers,
// '#' comment lines, LF or CRLF endings. Must be square and finite.
inline SquareMatrix parse_matrix_csv(const std::string& text,
                                     const std::string& origin = "<string>") {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;  // UTF-8 BOM

  while (pos <= text.size()) {
    if (pos == text.size() && line_no > 0) break;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const std::string_view stripped = detail::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    std::vector<double> row;
    std::size_t field_start = 0;
    while (true) {
      std::size_t comma = line.find(',', field_start);
      const bool last = comma == std::string_view::npos;
      if (last) comma = line.size();
      const std::string_view raw = line.substr(field_start, comma - field_start);
      std::string_view field = detail::trim(raw);
      // column of the field within the line, 1-based
      const std::size_t column =
          field.empty() ? field_start + 1
                        : static_cast<std::size_t>(field.data() - line.data()) + 1;
      if (field.empty())
        throw ParseError("empty field in " + origin, line_no, column);
      if (field.front() == '+') field.remove_prefix(1);
      double v = 0.0;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || end != field.data() + field.size())
        throw ParseError("malformed number '" + std::string(field) + "' in " + origin,
                         line_no, column);
      if (!std::isfinite(v))
        throw NonFiniteError("non-finite entry '" + std::string(field) + "' in " +
                             origin + " at line " + std::to_string(line_no));
      row.push_back(v);
      if (last) break;
      field_start = comma + 1;
    }
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw ParseError("no matrix rows in " + origin, 1, 1);
  const std::size_t d = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() != d)
      throw NotSquareError("row " + std::to_string(i + 1) + " has " +
                           std::to_string(rows[i].size()) + " entries, expected " +
                           std::to_string(d) + " in " + origin);
  if (rows.size() != d)
    throw NotSquareError(origin + " has " + std::to_string(rows.size()) +
                         " rows of " + std::to_string(d) + " columns");

  std::vector<double> entries;
  entries.reserve(d * d);
  for (auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
  return SquareMatrix(d, std::move(entries));
}

inline SquareMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return parse_matrix_csv(buf.str(), path);
}

// Full-precision CSV serialization; reloads bit-exactly.
inline std::string matrix_to_csv(const SquareMatrix& m) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline void dump_matrix(const SquareMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << matrix_to_csv(m);
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace lipcert
