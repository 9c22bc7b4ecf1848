#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "tailadapt/errors.hpp"
#include "tailadapt/harness.hpp"

namespace tailadapt::io {

/// Shortest decimal representation that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Reads one observation per line. Fields may be separated by commas,
/// semicolons or whitespace; every field on a line is an observation. A
/// first content line that does not parse as numbers is taken as a header. Blank
/// lines and lines starting with '#' are skipped.
inline std::vector<double> parse_observations(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream fields(line);
    std::string field;
    std::vector<double> row;
    bool numeric = true;
    while (fields >> field) {
      if (field[0] == '#') break;
      double v = 0.0;
      const char* end = field.data() + field.size();
      const auto res = std::from_chars(field.data(), end, v);
      if (res.ec != std::errc() || res.ptr != end) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (!seen_data && !seen_header) {
        seen_header = true;
        continue;
      }
      throw argument_error("unparseable observation at line " + std::to_string(line_no));
    }
    for (double v : row) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw argument_error("non-positive observation at line " + std::to_string(line_no));
      }
      out.push_back(v);
      seen_data = true;
    }
  }
  if (out.empty()) throw argument_error("input contains no observations");
  return out;
}

inline std::vector<double> read_observations(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw argument_error("cannot read input file " + path);
  return parse_observations(f);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw argument_error("cannot write " + path);
  f << text;
  if (!f) throw argument_error("failed writing " + path);
}

inline std::string table_csv(const Table& t) {
  std::string s;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) s += ',';
    s += t.columns[c];
  }
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) s += ',';
      s += std::isnan(row[c]) ? std::string("error") : format_double(row[c]);
    }
    s += '\n';
  }
  return s;
}

}  // namespace tailadapt::io
