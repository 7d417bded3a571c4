#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dfw/error.hpp"

namespace dfw::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size() && std::isfinite(out);
}

/// Shortest representation that reads back to the same double.
inline std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Table {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV. The first line is treated as a header when any of
/// its fields fails to parse as a number.
inline Table read_numeric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const char sep = line.find(',') != std::string::npos ? ',' : ' ';
    auto fields = split(line, sep);
    if (sep == ' ') {
      std::erase_if(fields, [](const std::string& f) { return f.empty(); });
    }
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], values[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (table.rows.empty() && table.header.empty()) {
        table.header = std::move(fields);
        continue;
      }
      throw Error(ErrorCode::kSchema,
                  path + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace dfw::csv
