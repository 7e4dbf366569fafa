#ifndef ICSCLUST_CSV_HPP
#define ICSCLUST_CSV_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "icsclust/types.hpp"

namespace icsclust {

struct CsvData {
  std::vector<std::string> columns;  // numeric column names, label column removed
  Matrix values;
  std::optional<Labels> labels;
  std::vector<std::string> label_levels;  // original strings for categorical labels
};

namespace detail {

/// One RFC-4180 record: comma separated, double quotes escape commas and
/// embedded quotes. Multiline quoted fields are not supported.
inline std::vector<std::string> split_csv_record(const std::string& line, std::size_t row) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    throw parse_error("csv row " + std::to_string(row) + ": unterminated quoted field");
  fields.push_back(field);
  return fields;
}

inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Reads a rectangular numeric CSV with a header row. When label_column
/// names a header, that column is removed from the matrix and returned as
/// labels: integer-valued columns are taken literally (preserving the 0
/// sentinel), anything else is coded 1..L by first appearance.
inline CsvData read_csv(const std::string& path, const std::string& label_column = "") {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'");
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    rows.push_back(detail::split_csv_record(line, row_no));
  }
  if (rows.size() < 2) throw parse_error("'" + path + "': need a header row and data rows");

  const std::vector<std::string>& header = rows[0];
  const std::size_t width = header.size();
  std::ptrdiff_t label_idx = -1;
  if (!label_column.empty()) {
    for (std::size_t j = 0; j < width; ++j)
      if (header[j] == label_column) label_idx = static_cast<std::ptrdiff_t>(j);
    if (label_idx < 0)
      throw parse_error("'" + path + "': no column named '" + label_column + "'");
  }

  CsvData out;
  for (std::size_t j = 0; j < width; ++j)
    if (static_cast<std::ptrdiff_t>(j) != label_idx) out.columns.push_back(header[j]);

  const std::size_t n = rows.size() - 1;
  const std::size_t d = width - (label_idx >= 0 ? 1 : 0);
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::string> raw_labels;
  raw_labels.reserve(label_idx >= 0 ? n : 0);

  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw parse_error("'" + path + "': row " + std::to_string(r + 1) + " has " +
                        std::to_string(rows[r].size()) + " fields, expected " +
                        std::to_string(width));
    std::size_t c_out = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<std::ptrdiff_t>(c) == label_idx) {
        raw_labels.push_back(rows[r][c]);
        continue;
      }
      const std::string& cell = rows[r][c];
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw parse_error("'" + path + "': row " + std::to_string(r + 1) + ", column " +
                          std::to_string(c + 1) + ": not a number: '" + cell + "'");
      out.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c_out++)) = value;
    }
  }

  if (label_idx >= 0) {
    Labels labels(n);
    bool all_int = true;
    std::vector<long> as_int(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& cell = raw_labels[i];
      long v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        all_int = false;
        break;
      }
      as_int[i] = v;
    }
    if (all_int) {
      for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(as_int[i]);
    } else {
      std::vector<std::string> levels;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t code = 0;
        for (; code < levels.size(); ++code)
          if (levels[code] == raw_labels[i]) break;
        if (code == levels.size()) levels.push_back(raw_labels[i]);
        labels[i] = static_cast<int>(code) + 1;
      }
      out.label_levels = std::move(levels);
    }
    out.labels = std::move(labels);
  }
  return out;
}

/// Writes header + matrix (17 significant digits, lossless round trip),
/// optionally with a trailing integer label column.
inline void write_csv(const std::string& path, const Matrix& values,
                      const std::vector<std::string>& columns, const Labels* labels = nullptr,
                      const std::string& label_column = "label") {
  if (static_cast<Eigen::Index>(columns.size()) != values.cols())
    throw validation_error("write_csv: header width does not match matrix");
  if (labels != nullptr) validate_labels(*labels, values.rows());
  std::ofstream outf(path);
  if (!outf) throw parse_error("cannot write '" + path + "'");
  std::ostringstream buf;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) buf << ',';
    buf << columns[j];
  }
  if (labels != nullptr) buf << (columns.empty() ? "" : ",") << label_column;
  buf << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) buf << ',';
      buf << detail::format_full(values(i, j));
    }
    if (labels != nullptr)
      buf << (values.cols() ? "," : "") << (*labels)[static_cast<std::size_t>(i)];
    buf << '\n';
  }
  outf << buf.str();
  if (!outf) throw parse_error("write to '" + path + "' failed");
}

}  // namespace icsclust

#endif
