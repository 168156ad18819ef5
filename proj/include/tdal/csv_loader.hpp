#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tdal/dataset.hpp"
#include "tdal/error.hpp"

namespace tdal {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double_cell(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r'))
    --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw parse_error("csv: non-numeric cell '" + cell + "' at line " +
                      std::to_string(line_no));
  return v;
}

}  // namespace detail

/// Rectangular numeric CSV with a header row; the named column holds integer
/// class labels, every other column becomes a feature.
inline Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw io_error("load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw io_error("load_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  std::size_t label_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == label_column) label_idx = j;
  if (label_idx == header.size())
    throw parse_error("load_csv: unknown label column '" + label_column + "'");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw parse_error("load_csv: ragged row at line " + std::to_string(line_no) +
                        " (" + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()) + ")");
    std::vector<double> feat;
    feat.reserve(header.size() - 1);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const double v = detail::parse_double_cell(cells[j], line_no);
      if (j == label_idx) {
        const double r = std::round(v);
        if (std::abs(v - r) > 1e-9 || r < 0)
          throw parse_error("load_csv: label '" + cells[j] + "' at line " +
                            std::to_string(line_no) + " is not a nonnegative integer");
        labels.push_back(static_cast<int>(r));
      } else {
        feat.push_back(v);
      }
    }
    rows.push_back(std::move(feat));
  }

  if (rows.empty()) throw io_error("load_csv: empty dataset in " + path);

  Dataset ds;
  ds.features = Matrix(rows.size(), header.size() - 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) ds.features(i, j) = rows[i][j];
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

}  // namespace tdal
