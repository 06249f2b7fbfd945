#include "vdpc/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace vdpc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  } else {
    std::size_t pos = 0;
    while (pos < line.size()) {
      pos = line.find_first_not_of(" \t\r", pos);
      if (pos == std::string_view::npos) break;
      const auto end = line.find_first_of(" \t\r", pos);
      cells.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
      pos = end;
    }
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

}  // namespace

Dataset<double> load_points_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::vector<double> values;
  std::vector<int> labels;
  Index dim = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = opts.has_header;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = split_cells(content);
    const Index ncells = static_cast<Index>(cells.size());

    Index label_at = -1;
    if (opts.label_column) {
      label_at = *opts.label_column < 0 ? ncells + *opts.label_column : *opts.label_column;
      if (label_at < 0 || label_at >= ncells)
        throw DataError(where(path, line_no) + ": label column out of range for a row with " +
                        std::to_string(ncells) + " cells");
    }
    const Index row_dim = label_at >= 0 ? ncells - 1 : ncells;
    if (dim < 0) {
      dim = row_dim;
      if (dim < 1) throw DataError(where(path, line_no) + ": row has no feature columns");
    } else if (row_dim != dim) {
      throw DataError(where(path, line_no) + ": ragged row with " + std::to_string(row_dim) +
                      " features, expected " + std::to_string(dim));
    }

    for (Index c = 0; c < ncells; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw DataError(where(path, line_no) + ": non-numeric cell '" + std::string(cells[c]) + "'");
      if (c == label_at) {
        if (v != std::floor(v)) throw DataError(where(path, line_no) + ": label '" + std::string(cells[c]) + "' is not an integer");
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
    ++rows;
  }

  if (rows < 2) throw DataError(path.string() + ": need at least 2 points, found " + std::to_string(rows));

  Dataset<double> ds;
  ds.points = Eigen::Map<const PointMatrix<double>>(values.data(), rows, dim);
  if (opts.label_column) ds.ground_truth = std::move(labels);
  ds.name = path.stem().string();
  ds.validate();
  return ds;
}

namespace {

std::vector<double> read_numbers(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    for (const auto cell : split_cells(content)) {
      if (cell.empty()) continue;
      double v = 0.0;
      if (!parse_double(cell, v))
        throw DataError(where(path, line_no) + ": non-numeric entry '" + std::string(cell) + "'");
      if (v < 0.0) throw DataError(where(path, line_no) + ": negative distance " + std::string(cell));
      values.push_back(v);
    }
  }
  return values;
}

CondensedDistances<double> to_condensed(std::vector<double>&& values, Index n) {
  Vector<double> d = Eigen::Map<const Vector<double>>(values.data(), static_cast<Index>(values.size()));
  return CondensedDistances<double>(n, std::move(d));
}

}  // namespace

CondensedDistances<double> load_condensed_matrix(const std::filesystem::path& path, Index n) {
  auto values = read_numbers(path);
  if (static_cast<Index>(values.size()) != condensed_size(n))
    throw DataError(path.string() + ": expected " + std::to_string(condensed_size(n)) + " distances for n=" +
                    std::to_string(n) + ", found " + std::to_string(values.size()));
  return to_condensed(std::move(values), n);
}

CondensedDistances<double> load_condensed_matrix(const std::filesystem::path& path) {
  auto values = read_numbers(path);
  const auto count = static_cast<Index>(values.size());
  // Smallest n with n(n-1)/2 >= count; must hit it exactly.
  Index n = static_cast<Index>(std::ceil((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(count))) / 2.0));
  while (n > 2 && condensed_size(n - 1) >= count) --n;
  if (condensed_size(n) != count)
    throw DataError(path.string() + ": " + std::to_string(count) + " entries is not n(n-1)/2 for any n");
  return to_condensed(std::move(values), n);
}

}  // namespace vdpc
