//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include "semforge/error.hpp"

namespace semforge {
namespace {
  std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
      s.remove_prefix(1);
    while (!s.empty()
           && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
      s = s.substr(1, s.size() - 2);
    return s;
  }

  std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    while (true) {
      const size_t comma = line.find(',');
      fields.push_back(strip(line.substr(0, comma)));
      if (comma == std::string_view::npos)
        break;
      line.remove_prefix(comma + 1);
    }
    return fields;
  }

  std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  }
}  // namespace

Dataset::Dataset(std::vector<std::string> names, Eigen::MatrixXd rows)
    : names_(std::move(names)), rows_(std::move(rows)) {
  if (static_cast<Eigen::Index>(names_.size()) != rows_.cols())
    throw DataError("column name count does not match data width");
  std::set<std::string_view> unique(names_.begin(), names_.end());
  if (unique.size() != names_.size())
    throw DataError("duplicate column names");
}

Dataset Dataset::read_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw DataError("empty CSV input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);

  auto header = split_fields(line);
  if (header.size() < 2)
    throw DataError("CSV needs an index column and at least one data column");
  std::vector<std::string> names;
  for (size_t i = 1; i < header.size(); ++i) {
    if (header[i].empty())
      throw DataError("empty column name in CSV header");
    names.emplace_back(header[i]);
  }

  std::vector<double> values;
  Eigen::Index nrows = 0;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (strip(line).empty())
      continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw DataError("CSV line " + std::to_string(lineno) + ": expected "
                      + std::to_string(header.size()) + " fields, got "
                      + std::to_string(fields.size()));
    for (size_t i = 1; i < fields.size(); ++i) {
      std::string_view f = fields[i];
      if (!f.empty() && f.front() == '+')
        f.remove_prefix(1);
      double v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()
          || !std::isfinite(v))
        throw DataError("CSV line " + std::to_string(lineno)
                        + ": non-numeric value '" + std::string(fields[i])
                        + "' in column '" + names[i - 1] + "'");
      values.push_back(v);
    }
    ++nrows;
  }

  const auto ncols = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd rows = Eigen::Map<const Eigen::Matrix<
      double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(),
                                                                nrows, ncols);
  return Dataset(std::move(names), std::move(rows));
}

Dataset Dataset::read_csv(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw DataError("cannot open " + path.string());
  return read_csv(is);
}

void Dataset::write_csv(std::ostream &os) const {
  for (const auto &name: names_)
    os << ',' << name;
  os << '\n';
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    os << i;
    for (Eigen::Index j = 0; j < rows_.cols(); ++j)
      os << ',' << format_double(rows_(i, j));
    os << '\n';
  }
}

void Dataset::write_csv(const std::filesystem::path &path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw DataError("cannot write " + path.string());
  write_csv(os);
}

bool Dataset::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

Eigen::Index Dataset::column_index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end())
    throw DataError("dataset has no column '" + std::string(name) + "'");
  return it - names_.begin();
}

Eigen::VectorXd Dataset::column(std::string_view name) const {
  return rows_.col(column_index(name));
}

Eigen::MatrixXd
Dataset::covariance(const std::vector<std::string> &columns) const {
  Eigen::MatrixXd x(rows_.rows(), static_cast<Eigen::Index>(columns.size()));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    x.col(j) = rows_.col(column_index(columns[j]));
  return sample_covariance(x);
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd &x) {
  if (x.rows() < 2)
    throw DataError("at least two rows are required for a covariance");
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd s = centered.transpose() * centered
                      / static_cast<double>(x.rows() - 1);
  return (s + s.transpose()) / 2;
}

}  // namespace semforge
