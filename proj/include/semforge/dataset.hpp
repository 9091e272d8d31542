//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_DATASET_HPP_
#define SEMFORGE_DATASET_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace semforge {

/**
 * Column-named numeric sample matrix.
 *
 * The on-disk format is CSV with a header row whose first column is a row
 * index; every remaining cell must be numeric.
 */
class Dataset {
public:
  Dataset() = default;
  Dataset(std::vector<std::string> names, Eigen::MatrixXd rows);

  static Dataset read_csv(std::istream &is);
  static Dataset read_csv(const std::filesystem::path &path);

  // Shortest round-trip formatting, so identical data gives identical bytes.
  void write_csv(std::ostream &os) const;
  void write_csv(const std::filesystem::path &path) const;

  const std::vector<std::string> &names() const { return names_; }
  const Eigen::MatrixXd &rows() const { return rows_; }
  Eigen::Index n() const { return rows_.rows(); }

  bool has_column(std::string_view name) const;
  Eigen::Index column_index(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;

  // Unbiased (n - 1) sample covariance of the named columns, in the given
  // order.
  Eigen::MatrixXd covariance(const std::vector<std::string> &columns) const;

private:
  std::vector<std::string> names_;
  Eigen::MatrixXd rows_;
};

// Unbiased covariance of the columns of `x`.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd &x);

}  // namespace semforge

#endif  // SEMFORGE_DATASET_HPP_
