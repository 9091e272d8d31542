//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_MODEL_HPP_
#define SEMFORGE_MODEL_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "semforge/dataset.hpp"
#include "semforge/syntax.hpp"

namespace semforge {

/**
 * Partition of model variables.
 *
 * Latent variables (eta) appear on the left of a loading, manifest
 * variables (y) on its right, and every other variable used in the
 * structural part is observed-structural (x). A variable is endogenous iff
 * it is the dependent side of some regression. All groups are sorted
 * byte-wise.
 */
struct VariableTaxonomy {
  std::vector<std::string> eta_exo;
  std::vector<std::string> eta_endo;
  std::vector<std::string> x_exo;
  std::vector<std::string> x_endo;
  std::vector<std::string> y;

  size_t n_eta() const { return eta_exo.size() + eta_endo.size(); }
  size_t n_x() const { return x_exo.size() + x_endo.size(); }
  size_t n_y() const { return y.size(); }

  // Structural variable order: exogenous latents, endogenous latents,
  // endogenous observed, exogenous observed.
  std::vector<std::string> omega() const;
  // Observed variable order: manifests, then observed-structural variables
  // in the same order as in omega().
  std::vector<std::string> z() const;

  bool is_latent(std::string_view name) const;
  bool is_manifest(std::string_view name) const;
};

VariableTaxonomy classify(const ModelDescription &desc);

// Alphabetically first name; the indicator whose loading sets a latent's
// scale.
std::string first_indicator(std::vector<std::string> manifests);

enum class MatrixId { kBeta, kLambda, kPsi, kTheta };

enum class ParamKind { kRegression, kLoading, kVariance, kCovariance };

struct Parameter {
  std::string name;
  ParamKind kind;
  MatrixId matrix;
  Eigen::Index row;
  Eigen::Index col;
  double lower;
  double upper;
};

// One nonzero cell of a parameter matrix; `param` is -1 for fixed cells.
struct Placement {
  MatrixId matrix;
  Eigen::Index row;
  Eigen::Index col;
  int param;
  double value;
};

struct ModelMatrices {
  Eigen::MatrixXd beta;
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd psi;
  Eigen::MatrixXd theta;
};

/**
 * The four parameter matrices of a model together with the layout of the
 * free parameter vector.
 *
 * With omega = [eta; x] and z = [y; x] the model reads
 *   omega = B omega + eps,  z = Lambda omega + delta,
 * with cov(eps) = Psi and cov(delta) = Theta. Immutable once built.
 */
class ParamSystem {
public:
  const VariableTaxonomy &taxonomy() const { return taxonomy_; }
  const std::vector<std::string> &omega_names() const { return omega_; }
  const std::vector<std::string> &z_names() const { return z_; }

  Eigen::Index size() const { return static_cast<Eigen::Index>(params_.size()); }
  const std::vector<Parameter> &params() const { return params_; }
  const Parameter &param(Eigen::Index i) const { return params_[i]; }
  std::optional<Eigen::Index> find(std::string_view name) const;

  const Eigen::VectorXd &start() const { return start_; }
  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;

  std::vector<Placement> placements() const;

  // Fixed entries with `theta` written into the free cells; Psi and Theta
  // stay symmetric.
  ModelMatrices matrices(const Eigen::VectorXd &theta) const;
  Eigen::VectorXd read(const ModelMatrices &m) const;

  friend ParamSystem build(const ModelDescription &desc, const Dataset &data);
  static ParamSystem independence(const std::vector<std::string> &observed,
                                  const Eigen::MatrixXd &sample_cov);

private:
  ParamSystem() = default;

  VariableTaxonomy taxonomy_;
  std::vector<std::string> omega_;
  std::vector<std::string> z_;
  ModelMatrices fixed_;
  std::vector<Parameter> params_;
  Eigen::VectorXd start_;
};

/**
 * Lay out B, Lambda, Psi and Theta for `desc` and compute starting values
 * from `data`.
 *
 * Throws ModelError for structural problems (including ordinal type
 * declarations, which estimation does not support) and DataError for
 * missing columns.
 */
ParamSystem build(const ModelDescription &desc, const Dataset &data);

/**
 * Model-implied covariance and its derivatives at one parameter point.
 *
 * Sigma = Lambda C Psi C' Lambda' + Theta with C = (I - B)^-1. Throws
 * SingularError when I - B is numerically singular.
 */
class ImpliedCovariance {
public:
  ImpliedCovariance(const ParamSystem &ps, const Eigen::VectorXd &theta);

  const Eigen::MatrixXd &sigma() const { return sigma_; }

  Eigen::MatrixXd derivative(Eigen::Index param) const;
  std::vector<Eigen::MatrixXd> derivatives() const;
  Eigen::MatrixXd second_derivative(Eigen::Index p, Eigen::Index q) const;

private:
  Eigen::MatrixXd seed(Eigen::Index param) const;
  Eigen::MatrixXd d_inverse(Eigen::Index param) const;

  const ParamSystem *ps_;
  ModelMatrices m_;
  Eigen::MatrixXd inv_;        // C
  Eigen::MatrixXd lc_;         // Lambda C
  Eigen::MatrixXd omega_cov_;  // C Psi C'
  Eigen::MatrixXd t_;          // Lambda C Psi C'
  Eigen::MatrixXd sigma_;
};

Eigen::MatrixXd sigma(const ParamSystem &ps, const Eigen::VectorXd &theta);

/**
 * A parsed model bound to a dataset: parameter layout plus the sample
 * covariance of the observed variables in z order.
 */
class Model {
public:
  Model(ModelDescription desc, const Dataset &data);
  Model(ParamSystem ps, Eigen::MatrixXd sample_cov, Eigen::Index n);

  const ParamSystem &system() const { return ps_; }
  const Eigen::MatrixXd &sample_cov() const { return s_; }
  Eigen::Index n() const { return n_; }
  const ModelDescription &description() const { return desc_; }

private:
  ModelDescription desc_;
  ParamSystem ps_;
  Eigen::MatrixXd s_;
  Eigen::Index n_;
};

std::string_view matrix_name(MatrixId id) noexcept;

}  // namespace semforge

#endif  // SEMFORGE_MODEL_HPP_
