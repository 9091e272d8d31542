//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_STATS_HPP_
#define SEMFORGE_STATS_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semforge/fit.hpp"
#include "semforge/model.hpp"
#include "semforge/objective.hpp"

namespace semforge {

enum class FimMode { kExpected, kObserved };

struct FisherInformation {
  FimMode mode = FimMode::kExpected;
  Eigen::MatrixXd information;
  // Inverse of `information`, or its pseudo-inverse when singular.
  Eigen::MatrixXd covariance;
  bool singular = false;
  // Parameters carried by the null space when singular.
  std::vector<Eigen::Index> unidentified;
};

/**
 * Fisher information of the Wishart likelihood at theta.
 *
 * Expected: (n/2) tr[Sigma^-1 dSigma_i Sigma^-1 dSigma_j]. Observed: (n/2)
 * times the Hessian of the MLW objective. Throws DomainError when Sigma is
 * not positive definite.
 */
FisherInformation fisher_information(const ParamSystem &ps,
                                     const Eigen::VectorXd &theta,
                                     const Eigen::MatrixXd &s, double n,
                                     FimMode mode = FimMode::kExpected);

// Two-sided p-value of a standard normal statistic.
double normal_p_value(double z);

struct Inference {
  FimMode mode = FimMode::kExpected;
  // NaN marks an undefined entry (non-positive variance or unidentified).
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd pvalues;
  bool pseudo_inverse = false;
  std::vector<Eigen::Index> unidentified;
};

Inference p_values(const Eigen::VectorXd &theta, const FisherInformation &fim);

// Raw quantities the index formulas need.
struct IndexInputs {
  double n = 0;
  int k = 0;           // observed variables
  int m = 0;           // free parameters of the model
  int m_baseline = 0;  // free parameters of the baseline
  double f = 0;        // discrepancy at the optimum
  double f_baseline = 0;
  double loglik = 0;
};

struct FitIndices {
  double chi2 = 0;
  int dof = 0;
  double chi2_baseline = 0;
  int dof_baseline = 0;
  std::optional<double> rmsea;
  std::optional<double> gfi;
  std::optional<double> agfi;
  std::optional<double> nfi;
  std::optional<double> tli;
  std::optional<double> cfi;
  double aic = 0;
  double bic = 0;
  double loglik = 0;
  std::string loglik_convention;
};

FitIndices fit_indices(const IndexInputs &in);

/**
 * Indices for `fit` against `baseline` (both fitted with the same
 * objective on `model`'s data). Without `loglik`, L = -(n/2) F_MLW(theta),
 * the Wishart log-likelihood ratio, evaluated at the fitted theta.
 */
FitIndices fit_indices(const Model &model, const FitResult &fit,
                       const FitResult &baseline,
                       std::optional<double> loglik = std::nullopt);

// Independence model over the same observed variables: only their
// variances are free.
Model baseline_model(const Model &model);
FitResult fit_baseline(const Model &model, ObjectiveKind objective,
                       const OptimizerOptions &options = {});

struct ParameterRow {
  std::string name;
  double estimate;
  double se;
  double z;
  double p;
};

struct Report {
  ObjectiveKind objective;
  MethodKind method;
  double value;
  bool converged;
  Termination termination;
  std::vector<ParameterRow> rows;
  std::optional<Inference> inference;
  std::optional<FitIndices> indices;
};

Report make_report(const Model &model, const FitResult &fit,
                   std::optional<Inference> inference = std::nullopt,
                   std::optional<FitIndices> indices = std::nullopt);

std::string format_report(const Report &report);
std::string report_json(const Report &report);

}  // namespace semforge

#endif  // SEMFORGE_STATS_HPP_
