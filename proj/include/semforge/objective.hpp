//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_OBJECTIVE_HPP_
#define SEMFORGE_OBJECTIVE_HPP_

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "semforge/model.hpp"

namespace semforge {

enum class ObjectiveKind {
  kULS,  // tr[(Sigma - S)(Sigma - S)']
  kGLS,  // tr[(I - Sigma S^-1)^2]
  kMLW,  // tr[S Sigma^-1] + ln|Sigma|
};

ObjectiveKind parse_objective(std::string_view name);
std::string_view objective_name(ObjectiveKind kind) noexcept;

enum class Order { kValue, kGradient, kHessian };

struct ObjectiveEval {
  double value = 0;
  Eigen::VectorXd gradient;
  std::optional<Eigen::MatrixXd> hessian;
};

/**
 * Sample covariance with the factorisation the GLS and MLW objectives need.
 */
class SampleCovariance {
public:
  explicit SampleCovariance(Eigen::MatrixXd s);

  const Eigen::MatrixXd &matrix() const { return s_; }
  Eigen::Index dim() const { return s_.rows(); }
  bool positive_definite() const { return pd_; }

  // Both throw DataError when S is not positive definite.
  const Eigen::MatrixXd &inverse() const;
  double log_det() const;

private:
  Eigen::MatrixXd s_;
  Eigen::MatrixXd inv_;
  double log_det_ = 0;
  bool pd_ = false;
};

// Each evaluator throws SingularError when I - B is singular; eval_mlw
// throws DomainError when Sigma is not positive definite and eval_gls
// throws DataError when S is singular.
ObjectiveEval eval_uls(const ParamSystem &ps, const Eigen::VectorXd &theta,
                       const SampleCovariance &s,
                       Order order = Order::kGradient);
ObjectiveEval eval_gls(const ParamSystem &ps, const Eigen::VectorXd &theta,
                       const SampleCovariance &s,
                       Order order = Order::kGradient);
ObjectiveEval eval_mlw(const ParamSystem &ps, const Eigen::VectorXd &theta,
                       const SampleCovariance &s,
                       Order order = Order::kGradient);

ObjectiveEval evaluate(ObjectiveKind kind, const ParamSystem &ps,
                       const Eigen::VectorXd &theta, const SampleCovariance &s,
                       Order order = Order::kGradient);

/**
 * Objective value shifted so that a perfect fit (Sigma = S) scores zero.
 *
 * ULS and GLS are returned unchanged; MLW becomes the log-likelihood-ratio
 * discrepancy F - ln|S| - p.
 */
double discrepancy(ObjectiveKind kind, double value, const SampleCovariance &s);

}  // namespace semforge

#endif  // SEMFORGE_OBJECTIVE_HPP_
