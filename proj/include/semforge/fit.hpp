//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_FIT_HPP_
#define SEMFORGE_FIT_HPP_

#include <Eigen/Dense>

#include "semforge/model.hpp"
#include "semforge/objective.hpp"
#include "semforge/optim.hpp"

namespace semforge {

struct FitResult {
  ObjectiveKind objective = ObjectiveKind::kMLW;
  MethodKind method = MethodKind::kSLSQP;
  Eigen::VectorXd theta;
  // Raw objective value and its perfect-fit-normalised form.
  double value = 0;
  double discrepancy = 0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  Termination termination = Termination::kMaxIterations;
  // Variances were raised to 1e-4 because theta0 was not evaluable.
  bool start_adjusted = false;
};

/**
 * Minimise `objective` for `model` from theta0.
 *
 * If the objective cannot be evaluated at theta0, variances are raised to
 * at least 1e-4 and the start is retried once. Numerical failures are
 * reported through FitResult::termination; only a sample covariance that
 * the objective cannot use (DataError) is thrown.
 */
FitResult minimize(const Model &model, ObjectiveKind objective,
                   const OptimizerOptions &options,
                   const Eigen::VectorXd &theta0);

/**
 * Chains optimisations over one model: each optimize() call starts from
 * the estimate left by the previous one.
 */
class Optimizer {
public:
  explicit Optimizer(Model model);

  const Model &model() const { return model_; }
  const Eigen::VectorXd &params() const { return theta_; }
  void set_params(const Eigen::VectorXd &theta);
  void reset() { theta_ = model_.system().start(); }

  FitResult optimize(ObjectiveKind objective = ObjectiveKind::kMLW,
                     const OptimizerOptions &options = {});

private:
  Model model_;
  Eigen::VectorXd theta_;
};

}  // namespace semforge

#endif  // SEMFORGE_FIT_HPP_
