//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_OPTIM_HPP_
#define SEMFORGE_OPTIM_HPP_

#include <functional>
#include <string_view>

#include <Eigen/Dense>

namespace semforge {

enum class MethodKind { kSLSQP, kLBFGSB, kAdam, kNesterov, kSGD };

// Accepts "SLSQP", "L-BFGS-B" (or "LBFGSB"), "Adam", "Nesterov", "SGD".
MethodKind parse_method(std::string_view name);
std::string_view method_name(MethodKind kind) noexcept;

struct OptimizerOptions {
  MethodKind method = MethodKind::kSLSQP;
  // 0 selects the per-method default.
  int max_iterations = 0;
  // Stop when the projected gradient's max-norm falls below this.
  double gradient_tolerance = 1e-7;
  // Quasi-Newton methods also stop when the relative decrease of an
  // accepted step falls below this.
  double function_tolerance = 1e-13;
  // First-order methods.
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // L-BFGS-B correction pairs.
  int memory = 10;
  // Step halvings allowed when a trial point is not finite.
  int max_halvings = 30;
};

int default_max_iterations(MethodKind method) noexcept;

enum class Termination {
  kGradientTolerance,
  kFunctionTolerance,
  kMaxIterations,
  kLineSearch,  // no acceptable step with finite values
  kDomainFailure,
};

std::string_view termination_name(Termination t) noexcept;

struct OptimOutcome {
  Eigen::VectorXd x;
  double value = 0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  Termination termination = Termination::kMaxIterations;
};

/**
 * Objective callback: returns f(x) and writes the gradient when `grad` is
 * non-null. A non-finite value, or a thrown semforge::Error, marks x as
 * outside the objective's domain.
 */
using ObjectiveFunction =
    std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd *grad)>;

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Bounds unbounded(Eigen::Index n);
  Eigen::VectorXd project(const Eigen::VectorXd &x) const;
  // Max-norm of P(x - g) - x.
  double projected_gradient_norm(const Eigen::VectorXd &x,
                                 const Eigen::VectorXd &g) const;
};

/**
 * Minimise `f` over the box `bounds` starting from `x0` (projected into the
 * box first). Every returned point lies inside the box.
 */
OptimOutcome minimize(const ObjectiveFunction &f, const Bounds &bounds,
                      const Eigen::VectorXd &x0,
                      const OptimizerOptions &options = {});

/**
 * Solve min g'd + d'Hd/2 subject to lo <= d <= hi for positive definite H
 * and lo <= 0 <= hi, by a primal active-set method.
 */
Eigen::VectorXd solve_box_qp(const Eigen::MatrixXd &h,
                             const Eigen::VectorXd &g,
                             const Eigen::VectorXd &lo,
                             const Eigen::VectorXd &hi);

}  // namespace semforge

#endif  // SEMFORGE_OPTIM_HPP_
