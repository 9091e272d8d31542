//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "semforge/error.hpp"

namespace semforge {
namespace {
  bool evaluable(ObjectiveKind kind, const ParamSystem &ps,
                 const Eigen::VectorXd &theta, const SampleCovariance &s) {
    try {
      return std::isfinite(evaluate(kind, ps, theta, s, Order::kValue).value);
    } catch (const DataError &) {
      throw;
    } catch (const Error &) {
      return false;
    }
  }
}  // namespace

FitResult minimize(const Model &model, ObjectiveKind objective,
                   const OptimizerOptions &options,
                   const Eigen::VectorXd &theta0) {
  const ParamSystem &ps = model.system();
  if (theta0.size() != ps.size())
    throw Error("starting vector has wrong length");
  const SampleCovariance s(model.sample_cov());
  if (objective != ObjectiveKind::kULS && !s.positive_definite())
    throw DataError("sample covariance matrix is not positive definite");

  const Bounds bounds { ps.lower_bounds(), ps.upper_bounds() };
  FitResult result;
  result.objective = objective;
  result.method = options.method;

  Eigen::VectorXd start = bounds.project(theta0);
  if (!evaluable(objective, ps, start, s)) {
    for (Eigen::Index i = 0; i < ps.size(); ++i)
      if (ps.param(i).kind == ParamKind::kVariance)
        start[i] = std::max(start[i], 1e-4);
    result.start_adjusted = true;
  }

  const ObjectiveFunction f = [&](const Eigen::VectorXd &x,
                                  Eigen::VectorXd *grad) {
    ObjectiveEval e = evaluate(objective, ps, x, s,
                               grad ? Order::kGradient : Order::kValue);
    if (grad)
      *grad = std::move(e.gradient);
    return e.value;
  };
  const OptimOutcome out = semforge::minimize(f, bounds, start, options);

  result.theta = out.x;
  result.value = out.value;
  result.discrepancy = std::isfinite(out.value)
                           ? discrepancy(objective, out.value, s)
                           : std::numeric_limits<double>::quiet_NaN();
  result.iterations = out.iterations;
  result.evaluations = out.evaluations;
  result.converged = out.converged;
  result.termination = out.termination;
  return result;
}

Optimizer::Optimizer(Model model)
    : model_(std::move(model)), theta_(model_.system().start()) { }

void Optimizer::set_params(const Eigen::VectorXd &theta) {
  if (theta.size() != model_.system().size())
    throw Error("parameter vector has wrong length");
  theta_ = theta;
}

FitResult Optimizer::optimize(ObjectiveKind objective,
                              const OptimizerOptions &options) {
  FitResult r = minimize(model_, objective, options, theta_);
  if (r.theta.allFinite())
    theta_ = r.theta;
  return r;
}

}  // namespace semforge
