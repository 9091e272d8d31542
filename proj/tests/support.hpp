//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_TESTS_SUPPORT_HPP_
#define SEMFORGE_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semforge/dataset.hpp"
#include "semforge/generator.hpp"
#include "semforge/model.hpp"
#include "semforge/random.hpp"
#include "semforge/syntax.hpp"

namespace semforge::testing {

// The example model with shared indicators, a cycle and extra covariances.
extern const char *const kExampleModel;

using ScalarFunction = std::function<double(const Eigen::VectorXd &)>;
using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd &)>;

Eigen::VectorXd central_gradient(const ScalarFunction &f,
                                 const Eigen::VectorXd &x, double h = 1e-6);
// Rows are d f_i / d x_j.
Eigen::MatrixXd central_jacobian(const VectorFunction &f,
                                 const Eigen::VectorXd &x, double h = 1e-6);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, 1).
// Random well-formed description with unique statements.
ModelDescription random_description(Rng &rng);

double max_relative_error(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b);

// Independent normal columns, one per name.
Dataset random_dataset(const std::vector<std::string> &names, int n,
                       std::uint64_t seed);

// Observed variables of `desc` (manifest and observed-structural).
std::vector<std::string> observed_names(const ModelDescription &desc);

// Single observed variable whose variance is the only parameter: Sigma =
// theta.
Model scalar_model(double s, Eigen::Index n = 500);

struct Problem {
  GeneratedCase gen;
  Model model;
  Eigen::VectorXd truth;
};

Problem generated_problem(const GenConfig &cfg);
Problem set3_problem(std::uint64_t seed, int n_samples = 500);

// Truth with each entry moved by up to `spread` relative, clamped to the
// parameter bounds.
Eigen::VectorXd perturbed(const Problem &p, double spread,
                          std::uint64_t seed);

// Estimates for the parameters the generator recorded a truth for.
std::map<std::string, double> estimates(const Problem &p,
                                        const Eigen::VectorXd &theta);

}  // namespace semforge::testing

#endif  // SEMFORGE_TESTS_SUPPORT_HPP_
