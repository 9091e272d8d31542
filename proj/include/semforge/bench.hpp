//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_BENCH_HPP_
#define SEMFORGE_BENCH_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "semforge/generator.hpp"
#include "semforge/objective.hpp"
#include "semforge/optim.hpp"

namespace semforge {

enum class Failure { kNone, kNanParam, kNanObjective, kDiverged };

std::string_view failure_name(Failure f) noexcept;

inline constexpr double kDivergenceThreshold = 0.3;

/**
 * Mean relative error (1/n) sum |est_i - true_i| / |true_i| over the names
 * of `truth`. Throws Error when a name is missing from `estimate` or a true
 * value is zero.
 */
double delta(const std::map<std::string, double> &truth,
             const std::map<std::string, double> &estimate);

Failure classify_failure(const Eigen::VectorXd &theta, double value,
                         bool domain_failure, double delta);

// One estimator configuration. Objectives run in order with warm restarts;
// the last one is the reported fit.
struct MethodSpec {
  std::vector<ObjectiveKind> objectives { ObjectiveKind::kMLW };
  MethodKind method = MethodKind::kSLSQP;

  // "MLW/SLSQP" or "ULS>MLW/SLSQP".
  std::string label() const;
  static MethodSpec parse(std::string_view label);
};

struct BenchSet {
  std::string name;
  GenConfig config;  // its seed is replaced per case
};

struct Campaign {
  std::vector<BenchSet> sets;
  int replications = 1;
  std::vector<MethodSpec> methods { MethodSpec {} };
  std::uint64_t seed = 0;

  void validate() const;
};

/**
 * JSON campaign description:
 *   {"seed": 1, "replications": 100, "sets": [3, {"name": "big", "n_obs": 8}],
 *    "methods": ["MLW/SLSQP", "MLW/L-BFGS-B"]}
 * Integers in "sets" refer to the benchmark table rows 1-15; objects are
 * generator configs with an optional "name".
 */
Campaign parse_campaign(std::string_view json);

std::uint64_t case_seed(std::uint64_t master, size_t set, int replicate);

struct BenchRecord {
  std::string case_id;
  size_t set = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string method;
  double delta = 0;
  double value = 0;  // discrepancy of the final objective
  double seconds = 0;
  int iterations = 0;
  Termination termination = Termination::kMaxIterations;
  Failure failure = Failure::kNone;
  std::string error;
};

struct SetSummary {
  std::string name;
  GenConfig config;
  int cases = 0;
  std::vector<int> failures;      // per method
  std::vector<double> seconds;    // per method
};

struct CampaignResult {
  std::vector<std::string> methods;
  std::vector<BenchRecord> records;  // ordered by (set, replicate, method)
  std::vector<SetSummary> sets;
  // matrix[i][j], i != j: cases where method i failed and j did not;
  // matrix[i][i]: failures of method i.
  std::vector<std::vector<int>> matrix;
};

// `failed[c][i]` tells whether method i failed on case c.
std::vector<std::vector<int>>
method_matrix(const std::vector<std::vector<bool>> &failed, size_t n_methods);

// Fits one generated case with every method.
std::vector<BenchRecord> run_case(const GeneratedCase &c,
                                  const std::vector<MethodSpec> &methods);

using ProgressCallback = std::function<void(size_t done, size_t total)>;

CampaignResult run_campaign(const Campaign &campaign,
                            const ProgressCallback &progress = {});

void write_records_csv(const CampaignResult &result, std::ostream &os);
// Includes wall times unless `deterministic` is set.
std::string summary_json(const CampaignResult &result,
                         bool deterministic = false);

}  // namespace semforge

#endif  // SEMFORGE_BENCH_HPP_
