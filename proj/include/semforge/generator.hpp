//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_GENERATOR_HPP_
#define SEMFORGE_GENERATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "semforge/dataset.hpp"
#include "semforge/model.hpp"

namespace semforge {

struct GenConfig {
  int n_obs = 5;     // structural variables, latent ones included
  int n_lat = 2;     // latent among them
  int l_manif = 2;   // manifests per latent, inclusive range
  int u_manif = 2;
  double p_manif = 0.1;  // fraction of manifests merged away
  int n_cycles = 0;
  double scale = 1.0;
  int n_samples = 500;
  std::uint64_t seed = 0;

  // Throws Error when an invariant is violated.
  void validate() const;
};

// Reads a JSON object; "n_manif" may be a number or an [l, u] pair.
GenConfig parse_gen_config(std::string_view json);
std::string gen_config_json(const GenConfig &cfg);

// Rows of the benchmark table: sets 1-15.
GenConfig table_set(int index);

// Variance of the noise added to every generated variable.
inline constexpr double kNoiseVariance = 0.1;

struct StructuralGraph {
  std::vector<std::string> names;
  std::vector<bool> latent;
  // (child, parent) pairs; child ~ parent.
  std::vector<std::pair<int, int>> edges;
  int n_cycle_edges = 0;  // trailing entries of `edges`
};

struct GeneratedCase {
  GenConfig config;
  StructuralGraph graph;
  std::string model_text;
  // Sampled B and Lambda values by parameter name.
  std::map<std::string, double> truth;
  Dataset data;
};

/**
 * Random model, parameters and data.
 *
 * 1. Random DAG over n_obs nodes (forward edges of a random order, each with
 *    probability 2/n_obs, resampled until no node is isolated), then
 *    n_cycles back edges closing cycles; n_lat nodes become latent.
 * 2. Each latent gets U{l_manif, u_manif} manifests; manifests of disjoint
 *    latents are merged pairwise until ceil((1 - p_manif) * initial) remain.
 * 3. B and free Lambda values from U([-1, -0.1] u [0.1, 1]) * scale.
 * 4. omega = (I - B)^-1 eps with exogenous eps ~ N(0, 1) + N(0, 0.1) and
 *    endogenous eps ~ N(0, 0.1); manifests add N(0, 0.1) noise. Latent
 *    columns are dropped.
 */
GeneratedCase generate(const GenConfig &cfg);

inline GeneratedCase seeded_replay(GenConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return generate(cfg);
}

/**
 * Complete parameter vector of the generating process in `ps` layout:
 * sampled B/Lambda values, exogenous latent variance 1.1, other variances
 * 0.1 and zero covariances.
 */
Eigen::VectorXd true_parameters(const GeneratedCase &c, const ParamSystem &ps);

// Writes model.txt, params.json and data.csv into `dir`.
void write_case(const GeneratedCase &c, const std::filesystem::path &dir);

std::string truth_json(const std::map<std::string, double> &truth);

}  // namespace semforge

#endif  // SEMFORGE_GENERATOR_HPP_
