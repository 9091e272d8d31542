//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semforge/error.hpp"
#include "semforge/random.hpp"

namespace semforge {
namespace {
  constexpr int kMaxGraphAttempts = 10000;
  constexpr int kMaxValueAttempts = 1000;
  constexpr double kExogenousVariance = 1.0 + kNoiseVariance;

  // U([-1, -0.1] u [0.1, 1]) * scale.
  double sample_coefficient(Rng &rng, double scale) {
    const double magnitude = rng.uniform(0.1, 1.0);
    return (rng.bernoulli(0.5) ? magnitude : -magnitude) * scale;
  }

  std::vector<std::pair<int, int>> random_dag(Rng &rng, int n) {
    const double p = std::min(1.0, 2.0 / n);
    for (int attempt = 0; attempt < kMaxGraphAttempts; ++attempt) {
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i)
        order[i] = i;
      rng.shuffle(order);

      std::vector<std::pair<int, int>> edges;
      std::vector<int> degree(n, 0);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (rng.bernoulli(p)) {
            edges.emplace_back(order[j], order[i]);
            ++degree[order[i]];
            ++degree[order[j]];
          }
      if (std::all_of(degree.begin(), degree.end(),
                      [](int d) { return d > 0; }))
        return edges;
    }
    throw Error("could not draw a random graph without isolated nodes");
  }

  // reach[a][b]: a directed path parent -> ... -> child leads from a to b.
  std::vector<std::vector<bool>>
  reachability(int n, const std::vector<std::pair<int, int>> &edges) {
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (auto [child, parent]: edges)
      reach[parent][child] = true;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        if (reach[i][k])
          for (int j = 0; j < n; ++j)
            if (reach[k][j])
              reach[i][j] = true;
    return reach;
  }

  void add_cycle_edges(Rng &rng, int n, int count,
                       std::vector<std::pair<int, int>> &edges) {
    const auto reach = reachability(n, edges);
    std::vector<std::pair<int, int>> candidates;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (reach[a][b])
          candidates.emplace_back(a, b);  // edge b -> a closes a cycle
    if (static_cast<int>(candidates.size()) < count)
      throw Error("the random graph has only "
                  + std::to_string(candidates.size())
                  + " ordered pairs joined by a path; cannot add "
                  + std::to_string(count) + " cycle edges");
    for (int c = 0; c < count; ++c) {
      const auto pick = rng.below(candidates.size());
      edges.push_back(candidates[pick]);
      candidates.erase(candidates.begin() + static_cast<long>(pick));
    }
  }

  bool disjoint(const std::vector<int> &a, const std::vector<int> &b) {
    for (int x: a)
      if (std::find(b.begin(), b.end(), x) != b.end())
        return false;
    return true;
  }

  // Latent membership of each manifest after merging.
  std::vector<std::vector<int>> build_manifests(Rng &rng, const GenConfig &cfg,
                                                const std::vector<int> &lat) {
    std::vector<std::vector<int>> manifests;
    for (int l: lat) {
      const long count = rng.between(cfg.l_manif, cfg.u_manif);
      for (long i = 0; i < count; ++i)
        manifests.push_back({ l });
    }
    const auto initial = static_cast<double>(manifests.size());
    const auto target =
        static_cast<size_t>(std::ceil((1 - cfg.p_manif) * initial - 1e-9));

    while (manifests.size() > target) {
      std::vector<std::pair<size_t, size_t>> pairs;
      for (size_t i = 0; i < manifests.size(); ++i)
        for (size_t j = i + 1; j < manifests.size(); ++j)
          if (disjoint(manifests[i], manifests[j]))
            pairs.emplace_back(i, j);
      if (pairs.empty())
        throw Error("p_manif too high: no pair of manifest variables with "
                    "distinct latent variables is left to merge");
      const auto [i, j] = pairs[rng.below(pairs.size())];
      for (int l: manifests[j])
        manifests[i].push_back(l);
      std::sort(manifests[i].begin(), manifests[i].end());
      manifests.erase(manifests.begin() + static_cast<long>(j));
    }
    return manifests;
  }

  std::string join(const std::vector<std::string> &v, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i)
        out += sep;
      out += v[i];
    }
    return out;
  }

  template<class T>
  T get_or(const nlohmann::json &j, const char *key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  }
}  // namespace

void GenConfig::validate() const {
  if (n_obs < 2)
    throw Error("n_obs must be at least 2");
  if (n_lat < 0 || n_lat > n_obs)
    throw Error("n_lat must lie in [0, n_obs]");
  if (l_manif < 1 || u_manif < l_manif)
    throw Error("manifest range must satisfy 1 <= l_manif <= u_manif");
  if (!(p_manif >= 0 && p_manif < 1))
    throw Error("p_manif must lie in [0, 1)");
  if (n_cycles < 0)
    throw Error("n_cycles must be nonnegative");
  if (!(scale > 0) || !std::isfinite(scale))
    throw Error("scale must be positive");
  if (n_samples < 2)
    throw Error("n_samples must be at least 2");
}

GenConfig parse_gen_config(std::string_view text) {
  static const std::set<std::string> known {
    "n_obs",    "n_lat",  "n_manif", "l_manif",   "u_manif", "p_manif",
    "n_cycles", "scale",  "n_samples", "seed",
  };
  GenConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object())
      throw Error("generator config must be a JSON object");
    for (const auto &[key, value]: j.items())
      if (!known.count(key))
        throw Error("unknown generator config key '" + key + "'");
    cfg.n_obs = get_or(j, "n_obs", cfg.n_obs);
    cfg.n_lat = get_or(j, "n_lat", cfg.n_lat);
    if (j.contains("n_manif")) {
      const auto &m = j.at("n_manif");
      if (m.is_array()) {
        if (m.size() != 2)
          throw Error("n_manif must be a number or an [l, u] pair");
        cfg.l_manif = m[0].get<int>();
        cfg.u_manif = m[1].get<int>();
      } else {
        cfg.l_manif = cfg.u_manif = m.get<int>();
      }
    }
    cfg.l_manif = get_or(j, "l_manif", cfg.l_manif);
    cfg.u_manif = get_or(j, "u_manif", cfg.u_manif);
    cfg.p_manif = get_or(j, "p_manif", cfg.p_manif);
    cfg.n_cycles = get_or(j, "n_cycles", cfg.n_cycles);
    cfg.scale = get_or(j, "scale", cfg.scale);
    cfg.n_samples = get_or(j, "n_samples", cfg.n_samples);
    cfg.seed = get_or(j, "seed", cfg.seed);
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("invalid generator config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string gen_config_json(const GenConfig &cfg) {
  nlohmann::json j { { "n_obs", cfg.n_obs },
                     { "n_lat", cfg.n_lat },
                     { "n_manif", { cfg.l_manif, cfg.u_manif } },
                     { "p_manif", cfg.p_manif },
                     { "n_cycles", cfg.n_cycles },
                     { "scale", cfg.scale },
                     { "n_samples", cfg.n_samples },
                     { "seed", cfg.seed } };
  return j.dump();
}

GenConfig table_set(int index) {
  static const double scales[] = { 0.5, 0.75, 1.0, 1.5, 2.0 };
  static const int latents[] = { 0, 1, 2, 4, 8 };
  if (index < 1 || index > 15)
    throw Error("benchmark sets are numbered 1 to 15");
  GenConfig cfg;
  cfg.p_manif = 0.1;
  cfg.n_samples = 500;
  cfg.l_manif = cfg.u_manif = 2;
  if (index <= 5) {
    cfg.n_obs = 5;
    cfg.n_lat = 2;
    cfg.scale = scales[index - 1];
  } else {
    cfg.n_obs = 10;
    cfg.n_lat = latents[(index - 6) % 5];
    cfg.n_cycles = index > 10 ? 1 : 0;
    cfg.scale = 1.0;
  }
  return cfg;
}

GeneratedCase generate(const GenConfig &cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int n = cfg.n_obs;

  GeneratedCase out;
  out.config = cfg;
  StructuralGraph &g = out.graph;

  // Step 1: structural part.
  g.edges = random_dag(rng, n);
  const auto n_dag = g.edges.size();
  add_cycle_edges(rng, n, cfg.n_cycles, g.edges);
  g.n_cycle_edges = static_cast<int>(g.edges.size() - n_dag);

  std::vector<int> nodes(n);
  for (int i = 0; i < n; ++i)
    nodes[i] = i;
  rng.shuffle(nodes);
  g.latent.assign(n, false);
  for (int i = 0; i < cfg.n_lat; ++i)
    g.latent[nodes[i]] = true;
  std::vector<int> latents;
  int n_eta = 0, n_x = 0;
  for (int i = 0; i < n; ++i) {
    if (g.latent[i]) {
      latents.push_back(i);
      g.names.push_back("eta" + std::to_string(++n_eta));
    } else {
      g.names.push_back("x" + std::to_string(++n_x));
    }
  }

  // Step 2: measurement part.
  const auto manifests = build_manifests(rng, cfg, latents);
  const auto n_y = static_cast<Eigen::Index>(manifests.size());
  std::vector<std::string> y_names;
  for (Eigen::Index k = 0; k < n_y; ++k)
    y_names.push_back("y" + std::to_string(k + 1));

  std::vector<std::vector<int>> indicators(n);  // manifests of each latent
  for (Eigen::Index k = 0; k < n_y; ++k)
    for (int l: manifests[k])
      indicators[l].push_back(static_cast<int>(k));

  // Step 3: parameter values.
  Eigen::MatrixXd beta, lambda;
  Eigen::MatrixXd inv;
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxValueAttempts)
      throw Error("could not draw coefficients with I - B nonsingular");
    out.truth.clear();
    beta = Eigen::MatrixXd::Zero(n, n);
    lambda = Eigen::MatrixXd::Zero(n_y, n);
    for (auto [child, parent]: g.edges) {
      beta(child, parent) = sample_coefficient(rng, cfg.scale);
      out.truth[g.names[child] + "~" + g.names[parent]] = beta(child, parent);
    }
    for (int l: latents) {
      std::vector<std::string> names;
      for (int k: indicators[l])
        names.push_back(y_names[k]);
      const std::string first = first_indicator(names);
      for (int k: indicators[l]) {
        if (y_names[k] == first) {
          lambda(k, l) = 1;
          continue;
        }
        lambda(k, l) = sample_coefficient(rng, cfg.scale);
        out.truth[g.names[l] + "=~" + y_names[k]] = lambda(k, l);
      }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(
        Eigen::MatrixXd::Identity(n, n) - beta);
    if (lu.rcond() > 1e-8) {
      inv = lu.inverse();
      break;
    }
  }

  // Step 4: data.
  std::vector<bool> endogenous(n, false);
  for (auto [child, parent]: g.edges)
    endogenous[child] = true;
  const double noise_sd = std::sqrt(kNoiseVariance);
  const Eigen::Index rows = cfg.n_samples;
  Eigen::MatrixXd eps(rows, n);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (int i = 0; i < n; ++i)
      eps(r, i) = endogenous[i] ? rng.normal(0, noise_sd)
                                : rng.normal() + rng.normal(0, noise_sd);
  const Eigen::MatrixXd omega = eps * inv.transpose();
  Eigen::MatrixXd y = omega * lambda.transpose();
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index k = 0; k < n_y; ++k)
      y(r, k) += rng.normal(0, noise_sd);

  std::vector<std::string> columns = y_names;
  std::vector<int> observed;
  for (int i = 0; i < n; ++i)
    if (!g.latent[i]) {
      observed.push_back(i);
      columns.push_back(g.names[i]);
    }
  Eigen::MatrixXd table(rows, n_y + static_cast<Eigen::Index>(observed.size()));
  table.leftCols(n_y) = y;
  for (size_t c = 0; c < observed.size(); ++c)
    table.col(n_y + static_cast<Eigen::Index>(c)) = omega.col(observed[c]);
  out.data = Dataset(std::move(columns), std::move(table));

  // Model text.
  std::ostringstream text;
  for (int l: latents) {
    std::vector<std::string> names;
    for (int k: indicators[l])
      names.push_back(y_names[k]);
    text << g.names[l] << " =~ " << join(names, " + ") << '\n';
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> parents;
    for (auto [child, parent]: g.edges)
      if (child == i)
        parents.push_back(parent);
    if (parents.empty())
      continue;
    std::sort(parents.begin(), parents.end());
    std::vector<std::string> names;
    for (int p: parents)
      names.push_back(g.names[p]);
    text << g.names[i] << " ~ " << join(names, " + ") << '\n';
  }
  out.model_text = text.str();
  return out;
}

Eigen::VectorXd true_parameters(const GeneratedCase &c, const ParamSystem &ps) {
  const VariableTaxonomy &tax = ps.taxonomy();
  Eigen::VectorXd theta(ps.size());
  for (Eigen::Index i = 0; i < ps.size(); ++i) {
    const Parameter &p = ps.param(i);
    switch (p.kind) {
    case ParamKind::kRegression:
    case ParamKind::kLoading: {
      const auto it = c.truth.find(p.name);
      if (it == c.truth.end())
        throw Error("no generating value for parameter '" + p.name + "'");
      theta[i] = it->second;
      break;
    }
    case ParamKind::kVariance: {
      const bool exo_latent =
          p.matrix == MatrixId::kPsi
          && std::binary_search(tax.eta_exo.begin(), tax.eta_exo.end(),
                                ps.omega_names()[p.row]);
      theta[i] = exo_latent ? kExogenousVariance : kNoiseVariance;
      break;
    }
    case ParamKind::kCovariance:
      theta[i] = 0;
      break;
    }
  }
  return theta;
}

std::string truth_json(const std::map<std::string, double> &truth) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto &[name, value]: truth)
    j[name] = value;
  return j.dump(2) + "\n";
}

void write_case(const GeneratedCase &c, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "model.txt", std::ios::binary);
    os << c.model_text;
    if (!os)
      throw Error("cannot write " + (dir / "model.txt").string());
  }
  {
    std::ofstream os(dir / "params.json", std::ios::binary);
    os << truth_json(c.truth);
    if (!os)
      throw Error("cannot write " + (dir / "params.json").string());
  }
  c.data.write_csv(dir / "data.csv");
}

}  // namespace semforge
