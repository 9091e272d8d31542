//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "semforge/random.hpp"

namespace semforge::testing {

const char *const kExampleModel = R"(# Structural part
eta3 ~ x1 + x2
eta4 ~ x3
x3 ~ eta1 + eta2 + x1 + x4
x4 ~ eta4
x5 ~ x4
# Measurement part
eta1 =~ y1 + y2 + y3
eta2 =~ y3
eta3 =~ y4 + y5
eta4 =~ y4 + y6
# Additional covariances
eta2 ~~ x2
y5 ~~ y6
)";

Eigen::VectorXd central_gradient(const ScalarFunction &f,
                                 const Eigen::VectorXd &x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

Eigen::MatrixXd central_jacobian(const VectorFunction &f,
                                 const Eigen::VectorXd &x, double h) {
  Eigen::MatrixXd j;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    const Eigen::VectorXd d = (f(a) - f(b)) / (2 * h);
    if (i == 0)
      j.resize(d.size(), x.size());
    j.col(i) = d;
  }
  return j;
}

double max_relative_error(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  double worst = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double scale = std::max({ std::abs(a(i, j)), std::abs(b(i, j)), 1.0 });
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
    }
  return worst;
}

Dataset random_dataset(const std::vector<std::string> &names, int n,
                       std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd rows(n, static_cast<Eigen::Index>(names.size()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      rows(r, c) = rng.normal();
  return Dataset(names, rows);
}

std::vector<std::string> observed_names(const ModelDescription &desc) {
  const VariableTaxonomy tax = classify(desc);
  return tax.z();
}

Model scalar_model(double s, Eigen::Index n) {
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(1, 1, s);
  return Model(ParamSystem::independence({ "x" }, cov), cov, n);
}

Problem generated_problem(const GenConfig &cfg) {
  GeneratedCase gen = generate(cfg);
  Model model(parse_model(gen.model_text), gen.data);
  Eigen::VectorXd truth = true_parameters(gen, model.system());
  return { std::move(gen), std::move(model), std::move(truth) };
}

Problem set3_problem(std::uint64_t seed, int n_samples) {
  GenConfig cfg = table_set(3);
  cfg.seed = seed;
  cfg.n_samples = n_samples;
  return generated_problem(cfg);
}

Eigen::VectorXd perturbed(const Problem &p, double spread,
                          std::uint64_t seed) {
  Rng rng(seed);
  const ParamSystem &ps = p.model.system();
  Eigen::VectorXd theta = p.truth;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double base = theta[i] != 0 ? theta[i] : 0.05;
    theta[i] += rng.uniform(-spread, spread) * std::abs(base);
  }
  return theta.cwiseMax(ps.lower_bounds()).cwiseMin(ps.upper_bounds());
}

std::map<std::string, double> estimates(const Problem &p,
                                        const Eigen::VectorXd &theta) {
  std::map<std::string, double> out;
  for (const auto &[name, v]: p.gen.truth)
    out[name] = theta[*p.model.system().find(name)];
  return out;
}

ModelDescription random_description(Rng &rng) {
  static const double values[] = { 1, -1, 0.5, 2, 1e-3, -2.25, 10, 0.1 };
  auto name = [&]() {
    static const char *stems[] = { "x", "y", "eta", "f", "v_", "Z" };
    return std::string(stems[rng.below(6)]) + std::to_string(rng.below(12));
  };
  auto term = [&]() {
    Term t { name(), std::nullopt };
    if (rng.bernoulli(0.3))
      t.fixed = values[rng.below(8)];
    return t;
  };

  ModelDescription d;
  std::set<std::string> seen;
  const auto n = 1 + rng.below(8);
  while (d.statements.size() < n) {
    const auto kind = static_cast<StatementKind>(rng.below(4));
    Statement st { kind, {}, {}, VariableType::kOrdinal, 0 };
    if (kind == StatementKind::kTypeDecl) {
      const auto k = 1 + rng.below(3);
      for (size_t i = 0; i < k; ++i)
        st.lhs.push_back(name());
    } else {
      st.lhs.push_back(name());
      const auto k = kind == StatementKind::kCovariance ? 1 : 1 + rng.below(4);
      std::set<std::string> used;
      while (st.rhs.size() < k) {
        Term t = term();
        if (used.insert(t.name).second)
          st.rhs.push_back(t);
      }
    }
    std::string key = std::string(operator_symbol(kind));
    for (const auto &s: st.lhs)
      key += " " + s;
    bool fresh = true;
    for (const auto &t: st.rhs) {
      std::string a = st.lhs.front(), b = t.name;
      if (kind == StatementKind::kCovariance && b < a)
        std::swap(a, b);
      fresh = seen.insert(key + "|" + a + "|" + b).second && fresh;
    }
    if (kind == StatementKind::kTypeDecl) {
      std::set<std::string> names(st.lhs.begin(), st.lhs.end());
      fresh = names.size() == st.lhs.size();
      for (const auto &n: names)
        fresh = fresh && !seen.count("is|" + n);
      if (fresh)
        for (const auto &n: names)
          seen.insert("is|" + n);
    }
    if (fresh)
      d.statements.push_back(std::move(st));
  }
  return d;
}

}  // namespace semforge::testing
