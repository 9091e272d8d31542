//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/bench.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <nlohmann/json.hpp>

#include "semforge/error.hpp"
#include "semforge/fit.hpp"
#include "semforge/random.hpp"
#include "semforge/syntax.hpp"

namespace semforge {
namespace {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  std::string shortest(double v) {
    if (std::isnan(v))
      return "nan";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  }

  nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  }

  std::string make_case_id(const std::string &set, int replicate) {
    return set + "-r" + std::to_string(replicate);
  }

  BenchRecord error_record(const std::string &method, std::string error) {
    BenchRecord r;
    r.method = method;
    r.delta = r.value = kNaN;
    r.termination = Termination::kDomainFailure;
    r.failure = Failure::kNanObjective;
    r.error = std::move(error);
    return r;
  }
}  // namespace

std::string_view failure_name(Failure f) noexcept {
  switch (f) {
  case Failure::kNone:
    return "none";
  case Failure::kNanParam:
    return "nan-param";
  case Failure::kNanObjective:
    return "nan-objective";
  case Failure::kDiverged:
    return "diverged";
  }
  return "";
}

double delta(const std::map<std::string, double> &truth,
             const std::map<std::string, double> &estimate) {
  if (truth.empty())
    throw Error("no parameters to compare");
  double sum = 0;
  for (const auto &[name, value]: truth) {
    const auto it = estimate.find(name);
    if (it == estimate.end())
      throw Error("no estimate for parameter '" + name + "'");
    if (value == 0)
      throw Error("true value of '" + name + "' is zero");
    sum += std::abs(it->second - value) / std::abs(value);
  }
  return sum / static_cast<double>(truth.size());
}

Failure classify_failure(const Eigen::VectorXd &theta, double value,
                         bool domain_failure, double delta) {
  if (!theta.allFinite())
    return Failure::kNanParam;
  if (!std::isfinite(value) || domain_failure)
    return Failure::kNanObjective;
  if (!(delta <= kDivergenceThreshold))
    return Failure::kDiverged;
  return Failure::kNone;
}

std::string MethodSpec::label() const {
  std::string out;
  for (size_t i = 0; i < objectives.size(); ++i) {
    if (i)
      out += '>';
    out += objective_name(objectives[i]);
  }
  return out + "/" + std::string(method_name(method));
}

MethodSpec MethodSpec::parse(std::string_view label) {
  const auto slash = label.find('/');
  if (slash == std::string_view::npos)
    throw Error("method label '" + std::string(label)
                + "' must look like OBJECTIVE/METHOD");
  MethodSpec spec;
  spec.objectives.clear();
  std::string_view chain = label.substr(0, slash);
  while (true) {
    const auto gt = chain.find('>');
    spec.objectives.push_back(parse_objective(chain.substr(0, gt)));
    if (gt == std::string_view::npos)
      break;
    chain.remove_prefix(gt + 1);
  }
  spec.method = parse_method(label.substr(slash + 1));
  return spec;
}

void Campaign::validate() const {
  if (sets.empty())
    throw Error("campaign has no sets");
  if (replications < 1)
    throw Error("replications must be at least 1");
  if (methods.empty())
    throw Error("campaign has no methods");
  for (const auto &s: sets)
    s.config.validate();
}

Campaign parse_campaign(std::string_view text) {
  Campaign c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object())
      throw Error("campaign must be a JSON object");
    for (const auto &[key, value]: j.items())
      if (key != "seed" && key != "replications" && key != "sets"
          && key != "methods")
        throw Error("unknown campaign key '" + key + "'");
    c.seed = j.value("seed", std::uint64_t { 0 });
    c.replications = j.value("replications", 1);
    for (const auto &s: j.at("sets")) {
      if (s.is_number_integer()) {
        const int index = s.get<int>();
        c.sets.push_back({ "set" + std::to_string(index), table_set(index) });
        continue;
      }
      nlohmann::json cfg = s;
      std::string name = "set" + std::to_string(c.sets.size() + 1);
      if (cfg.contains("name")) {
        name = cfg.at("name").get<std::string>();
        cfg.erase("name");
      }
      c.sets.push_back({ name, parse_gen_config(cfg.dump()) });
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto &m: j.at("methods"))
        c.methods.push_back(MethodSpec::parse(m.get<std::string>()));
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("invalid campaign: ") + e.what());
  }
  c.validate();
  return c;
}

std::uint64_t case_seed(std::uint64_t master, size_t set, int replicate) {
  return derive_seed(derive_seed(master, set),
                     static_cast<std::uint64_t>(replicate));
}

std::vector<std::vector<int>>
method_matrix(const std::vector<std::vector<bool>> &failed, size_t n_methods) {
  std::vector<std::vector<int>> m(n_methods, std::vector<int>(n_methods, 0));
  for (const auto &row: failed) {
    if (row.size() != n_methods)
      throw Error("failure row does not match the method count");
    for (size_t i = 0; i < n_methods; ++i) {
      if (!row[i])
        continue;
      ++m[i][i];
      for (size_t j = 0; j < n_methods; ++j)
        if (j != i && !row[j])
          ++m[i][j];
    }
  }
  return m;
}

std::vector<BenchRecord> run_case(const GeneratedCase &c,
                                  const std::vector<MethodSpec> &methods) {
  std::vector<BenchRecord> out;
  std::optional<Model> model;
  std::string build_error;
  try {
    model.emplace(parse_model(c.model_text), c.data);
  } catch (const Error &e) {
    build_error = e.what();
  }

  for (const MethodSpec &spec: methods) {
    const std::string label = spec.label();
    if (!model) {
      out.push_back(error_record(label, build_error));
      continue;
    }
    try {
      OptimizerOptions options;
      options.method = spec.method;
      Optimizer opt(*model);
      FitResult fit;
      const auto t0 = std::chrono::steady_clock::now();
      for (ObjectiveKind objective: spec.objectives)
        fit = opt.optimize(objective, options);
      const auto t1 = std::chrono::steady_clock::now();

      BenchRecord r;
      r.method = label;
      r.seconds = std::chrono::duration<double>(t1 - t0).count();
      r.value = fit.discrepancy;
      r.iterations = fit.iterations;
      r.termination = fit.termination;

      std::map<std::string, double> estimate;
      for (const auto &[name, value]: c.truth) {
        const auto i = model->system().find(name);
        if (!i)
          throw Error("model has no parameter '" + name + "'");
        estimate[name] = fit.theta[*i];
      }
      r.delta = fit.theta.allFinite() ? delta(c.truth, estimate) : kNaN;
      r.failure = classify_failure(
          fit.theta, fit.value,
          fit.termination == Termination::kDomainFailure, r.delta);
      out.push_back(std::move(r));
    } catch (const Error &e) {
      out.push_back(error_record(label, e.what()));
    }
  }
  return out;
}

CampaignResult run_campaign(const Campaign &campaign,
                            const ProgressCallback &progress) {
  campaign.validate();
  const size_t n_methods = campaign.methods.size();
  CampaignResult result;
  for (const auto &m: campaign.methods)
    result.methods.push_back(m.label());

  const size_t total = campaign.sets.size()
                       * static_cast<size_t>(campaign.replications);
  size_t done = 0;
  std::vector<std::vector<bool>> failed;
  for (size_t s = 0; s < campaign.sets.size(); ++s) {
    const BenchSet &set = campaign.sets[s];
    SetSummary summary { set.name, set.config, 0,
                         std::vector<int>(n_methods, 0),
                         std::vector<double>(n_methods, 0.0) };
    for (int rep = 0; rep < campaign.replications; ++rep) {
      const std::uint64_t seed = case_seed(campaign.seed, s, rep);
      std::vector<BenchRecord> records;
      try {
        records = run_case(seeded_replay(set.config, seed), campaign.methods);
      } catch (const Error &e) {
        for (const auto &label: result.methods)
          records.push_back(
              error_record(label, std::string("generation: ") + e.what()));
      }

      std::vector<bool> row(n_methods);
      for (size_t i = 0; i < n_methods; ++i) {
        BenchRecord &r = records[i];
        r.case_id = make_case_id(set.name, rep);
        r.set = s;
        r.replicate = rep;
        r.seed = seed;
        row[i] = r.failure != Failure::kNone;
        summary.failures[i] += row[i];
        summary.seconds[i] += r.seconds;
        result.records.push_back(std::move(r));
      }
      failed.push_back(std::move(row));
      ++summary.cases;
      if (progress)
        progress(++done, total);
    }
    result.sets.push_back(std::move(summary));
  }
  result.matrix = method_matrix(failed, n_methods);
  return result;
}

void write_records_csv(const CampaignResult &result, std::ostream &os) {
  os << "case_id,set,replicate,seed,method,delta,objective_value,seconds,"
        "iterations,termination,failure,error\n";
  for (const BenchRecord &r: result.records) {
    std::string error = r.error;
    for (char &ch: error)
      if (ch == '"' || ch == ',' || ch == '\n')
        ch = ' ';
    os << r.case_id << ',' << result.sets[r.set].name << ',' << r.replicate
       << ',' << r.seed << ',' << r.method << ',' << shortest(r.delta) << ','
       << shortest(r.value) << ',' << shortest(r.seconds) << ','
       << r.iterations << ',' << termination_name(r.termination) << ','
       << failure_name(r.failure) << ',' << error << '\n';
  }
}

std::string summary_json(const CampaignResult &result, bool deterministic) {
  nlohmann::json j;
  j["methods"] = result.methods;
  j["matrix"] = result.matrix;
  j["sets"] = nlohmann::json::array();
  for (const SetSummary &s: result.sets) {
    nlohmann::json set { { "name", s.name },
                         { "config", nlohmann::json::parse(
                                         gen_config_json(s.config)) },
                         { "cases", s.cases } };
    set["config"].erase("seed");
    for (size_t i = 0; i < result.methods.size(); ++i) {
      set["failures"][result.methods[i]] = s.failures[i];
      set["failure_rate"][result.methods[i]] =
          s.cases ? static_cast<double>(s.failures[i]) / s.cases : 0.0;
      if (!deterministic)
        set["seconds"][result.methods[i]] = number_or_null(s.seconds[i]);
    }
    j["sets"].push_back(std::move(set));
  }
  return j.dump(2) + "\n";
}

}  // namespace semforge
