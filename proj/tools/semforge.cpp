//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "semforge/bench.hpp"
#include "semforge/error.hpp"
#include "semforge/fit.hpp"
#include "semforge/generator.hpp"
#include "semforge/stats.hpp"
#include "semforge/syntax.hpp"

namespace fs = std::filesystem;
using namespace semforge;

namespace {

std::string read_file(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct FitArgs {
  std::string model;
  std::string data;
  std::string objective = "MLW";
  std::string method = "SLSQP";
  bool stats = false;
  std::string fim = "expected";
  bool json = false;
  std::optional<double> loglik;
  int max_iterations = 0;
};

int run_fit(const FitArgs &a) {
  const ObjectiveKind objective = parse_objective(a.objective);
  OptimizerOptions options;
  options.method = parse_method(a.method);
  options.max_iterations = a.max_iterations;
  if (a.fim != "expected" && a.fim != "observed")
    throw Error("--fim must be 'expected' or 'observed'");

  Optimizer opt(Model(parse_model(read_file(a.model)),
                      Dataset::read_csv(fs::path(a.data))));
  const FitResult fit = opt.optimize(objective, options);
  const Model &model = opt.model();

  std::optional<Inference> inference;
  std::optional<FitIndices> indices;
  if (a.stats) {
    try {
      const FisherInformation fim = fisher_information(
          model.system(), fit.theta, model.sample_cov(),
          static_cast<double>(model.n()),
          a.fim == "observed" ? FimMode::kObserved : FimMode::kExpected);
      inference = p_values(fit.theta, fim);
    } catch (const Error &e) {
      std::cerr << "warning: standard errors unavailable: " << e.what()
                << '\n';
    }
    const FitResult base = fit_baseline(model, objective, options);
    indices = fit_indices(model, fit, base, a.loglik);
  }

  const Report report = make_report(model, fit, inference, indices);
  std::cout << (a.json ? report_json(report) : format_report(report));
  if (!fit.converged)
    std::cerr << "warning: optimizer stopped without converging ("
              << termination_name(fit.termination) << ")\n";
  return 0;
}

int run_generate(const std::string &config, const std::string &out,
                 std::optional<std::uint64_t> seed) {
  GenConfig cfg = parse_gen_config(read_file(config));
  if (seed)
    cfg.seed = *seed;
  const GeneratedCase c = generate(cfg);
  write_case(c, out);
  std::cout << "wrote model.txt, params.json and data.csv to " << out << '\n';
  return 0;
}

int run_bench(const std::string &campaign_path, const std::string &out,
              std::optional<std::uint64_t> seed, bool quiet) {
  Campaign campaign = parse_campaign(read_file(campaign_path));
  if (seed)
    campaign.seed = *seed;

  const CampaignResult result =
      run_campaign(campaign, [quiet](size_t done, size_t total) {
        if (!quiet && (done % 10 == 0 || done == total))
          std::cerr << "\r" << done << "/" << total << " cases" << std::flush;
      });
  if (!quiet)
    std::cerr << '\n';

  fs::create_directories(out);
  {
    std::ofstream os(fs::path(out) / "records.csv", std::ios::binary);
    write_records_csv(result, os);
  }
  {
    std::ofstream os(fs::path(out) / "summary.json", std::ios::binary);
    os << summary_json(result);
  }

  for (const SetSummary &s: result.sets) {
    std::cout << s.name;
    for (size_t i = 0; i < result.methods.size(); ++i)
      std::cout << "  " << result.methods[i] << " failures " << s.failures[i]
                << "/" << s.cases;
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "Structural equation model estimation and benchmarking" };
  app.require_subcommand(1);

  FitArgs fit;
  auto *fit_cmd = app.add_subcommand("fit", "Estimate a model from data");
  fit_cmd->add_option("model", fit.model, "Model description file")
      ->required()
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("data", fit.data, "CSV data file")
      ->required()
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--objective", fit.objective, "ULS, GLS or MLW")
      ->capture_default_str();
  fit_cmd->add_option("--method", fit.method,
                      "SLSQP, L-BFGS-B, Adam, Nesterov or SGD")
      ->capture_default_str();
  fit_cmd->add_flag("--stats", fit.stats,
                    "Standard errors, p-values and fit indices");
  fit_cmd->add_option("--fim", fit.fim, "expected or observed")
      ->capture_default_str();
  fit_cmd->add_option("--loglik", fit.loglik,
                      "Log-likelihood used by AIC and BIC");
  fit_cmd->add_option("--max-iter", fit.max_iterations,
                      "Iteration limit (0: method default)");
  fit_cmd->add_flag("--json", fit.json, "Print the report as JSON");

  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  auto *gen_cmd = app.add_subcommand("generate", "Generate a random model");
  gen_cmd->add_option("config", gen_config, "Generator config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("-o,--output", gen_out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen_seed, "Overrides the config seed");

  std::string bench_campaign, bench_out;
  std::optional<std::uint64_t> bench_seed;
  bool bench_quiet = false;
  auto *bench_cmd = app.add_subcommand("bench", "Run a benchmark campaign");
  bench_cmd->add_option("campaign", bench_campaign, "Campaign file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("-o,--output", bench_out, "Output directory")
      ->required();
  bench_cmd->add_option("--seed", bench_seed, "Overrides the campaign seed");
  bench_cmd->add_flag("-q,--quiet", bench_quiet, "No progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd)
      return run_fit(fit);
    if (*gen_cmd)
      return run_generate(gen_config, gen_out, gen_seed);
    if (*bench_cmd)
      return run_bench(bench_campaign, bench_out, bench_seed, bench_quiet);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
