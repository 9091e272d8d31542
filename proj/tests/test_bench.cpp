//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <limits>
#include <sstream>

#include <catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "semforge/bench.hpp"
#include "semforge/error.hpp"
#include "semforge/random.hpp"

using namespace semforge;
using Catch::Matchers::WithinAbs;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string records_without_seconds(const CampaignResult &r) {
  CampaignResult copy = r;
  for (BenchRecord &rec: copy.records)
    rec.seconds = 0;
  std::ostringstream os;
  write_records_csv(copy, os);
  return os.str();
}

}  // namespace

TEST_CASE("mean relative error", "[bench]") {
  const std::map<std::string, double> truth { { "a", 1 }, { "b", 2 } };
  CHECK(delta(truth, truth) == 0);
  CHECK_THAT(delta(truth, { { "a", 1.1 }, { "b", 1.8 } }), WithinAbs(0.1, 1e-15));
  // Extra estimates are ignored; negative truths use magnitudes.
  CHECK_THAT(delta({ { "a", -0.5 } }, { { "a", -0.25 }, { "z", 9 } }),
             WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(delta(truth, { { "a", 1 } }), Error);
  CHECK_THROWS_AS(delta({ { "a", 0 } }, { { "a", 1 } }), Error);
  CHECK(std::isnan(delta(truth, { { "a", kNaN }, { "b", 2 } })));
}

TEST_CASE("failure classification", "[bench]") {
  const Eigen::VectorXd ok = Eigen::Vector2d(1, 2);
  CHECK(classify_failure(ok, 0.5, false, 0.29) == Failure::kNone);
  CHECK(classify_failure(ok, 0.5, false, 0.3) == Failure::kNone);
  CHECK(classify_failure(ok, 0.5, false, 0.31) == Failure::kDiverged);
  CHECK(classify_failure(ok, 0.5, false, kNaN) == Failure::kDiverged);
  CHECK(classify_failure(Eigen::Vector2d(1, kNaN), 0.5, false, 0.1)
        == Failure::kNanParam);
  CHECK(classify_failure(ok, kNaN, false, 0.1) == Failure::kNanObjective);
  CHECK(classify_failure(ok, 0.5, true, 0.1) == Failure::kNanObjective);
  CHECK(classify_failure(Eigen::Vector2d(1, kNaN), kNaN, true, kNaN)
        == Failure::kNanParam);
  CHECK(failure_name(Failure::kNone) == "none");
  CHECK(failure_name(Failure::kNanParam) == "nan-param");
  CHECK(failure_name(Failure::kNanObjective) == "nan-objective");
  CHECK(failure_name(Failure::kDiverged) == "diverged");
}

TEST_CASE("method matrix", "[bench]") {
  // A always succeeds and B always fails.
  const std::vector<std::vector<bool>> degenerate(10, { false, true });
  CHECK(method_matrix(degenerate, 2)
        == std::vector<std::vector<int>> { { 0, 0 }, { 10, 10 } });

  const std::vector<std::vector<bool>> mixed {
    { true, true, false }, { true, false, false }, { false, false, true },
    { false, false, false }
  };
  const auto m = method_matrix(mixed, 3);
  CHECK(m == std::vector<std::vector<int>> { { 2, 1, 2 }, { 0, 1, 1 },
                                            { 1, 1, 1 } });
  CHECK_THROWS_AS(method_matrix({ { true } }, 2), Error);
}

TEST_CASE("method matrix counting bound", "[bench][property]") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t k = 1 + rng.below(4);
    std::vector<std::vector<bool>> failed(rng.below(30));
    for (auto &row: failed)
      for (size_t i = 0; i < k; ++i)
        row.push_back(rng.bernoulli(0.3));
    const auto m = method_matrix(failed, k);
    for (size_t i = 0; i < k; ++i) {
      int off = 0;
      for (size_t j = 0; j < k; ++j)
        if (j != i) {
          CHECK(m[i][j] <= m[i][i]);
          off += m[i][j];
        }
      CHECK(off <= m[i][i] * static_cast<int>(k - 1));
    }
  }
}

TEST_CASE("method labels", "[bench]") {
  const MethodSpec a = MethodSpec::parse("MLW/SLSQP");
  CHECK(a.objectives == std::vector<ObjectiveKind> { ObjectiveKind::kMLW });
  CHECK(a.method == MethodKind::kSLSQP);
  const MethodSpec b = MethodSpec::parse("ULS>MLW/L-BFGS-B");
  CHECK(b.objectives
        == std::vector<ObjectiveKind> { ObjectiveKind::kULS,
                                        ObjectiveKind::kMLW });
  CHECK(b.method == MethodKind::kLBFGSB);
  CHECK(b.label() == "ULS>MLW/L-BFGS-B");
  CHECK(MethodSpec {}.label() == "MLW/SLSQP");
  CHECK_THROWS_AS(MethodSpec::parse("MLW"), Error);
  CHECK_THROWS_AS(MethodSpec::parse("XYZ/SLSQP"), Error);
  CHECK_THROWS_AS(MethodSpec::parse("MLW/Simplex"), Error);
}

TEST_CASE("campaign JSON", "[bench]") {
  const Campaign c = parse_campaign(
      R"({"seed": 4, "replications": 7,
          "sets": [3, {"name": "wide", "n_obs": 8, "n_lat": 3}],
          "methods": ["MLW/SLSQP", "GLS/Adam"]})");
  CHECK(c.seed == 4);
  CHECK(c.replications == 7);
  REQUIRE(c.sets.size() == 2);
  CHECK(c.sets[0].name == "set3");
  CHECK(c.sets[0].config.scale == 1.0);
  CHECK(c.sets[1].name == "wide");
  CHECK(c.sets[1].config.n_obs == 8);
  CHECK(c.methods[1].method == MethodKind::kAdam);

  const Campaign d = parse_campaign(R"({"sets": [1]})");
  CHECK(d.replications == 1);
  CHECK(d.methods.size() == 1);

  CHECK_THROWS_AS(parse_campaign(R"({"sets": []})"), Error);
  CHECK_THROWS_AS(parse_campaign(R"({"sets": [1], "replications": 0})"), Error);
  CHECK_THROWS_AS(parse_campaign(R"({"sets": [99]})"), Error);
  CHECK_THROWS_AS(parse_campaign(R"({"sets": [1], "extra": true})"), Error);
}

TEST_CASE("case seeds", "[bench]") {
  CHECK(case_seed(1, 0, 0) == case_seed(1, 0, 0));
  CHECK(case_seed(1, 0, 0) != case_seed(1, 0, 1));
  CHECK(case_seed(1, 0, 0) != case_seed(1, 1, 0));
  CHECK(case_seed(1, 0, 0) != case_seed(2, 0, 0));
}

TEST_CASE("records satisfy the failure invariant", "[bench][property]") {
  Campaign c;
  c.seed = 3;
  c.replications = 20;
  c.sets = { { "set1", table_set(1) }, { "set13", table_set(13) } };
  c.methods = { MethodSpec::parse("MLW/SLSQP"), MethodSpec::parse("ULS/SGD") };
  const CampaignResult r = run_campaign(c);
  REQUIRE(r.records.size() == 2 * 20 * 2);
  std::vector<int> counted(2, 0);
  for (const BenchRecord &rec: r.records) {
    const bool clean = std::isfinite(rec.value) && rec.delta <= 0.3;
    INFO(rec.case_id << " " << rec.method);
    if (rec.failure == Failure::kNone)
      CHECK(clean);
    if (rec.failure == Failure::kDiverged)
      CHECK_FALSE(rec.delta <= 0.3);
  }
  for (const SetSummary &s: r.sets) {
    CHECK(s.cases == 20);
    for (size_t i = 0; i < 2; ++i)
      counted[i] += s.failures[i];
  }
  for (size_t i = 0; i < 2; ++i)
    CHECK(r.matrix[i][i] == counted[i]);
}

TEST_CASE("campaigns are reproducible", "[bench][property]") {
  Campaign c;
  c.seed = 11;
  c.replications = 10;
  c.sets = { { "set3", table_set(3) }, { "set12", table_set(12) } };
  c.methods = { MethodSpec::parse("MLW/SLSQP"),
                MethodSpec::parse("ULS>MLW/L-BFGS-B") };
  size_t last_done = 0;
  const CampaignResult a = run_campaign(c, [&](size_t done, size_t total) {
    CHECK(done == last_done + 1);
    CHECK(total == 20);
    last_done = done;
  });
  CHECK(last_done == 20);
  const CampaignResult b = run_campaign(c);
  CHECK(summary_json(a, true) == summary_json(b, true));
  CHECK(records_without_seconds(a) == records_without_seconds(b));

  c.seed = 12;
  CHECK(summary_json(run_campaign(c), true) != summary_json(a, true));

  const auto j = nlohmann::json::parse(summary_json(a));
  CHECK(j["methods"].size() == 2);
  CHECK(j["sets"].size() == 2);
  CHECK(j["matrix"].size() == 2);
  CHECK(j["sets"][0].contains("seconds"));
  CHECK_FALSE(
      nlohmann::json::parse(summary_json(a, true))["sets"][0].contains(
          "seconds"));
}

TEST_CASE("generation errors become failure records", "[bench]") {
  GenConfig bad = table_set(3);
  bad.n_obs = 3;
  bad.n_lat = 1;
  bad.l_manif = bad.u_manif = 3;
  bad.p_manif = 0.5;  // cannot be merged with a single latent
  Campaign c;
  c.sets = { { "bad", bad } };
  c.replications = 2;
  const CampaignResult r = run_campaign(c);
  REQUIRE(r.records.size() == 2);
  for (const BenchRecord &rec: r.records) {
    CHECK(rec.failure == Failure::kNanObjective);
    CHECK_FALSE(rec.error.empty());
  }
  CHECK(r.matrix[0][0] == 2);
}
