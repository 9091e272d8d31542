//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "semforge/bench.hpp"
#include "semforge/error.hpp"
#include "semforge/fit.hpp"
#include "semforge/generator.hpp"
#include "semforge/random.hpp"
#include "support.hpp"

using namespace semforge;
using Catch::Matchers::WithinAbs;

namespace {

std::string csv_text(const Dataset &d) {
  std::ostringstream os;
  d.write_csv(os);
  return os.str();
}

// FNV-1a, 64 bit.
std::uint64_t fingerprint(const std::string &s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c: s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool has_cycle(int n, const std::vector<std::pair<int, int>> &edges) {
  std::vector<std::vector<int>> out(n);
  for (auto [child, parent]: edges)
    out[parent].push_back(child);
  std::vector<int> state(n, 0);
  std::function<bool(int)> visit = [&](int v) {
    state[v] = 1;
    for (int w: out[v])
      if (state[w] == 1 || (state[w] == 0 && visit(w)))
        return true;
    state[v] = 2;
    return false;
  };
  for (int v = 0; v < n; ++v)
    if (state[v] == 0 && visit(v))
      return true;
  return false;
}

}  // namespace

TEST_CASE("set 3 structure", "[generator]") {
  GenConfig cfg = table_set(3);
  CHECK(cfg.n_obs == 5);
  CHECK(cfg.n_lat == 2);
  CHECK(cfg.scale == 1.0);
  CHECK(cfg.n_samples == 500);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const GeneratedCase c = generate(cfg);
    const Model m(parse_model(c.model_text), c.data);
    const VariableTaxonomy &tax = m.system().taxonomy();
    INFO(c.model_text);
    CHECK(tax.n_eta() == 2);
    CHECK(tax.n_x() == 3);
    const auto n_y = static_cast<Eigen::Index>(tax.y.size());
    CHECK(c.data.n() == 500);
    CHECK(c.data.rows().cols() == 3 + n_y);
    // Two latents with two manifests each, merged down to ceil(0.9 * 4).
    CHECK(n_y == 4);
    CHECK(c.data.names().front() == "y1");
  }
}

TEST_CASE("table sets", "[generator]") {
  for (int i = 1; i <= 5; ++i)
    CHECK(table_set(i).n_obs == 5);
  CHECK(table_set(1).scale == 0.5);
  CHECK(table_set(5).scale == 2.0);
  CHECK(table_set(6).n_lat == 0);
  CHECK(table_set(10).n_lat == 8);
  CHECK(table_set(10).n_cycles == 0);
  CHECK(table_set(11).n_cycles == 1);
  CHECK(table_set(15).n_obs == 10);
  CHECK_THROWS_AS(table_set(0), Error);
  CHECK_THROWS_AS(table_set(16), Error);
}

TEST_CASE("no latents means no measurement part", "[generator]") {
  GenConfig cfg = table_set(6);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    const GeneratedCase c = generate(cfg);
    CHECK(c.model_text.find("=~") == std::string::npos);
    CHECK(c.data.names().size() == 10);
  }
}

TEST_CASE("every structural node is connected", "[generator][property]") {
  for (int set: { 3, 8, 13 }) {
    GenConfig cfg = table_set(set);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      cfg.seed = seed;
      const GeneratedCase c = generate(cfg);
      std::vector<int> degree(cfg.n_obs, 0);
      for (auto [child, parent]: c.graph.edges) {
        ++degree[child];
        ++degree[parent];
      }
      for (int d: degree)
        CHECK(d > 0);
    }
  }
}

TEST_CASE("cycle edges create cycles", "[generator][property]") {
  for (int set: { 6, 11, 12, 15 }) {
    GenConfig cfg = table_set(set);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      cfg.seed = seed;
      const GeneratedCase c = generate(cfg);
      const auto &e = c.graph.edges;
      const std::vector<std::pair<int, int>> dag(
          e.begin(), e.end() - c.graph.n_cycle_edges);
      INFO("set " << set << " seed " << seed);
      CHECK(c.graph.n_cycle_edges == cfg.n_cycles);
      CHECK_FALSE(has_cycle(cfg.n_obs, dag));
      CHECK(has_cycle(cfg.n_obs, e) == (cfg.n_cycles > 0));
      // The model must still be buildable.
      CHECK_NOTHROW(Model(parse_model(c.model_text), c.data));
    }
  }
}

TEST_CASE("coefficient magnitudes", "[generator][property]") {
  for (double scale: { 0.5, 1.0, 2.0 }) {
    GenConfig cfg = table_set(13);
    cfg.scale = scale;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      cfg.seed = seed;
      const GeneratedCase c = generate(cfg);
      for (const auto &[name, v]: c.truth) {
        INFO(name << " = " << v);
        CHECK(std::abs(v) >= 0.1 * scale);
        CHECK(std::abs(v) <= scale);
      }
    }
  }
}

TEST_CASE("manifest merging", "[generator][property]") {
  GenConfig cfg;
  cfg.n_obs = 8;
  cfg.n_lat = 5;
  cfg.l_manif = 2;
  cfg.u_manif = 4;
  cfg.p_manif = 0.3;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    const GeneratedCase c = generate(cfg);
    const Model m(parse_model(c.model_text), c.data);
    const ParamSystem &ps = m.system();
    const auto &y = ps.taxonomy().y;
    // Each manifest measures one or more latents; count loadings per latent.
    std::map<std::string, int> per_latent;
    std::map<std::string, int> per_manifest;
    for (const Statement &st: parse_model(c.model_text).statements)
      if (st.kind == StatementKind::kLoading)
        for (const Term &t: st.rhs) {
          ++per_latent[st.lhs[0]];
          ++per_manifest[t.name];
        }
    int initial = 0;
    for (const auto &[name, count]: per_manifest)
      initial += count;
    INFO(c.model_text);
    CHECK(per_latent.size() == 5);
    for (const auto &[name, count]: per_latent)
      CHECK(count >= 1);
    // Each merge removes exactly one manifest.
    CHECK(static_cast<int>(y.size())
          == static_cast<int>(std::ceil((1 - cfg.p_manif) * initial - 1e-9)));
  }
}

TEST_CASE("impossible merge target", "[generator]") {
  GenConfig cfg;
  cfg.n_obs = 3;
  cfg.n_lat = 1;
  cfg.l_manif = cfg.u_manif = 3;
  cfg.p_manif = 0.5;
  // A single latent has no partner to merge manifests with.
  CHECK_THROWS_AS(generate(cfg), Error);
}

TEST_CASE("config validation", "[generator]") {
  GenConfig bad;
  bad.n_lat = 6;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = GenConfig {};
  bad.l_manif = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = GenConfig {};
  bad.n_samples = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = GenConfig {};
  bad.p_manif = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = GenConfig {};
  bad.scale = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("config JSON", "[generator]") {
  const GenConfig a = parse_gen_config(
      R"({"n_obs": 10, "n_lat": 4, "n_manif": [2, 3], "p_manif": 0.2,
          "n_cycles": 1, "scale": 1.5, "n_samples": 300, "seed": 9})");
  CHECK(a.n_obs == 10);
  CHECK(a.n_lat == 4);
  CHECK(a.l_manif == 2);
  CHECK(a.u_manif == 3);
  CHECK(a.p_manif == 0.2);
  CHECK(a.n_cycles == 1);
  CHECK(a.scale == 1.5);
  CHECK(a.n_samples == 300);
  CHECK(a.seed == 9);

  const GenConfig b = parse_gen_config(R"({"n_manif": 3})");
  CHECK(b.l_manif == 3);
  CHECK(b.u_manif == 3);

  const GenConfig c = parse_gen_config(gen_config_json(a));
  CHECK(gen_config_json(c) == gen_config_json(a));

  CHECK_THROWS_AS(parse_gen_config(R"({"n_obs": 5, "colour": 1})"), Error);
  CHECK_THROWS_AS(parse_gen_config("[1, 2]"), Error);
  CHECK_THROWS_AS(parse_gen_config("{"), Error);
}

TEST_CASE("generation is deterministic", "[generator][property]") {
  for (int set: { 3, 14 }) {
    const GeneratedCase a = seeded_replay(table_set(set), 77);
    const GeneratedCase b = seeded_replay(table_set(set), 77);
    CHECK(a.model_text == b.model_text);
    CHECK(csv_text(a.data) == csv_text(b.data));
    CHECK(truth_json(a.truth) == truth_json(b.truth));

    const GeneratedCase other = seeded_replay(table_set(set), 78);
    CHECK(csv_text(other.data) != csv_text(a.data));
  }
}

TEST_CASE("generator output is stable across builds", "[generator]") {
  // Guards the random stream and every transform applied to it.
  const GeneratedCase c = seeded_replay(table_set(3), 42);
  CHECK(c.model_text
        == "eta1 =~ y1 + y2\n"
           "eta2 =~ y3 + y4\n"
           "x1 ~ x2\n"
           "eta1 ~ eta2 + x2\n"
           "x3 ~ eta2 + x2\n");
  CHECK(fingerprint(csv_text(c.data)) == 0x5e49cdfaf1ade0afull);
}

TEST_CASE("written cases", "[generator]") {
  const GeneratedCase c = seeded_replay(table_set(3), 5);
  const auto dir = std::filesystem::temp_directory_path() / "semforge_gen_test";
  std::filesystem::remove_all(dir);
  write_case(c, dir);
  std::ifstream model(dir / "model.txt");
  std::stringstream text;
  text << model.rdbuf();
  CHECK(text.str() == c.model_text);

  std::ifstream params(dir / "params.json");
  const auto j = nlohmann::json::parse(params);
  CHECK(j.size() == c.truth.size());
  for (const auto &[name, v]: c.truth)
    CHECK(j[name].get<double>() == v);

  std::ifstream data(dir / "data.csv");
  const Dataset back = Dataset::read_csv(data);
  CHECK(back.rows() == c.data.rows());
  std::filesystem::remove_all(dir);
}

TEST_CASE("large samples recover the generating values", "[generator][oracle]") {
  for (double scale: { 0.75, 1.0, 1.5 }) {
    GenConfig cfg = table_set(3);
    cfg.scale = scale;
    cfg.n_samples = 100000;
    int good = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      cfg.seed = 500 + seed;
      const auto p = testing::generated_problem(cfg);
      const FitResult r = minimize(p.model, ObjectiveKind::kMLW, {},
                                   p.model.system().start());
      if (delta(p.gen.truth, testing::estimates(p, r.theta)) < 0.05)
        ++good;
    }
    INFO("scale " << scale);
    CHECK(good >= 9);
  }
}

TEST_CASE("sample moments match the generating covariance", "[generator][oracle]") {
  GenConfig cfg = table_set(13);
  cfg.n_samples = 100000;
  cfg.seed = 3;
  const auto p = testing::generated_problem(cfg);
  const Eigen::MatrixXd implied = sigma(p.model.system(), p.truth);
  const Eigen::MatrixXd &s = p.model.sample_cov();
  // Loose band: several standard errors of a covariance at n = 1e5.
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double se = std::sqrt((implied(i, i) * implied(j, j)
                                   + implied(i, j) * implied(i, j))
                                  / cfg.n_samples);
      CHECK(std::abs(s(i, j) - implied(i, j)) <= 5 * se);
    }
}
