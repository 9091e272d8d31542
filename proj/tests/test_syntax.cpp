//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <string>

#include <catch_amalgamated.hpp>

#include "semforge/error.hpp"
#include "semforge/random.hpp"
#include "semforge/syntax.hpp"
#include "support.hpp"

using namespace semforge;

namespace {

Statement stmt(StatementKind kind, std::string lhs, std::vector<Term> rhs) {
  return { kind, { std::move(lhs) }, std::move(rhs), VariableType::kOrdinal, 0 };
}

Term free_term(std::string name) { return { std::move(name), std::nullopt }; }
Term fixed_term(double v, std::string name) { return { std::move(name), v }; }

int error_line(std::string_view text) {
  try {
    parse_model(text);
  } catch (const SyntaxError &e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("regression with two regressors", "[syntax]") {
  const auto d = parse_model("eta3 ~ x1 + x2");
  REQUIRE(d.statements.size() == 1);
  CHECK(d.statements[0] == stmt(StatementKind::kRegression, "eta3",
                                { free_term("x1"), free_term("x2") }));
}

TEST_CASE("measurement statement", "[syntax]") {
  const auto d = parse_model("eta1 =~ y1 + y2 + y3");
  REQUIRE(d.statements.size() == 1);
  CHECK(d.statements[0]
        == stmt(StatementKind::kLoading, "eta1",
                { free_term("y1"), free_term("y2"), free_term("y3") }));
}

TEST_CASE("covariance statements", "[syntax]") {
  const auto d = parse_model("x1 ~~ x2\neta ~~ x3\n");
  REQUIRE(d.statements.size() == 2);
  CHECK(d.statements[0]
        == stmt(StatementKind::kCovariance, "x1", { free_term("x2") }));
  CHECK(d.statements[1]
        == stmt(StatementKind::kCovariance, "eta", { free_term("x3") }));
}

TEST_CASE("fixed-value prefixes", "[syntax]") {
  const auto d = parse_model("eta ~ 1*x1 + x2 \n"
                             "eta =~ 2*y1 + y2 + y3 \n"
                             "x1 ~~ 5*x2\n");
  REQUIRE(d.statements.size() == 3);
  CHECK(d.statements[0] == stmt(StatementKind::kRegression, "eta",
                                { fixed_term(1, "x1"), free_term("x2") }));
  CHECK(d.statements[1] == stmt(StatementKind::kLoading, "eta",
                                { fixed_term(2, "y1"), free_term("y2"),
                                  free_term("y3") }));
  CHECK(d.statements[2]
        == stmt(StatementKind::kCovariance, "x1", { fixed_term(5, "x2") }));
}

TEST_CASE("type declaration", "[syntax]") {
  const auto d = parse_model("y1, y2 is ordinal");
  REQUIRE(d.statements.size() == 1);
  const Statement &st = d.statements[0];
  CHECK(st.kind == StatementKind::kTypeDecl);
  CHECK(st.lhs == std::vector<std::string> { "y1", "y2" });
  CHECK(st.rhs.empty());
  CHECK(st.type == VariableType::kOrdinal);
}

TEST_CASE("example model with comments", "[syntax]") {
  const auto d = parse_model(testing::kExampleModel);
  REQUIRE(d.statements.size() == 11);
  CHECK(d.statements[3]
        == stmt(StatementKind::kRegression, "x4", { free_term("eta4") }));
  CHECK(d.statements[2]
        == stmt(StatementKind::kRegression, "x3",
                { free_term("eta1"), free_term("eta2"), free_term("x1"),
                  free_term("x4") }));
  CHECK(d.statements[6]
        == stmt(StatementKind::kLoading, "eta2", { free_term("y3") }));
  CHECK(d.statements[10]
        == stmt(StatementKind::kCovariance, "y5", { free_term("y6") }));
  CHECK(d.statements[0].line == 2);
  CHECK(d.statements[10].line == 14);
}

TEST_CASE("covariance with several terms expands", "[syntax]") {
  const auto d = parse_model("a ~~ b + 2*c");
  REQUIRE(d.statements.size() == 2);
  CHECK(d.statements[0]
        == stmt(StatementKind::kCovariance, "a", { free_term("b") }));
  CHECK(d.statements[1]
        == stmt(StatementKind::kCovariance, "a", { fixed_term(2, "c") }));
}

TEST_CASE("blank input and whitespace", "[syntax]") {
  CHECK(parse_model("").empty());
  CHECK(parse_model("\n  # only a comment\n\t\n").empty());
  const auto d = parse_model("  y  ~x   +  0.5 * z  # trailing\n");
  REQUIRE(d.statements.size() == 1);
  CHECK(d.statements[0] == stmt(StatementKind::kRegression, "y",
                                { free_term("x"), fixed_term(0.5, "z") }));
}

TEST_CASE("negative and scientific prefixes", "[syntax]") {
  const auto d = parse_model("y ~ -1.5*x + 1e-3*z");
  CHECK(d.statements[0].rhs[0].fixed == -1.5);
  CHECK(d.statements[0].rhs[1].fixed == 1e-3);
}

TEST_CASE("syntax errors carry the line number", "[syntax]") {
  CHECK(error_line("a ~ b\n\nx1 ~ eta1 +\n") == 3);
  CHECK(error_line("y ~ abc*x") == 1);
  CHECK(error_line("a ~ b\na ~ ~ b") == 2);
  CHECK(error_line("a b c") == 1);
  CHECK(error_line("a ~") == 1);
  CHECK(error_line("~ b") == 1);
  CHECK(error_line("a + b ~ c") == 1);
  CHECK(error_line("y1 is binary") == 1);
  CHECK(error_line("y ~ 2*") == 1);
  CHECK(error_line("y ~ x + + z") == 1);
}

TEST_CASE("duplicate statements are rejected", "[syntax]") {
  CHECK(error_line("y ~ x\ny ~ x") == 2);
  CHECK(error_line("a ~~ b\nb ~~ a") == 2);
  CHECK_NOTHROW(parse_model("y ~ x\ny ~~ x"));
}

TEST_CASE("identifier rules", "[syntax]") {
  CHECK(is_identifier("eta_1"));
  CHECK(is_identifier("_x"));
  CHECK_FALSE(is_identifier("1x"));
  CHECK_FALSE(is_identifier(""));
  CHECK_FALSE(is_identifier("a-b"));
}

TEST_CASE("serialize then parse is the identity", "[syntax][property]") {
  Rng rng(20260101);
  for (int i = 0; i < 1000; ++i) {
    const ModelDescription d = testing::random_description(rng);
    const std::string text = serialize_model(d);
    INFO(text);
    REQUIRE(parse_model(text) == d);
    REQUIRE(serialize_model(parse_model(text)) == text);
  }
}
