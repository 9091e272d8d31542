//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SEMFORGE_SYNTAX_HPP_
#define SEMFORGE_SYNTAX_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semforge {

enum class StatementKind {
  kRegression,  // lhs ~ rhs
  kLoading,     // lhs =~ rhs
  kCovariance,  // lhs ~~ rhs
  kTypeDecl,    // a, b is <tag>
};

enum class VariableType {
  kOrdinal,
};

struct Term {
  std::string name;
  std::optional<double> fixed;

  friend bool operator==(const Term &, const Term &) = default;
};

/**
 * One parsed line of a model description.
 *
 * Regression, loading and covariance statements carry a single lhs name;
 * covariance statements carry exactly one rhs term. Type declarations carry
 * the declared names in lhs and no rhs.
 */
struct Statement {
  StatementKind kind;
  std::vector<std::string> lhs;
  std::vector<Term> rhs;
  VariableType type = VariableType::kOrdinal;
  int line = 0;

  bool operator==(const Statement &other) const {
    return kind == other.kind && lhs == other.lhs && rhs == other.rhs
           && (kind != StatementKind::kTypeDecl || type == other.type);
  }
};

struct ModelDescription {
  std::vector<Statement> statements;

  bool empty() const noexcept { return statements.empty(); }

  bool operator==(const ModelDescription &other) const {
    return statements == other.statements;
  }
};

bool is_identifier(std::string_view name) noexcept;

std::string_view operator_symbol(StatementKind kind) noexcept;

/**
 * Parse a model description.
 *
 * One statement per line; `#` starts a comment. `a ~~ b + c` is expanded
 * into one covariance statement per rhs term. Throws SyntaxError carrying
 * the 1-based line number.
 */
ModelDescription parse_model(std::string_view text);

// Inverse of parse_model: one statement per line, fixed values printed with
// round-trip precision.
std::string serialize_model(const ModelDescription &desc);

}  // namespace semforge

#endif  // SEMFORGE_SYNTAX_HPP_
