//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "semforge/syntax.hpp"

#include <charconv>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "semforge/error.hpp"

namespace semforge {
namespace {
  bool is_ident_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  }

  bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
  }

  bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
  }

  std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front()))
      s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
      s.remove_suffix(1);
    return s;
  }

  class TermScanner {
  public:
    TermScanner(std::string_view text, int line): text_(text), line_(line) { }

    std::vector<Term> scan() {
      std::vector<Term> terms;
      skip_space();
      if (at_end())
        throw SyntaxError(line_, "missing right-hand side");

      while (true) {
        terms.push_back(scan_term());
        skip_space();
        if (at_end())
          break;
        if (peek() != '+')
          throw SyntaxError(line_, "unexpected '" + std::string(1, peek())
                                       + "' in right-hand side");
        ++pos_;
        skip_space();
        if (at_end())
          throw SyntaxError(line_, "dangling '+'");
      }
      return terms;
    }

  private:
    Term scan_term() {
      skip_space();
      if (peek() == '+')
        throw SyntaxError(line_, "dangling '+'");

      Term term;
      if (is_ident_start(peek())) {
        std::string_view ident = scan_identifier();
        skip_space();
        if (!at_end() && peek() == '*')
          throw SyntaxError(line_, "non-numeric fixed prefix '"
                                       + std::string(ident) + "'");
        term.name = ident;
        return term;
      }

      std::string_view number = scan_number();
      skip_space();
      if (at_end() || peek() != '*')
        throw SyntaxError(line_, "expected '*' after fixed value '"
                                     + std::string(number) + "'");
      ++pos_;
      skip_space();

      double value = 0;
      std::string_view digits = number;
      if (!digits.empty() && digits.front() == '+')
        digits.remove_prefix(1);
      auto [ptr, ec] = std::from_chars(digits.data(),
                                       digits.data() + digits.size(), value);
      if (digits.empty() || ec != std::errc()
          || ptr != digits.data() + digits.size() || !std::isfinite(value))
        throw SyntaxError(line_, "non-numeric fixed prefix '"
                                     + std::string(number) + "'");

      if (at_end() || !is_ident_start(peek()))
        throw SyntaxError(line_, "expected variable name after '*'");
      term.name = scan_identifier();
      term.fixed = value;
      return term;
    }

    std::string_view scan_identifier() {
      const size_t begin = pos_;
      while (!at_end() && is_ident_char(peek()))
        ++pos_;
      return text_.substr(begin, pos_ - begin);
    }

    std::string_view scan_number() {
      const size_t begin = pos_;
      while (!at_end()) {
        const char c = peek();
        const bool sign_ok = (c == '-' || c == '+')
                             && (pos_ == begin || text_[pos_ - 1] == 'e'
                                 || text_[pos_ - 1] == 'E');
        if ((c >= '0' && c <= '9') || c == '.' || c == 'e' || c == 'E'
            || sign_ok) {
          ++pos_;
        } else {
          break;
        }
      }
      if (pos_ == begin)
        throw SyntaxError(line_, "unexpected '" + std::string(1, peek())
                                     + "' in right-hand side");
      return text_.substr(begin, pos_ - begin);
    }

    void skip_space() {
      while (!at_end() && is_space(peek()))
        ++pos_;
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    std::string_view text_;
    size_t pos_ = 0;
    int line_;
  };

  std::string parse_lhs(std::string_view text, int line) {
    text = trim(text);
    if (text.empty())
      throw SyntaxError(line, "missing left-hand side");
    if (!is_identifier(text))
      throw SyntaxError(line, "left-hand side '" + std::string(text)
                                  + "' is not a single variable name");
    return std::string(text);
  }

  std::optional<Statement> parse_type_decl(std::string_view text, int line) {
    static const std::regex kDecl(
        R"(^\s*([A-Za-z_][A-Za-z0-9_]*(?:\s*,\s*[A-Za-z_][A-Za-z0-9_]*)*)\s+is\s+(\S+)\s*$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(text.begin(), text.end(), m, kDecl))
      return std::nullopt;

    const std::string tag = m[2].str();
    if (tag != "ordinal")
      throw SyntaxError(line, "unknown variable type '" + tag + "'");

    Statement st;
    st.kind = StatementKind::kTypeDecl;
    st.type = VariableType::kOrdinal;
    st.line = line;

    const std::string names = m[1].str();
    std::string_view rest = names;
    while (!rest.empty()) {
      const size_t comma = rest.find(',');
      st.lhs.emplace_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos)
        break;
      rest.remove_prefix(comma + 1);
    }
    return st;
  }

  void parse_line(std::string_view text, int line,
                  std::vector<Statement> &out) {
    const size_t op = text.find('~');
    if (op == std::string_view::npos) {
      if (auto decl = parse_type_decl(text, line)) {
        out.push_back(std::move(*decl));
        return;
      }
      throw SyntaxError(line, "expected one of '~', '=~', '~~' or 'is'");
    }

    StatementKind kind;
    std::string_view lhs_text, rhs_text;
    if (op > 0 && text[op - 1] == '=') {
      kind = StatementKind::kLoading;
      lhs_text = text.substr(0, op - 1);
      rhs_text = text.substr(op + 1);
    } else if (op + 1 < text.size() && text[op + 1] == '~') {
      kind = StatementKind::kCovariance;
      lhs_text = text.substr(0, op);
      rhs_text = text.substr(op + 2);
    } else {
      kind = StatementKind::kRegression;
      lhs_text = text.substr(0, op);
      rhs_text = text.substr(op + 1);
    }

    if (rhs_text.find_first_of("~=") != std::string_view::npos
        || lhs_text.find('=') != std::string_view::npos)
      throw SyntaxError(line, "malformed operator");

    std::string lhs = parse_lhs(lhs_text, line);
    std::vector<Term> rhs = TermScanner(rhs_text, line).scan();

    if (kind == StatementKind::kCovariance) {
      for (auto &term: rhs) {
        Statement st { kind, { lhs }, { std::move(term) } };
        st.line = line;
        out.push_back(std::move(st));
      }
      return;
    }

    Statement st { kind, { std::move(lhs) }, std::move(rhs) };
    st.line = line;
    out.push_back(std::move(st));
  }

  void check_duplicates(const std::vector<Statement> &statements) {
    std::set<std::tuple<StatementKind, std::string, std::string>> seen;
    for (const Statement &st: statements) {
      auto insert = [&](std::string a, std::string b) {
        if (!seen.emplace(st.kind, a, b).second) {
          std::string what = a;
          if (!b.empty())
            what += " " + std::string(operator_symbol(st.kind)) + " " + b;
          throw SyntaxError(st.line, "duplicate statement '" + what + "'");
        }
      };

      if (st.kind == StatementKind::kTypeDecl) {
        for (const auto &name: st.lhs)
          insert(name, "");
        continue;
      }
      for (const Term &term: st.rhs) {
        std::string a = st.lhs.front(), b = term.name;
        if (st.kind == StatementKind::kCovariance && b < a)
          std::swap(a, b);
        insert(std::move(a), std::move(b));
      }
    }
  }

  std::string format_value(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  }
}  // namespace

bool is_identifier(std::string_view name) noexcept {
  if (name.empty() || !is_ident_start(name.front()))
    return false;
  for (char c: name)
    if (!is_ident_char(c))
      return false;
  return true;
}

std::string_view operator_symbol(StatementKind kind) noexcept {
  switch (kind) {
  case StatementKind::kRegression:
    return "~";
  case StatementKind::kLoading:
    return "=~";
  case StatementKind::kCovariance:
    return "~~";
  case StatementKind::kTypeDecl:
    return "is";
  }
  return "";
}

ModelDescription parse_model(std::string_view text) {
  ModelDescription desc;
  int line = 0;
  while (!text.empty() || line == 0) {
    ++line;
    const size_t eol = text.find('\n');
    std::string_view raw = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view()
                                         : text.substr(eol + 1);

    if (const size_t hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    raw = trim(raw);
    if (!raw.empty())
      parse_line(raw, line, desc.statements);

    if (eol == std::string_view::npos)
      break;
  }

  check_duplicates(desc.statements);
  return desc;
}

std::string serialize_model(const ModelDescription &desc) {
  std::ostringstream os;
  for (const Statement &st: desc.statements) {
    if (st.kind == StatementKind::kTypeDecl) {
      for (size_t i = 0; i < st.lhs.size(); ++i)
        os << (i ? ", " : "") << st.lhs[i];
      os << " is ordinal\n";
      continue;
    }

    os << st.lhs.front() << ' ' << operator_symbol(st.kind) << ' ';
    for (size_t i = 0; i < st.rhs.size(); ++i) {
      if (i > 0)
        os << " + ";
      if (st.rhs[i].fixed)
        os << format_value(*st.rhs[i].fixed) << '*';
      os << st.rhs[i].name;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace semforge
