#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codepoison/source_unit.hpp"

namespace codepoison {

// Result of folding a literal expression. `known` is false whenever the value
// depends on anything other than literals and the sqrt/sin/cos intrinsics.
struct Folded {
  bool known = false;
  bool is_bool = false;
  double num = 0.0;
  bool truth = false;

  static Folded unknown() { return {}; }
  static Folded number(double v) { return {true, false, v, false}; }
  static Folded boolean(bool b) { return {true, true, 0.0, b}; }
};

inline constexpr double kFoldMargin = 1e-9;

namespace detail {

class Folder {
 public:
  explicit Folder(const std::vector<std::string>& toks) : t_(toks) {}

  Folded run() {
    Folded v = parse_or();
    if (pos_ != t_.size()) return Folded::unknown();
    return v;
  }

  // Name of the first call whose callee is not an intrinsic, if any.
  const std::string& unknown_function() const { return unknown_fn_; }

 private:
  bool at(std::string_view s) const { return pos_ < t_.size() && t_[pos_] == s; }
  bool eat(std::string_view s) {
    if (!at(s)) return false;
    ++pos_;
    return true;
  }

  Folded parse_or() {
    Folded a = parse_and();
    while (at("||") || at("or")) {
      ++pos_;
      Folded b = parse_and();
      a = logic(a, b, false);
    }
    return a;
  }

  Folded parse_and() {
    Folded a = parse_not();
    while (at("&&") || at("and")) {
      ++pos_;
      Folded b = parse_not();
      a = logic(a, b, true);
    }
    return a;
  }

  Folded parse_not() {
    if (eat("not")) {
      Folded v = parse_not();
      if (!v.known || !v.is_bool) return Folded::unknown();
      return Folded::boolean(!v.truth);
    }
    return parse_cmp();
  }

  static Folded logic(const Folded& a, const Folded& b, bool conj) {
    // No short-circuit shortcut: a condition that mentions any runtime value
    // stays unknown even if one side alone would decide it.
    if (!a.known || !b.known || !a.is_bool || !b.is_bool) return Folded::unknown();
    return Folded::boolean(conj ? (a.truth && b.truth) : (a.truth || b.truth));
  }

  Folded parse_cmp() {
    Folded a = parse_add();
    static const std::vector<std::string_view> ops = {"<", "<=", ">", ">=", "==", "!=", "===", "!=="};
    for (auto op : ops) {
      if (!at(op)) continue;
      ++pos_;
      Folded b = parse_add();
      if (!a.known || !b.known || a.is_bool || b.is_bool) return Folded::unknown();
      const double d = a.num - b.num;
      const bool below = d < -kFoldMargin;
      const bool above = d > kFoldMargin;
      if (!below && !above) return Folded::unknown();  // too close to call
      if (op == "<" || op == "<=") return Folded::boolean(below);
      if (op == ">" || op == ">=") return Folded::boolean(above);
      if (op == "==" || op == "===") return Folded::boolean(false);
      return Folded::boolean(true);
    }
    return a;
  }

  Folded parse_add() {
    Folded a = parse_mul();
    while (at("+") || at("-")) {
      const bool plus = t_[pos_] == "+";
      ++pos_;
      Folded b = parse_mul();
      if (!a.known || !b.known || a.is_bool || b.is_bool) {
        a = Folded::unknown();
        continue;
      }
      a = Folded::number(plus ? a.num + b.num : a.num - b.num);
    }
    return a;
  }

  Folded parse_mul() {
    Folded a = parse_unary();
    while (at("*") || at("/")) {
      const bool times = t_[pos_] == "*";
      const bool lhs_int = last_int_;
      ++pos_;
      const bool rhs_int = pos_ < t_.size() && is_integer_literal(t_[pos_]);
      Folded b = parse_unary();
      if (!a.known || !b.known || a.is_bool || b.is_bool) {
        a = Folded::unknown();
        continue;
      }
      if (!times) {
        // integer division semantics differ by language; refuse to guess
        if ((lhs_int && rhs_int) || b.num == 0.0) {
          a = Folded::unknown();
          continue;
        }
        a = Folded::number(a.num / b.num);
      } else {
        a = Folded::number(a.num * b.num);
      }
      last_int_ = false;
    }
    return a;
  }

  Folded parse_unary() {
    if (eat("-")) {
      Folded v = parse_unary();
      if (!v.known || v.is_bool) return Folded::unknown();
      return Folded::number(-v.num);
    }
    if (eat("+")) {
      Folded v = parse_unary();
      if (!v.known || v.is_bool) return Folded::unknown();
      return v;
    }
    if (eat("!")) {
      Folded v = parse_unary();
      if (!v.known || !v.is_bool) return Folded::unknown();
      return Folded::boolean(!v.truth);
    }
    return parse_primary();
  }

  static bool is_integer_literal(std::string_view s) {
    if (s.empty() || !std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    return s.find_first_of(".eE") == std::string_view::npos || (s.size() > 1 && (s[1] == 'x' || s[1] == 'X'));
  }

  static std::optional<double> parse_number(std::string_view s) {
    std::string clean;
    for (char c : s) {
      if (c == '_') continue;
      clean += c;
    }
    while (!clean.empty() && std::string_view("fFdDlLuUmM").find(clean.back()) != std::string_view::npos &&
           !(clean.size() > 1 && (clean[1] == 'x' || clean[1] == 'X'))) {
      clean.pop_back();
    }
    if (clean.empty()) return std::nullopt;
    try {
      std::size_t used = 0;
      double v = 0;
      if (clean.size() > 2 && clean[0] == '0' && (clean[1] == 'x' || clean[1] == 'X')) {
        v = static_cast<double>(std::stoull(clean, &used, 16));
      } else {
        v = std::stod(clean, &used);
      }
      if (used != clean.size()) return std::nullopt;
      return v;
    } catch (...) {
      return std::nullopt;
    }
  }

  static std::optional<double (*)(double)> intrinsic(std::string_view name) {
    if (name == "sqrt" || name == "Sqrt") return static_cast<double (*)(double)>(std::sqrt);
    if (name == "sin" || name == "Sin") return static_cast<double (*)(double)>(std::sin);
    if (name == "cos" || name == "Cos") return static_cast<double (*)(double)>(std::cos);
    return std::nullopt;
  }

  Folded parse_primary() {
    last_int_ = false;
    if (pos_ >= t_.size()) return Folded::unknown();
    const std::string& tok = t_[pos_];
    if (eat("(")) {
      Folded v = parse_or();
      if (!eat(")")) return Folded::unknown();
      return v;
    }
    if (tok == "true" || tok == "True") {
      ++pos_;
      return Folded::boolean(true);
    }
    if (tok == "false" || tok == "False") {
      ++pos_;
      return Folded::boolean(false);
    }
    if (std::isdigit(static_cast<unsigned char>(tok[0])) ||
        (tok[0] == '.' && tok.size() > 1 && std::isdigit(static_cast<unsigned char>(tok[1])))) {
      ++pos_;
      auto v = parse_number(tok);
      if (!v) return Folded::unknown();
      last_int_ = is_integer_literal(tok);
      return Folded::number(*v);
    }
    // Math.sqrt(x) / math.Sin(x) / sqrt(x)
    std::string callee;
    std::size_t p = pos_;
    if (p + 2 < t_.size() && (t_[p] == "Math" || t_[p] == "math") && t_[p + 1] == ".") {
      callee = t_[p + 2];
      p += 3;
    } else if (std::isalpha(static_cast<unsigned char>(tok[0])) || tok[0] == '_') {
      callee = tok;
      p += 1;
    }
    if (!callee.empty() && p < t_.size() && t_[p] == "(") {
      auto fn = intrinsic(callee);
      pos_ = p + 1;
      Folded arg = parse_or();
      if (!eat(")")) return Folded::unknown();
      if (!fn) {
        if (unknown_fn_.empty()) unknown_fn_ = callee;
        return Folded::unknown();
      }
      if (!arg.known || arg.is_bool) return Folded::unknown();
      const double v = (*fn)(arg.num);
      if (std::isnan(v)) return Folded::unknown();
      return Folded::number(v);
    }
    // identifiers, member accesses, strings: runtime values
    skip_operand();
    return Folded::unknown();
  }

  void skip_operand() {
    ++pos_;
    int depth = 0;
    while (pos_ < t_.size()) {
      const std::string& s = t_[pos_];
      if (s == "(" || s == "[") {
        ++depth;
      } else if (s == ")" || s == "]") {
        if (depth == 0) return;
        --depth;
      } else if (depth == 0 && s != "." && s != "->" && s != "::" && s != "?." &&
                 !(pos_ > 0 && (t_[pos_ - 1] == "." || t_[pos_ - 1] == "->" || t_[pos_ - 1] == "::"))) {
        return;
      }
      ++pos_;
    }
  }

  const std::vector<std::string>& t_;
  std::size_t pos_ = 0;
  bool last_int_ = false;
  std::string unknown_fn_;
};

}  // namespace detail

struct FoldResult {
  Folded value;
  std::string unknown_function;  // non-empty when a non-intrinsic call appeared
};

inline FoldResult fold_tokens(const std::vector<std::string>& tokens) {
  detail::Folder f(tokens);
  FoldResult r;
  r.value = f.run();
  r.unknown_function = f.unknown_function();
  return r;
}

inline std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

enum class GuardKind { None, If, Assert };

// The condition-bearing construct a statement opens with, if any.
struct Guard {
  GuardKind kind = GuardKind::None;
  std::vector<std::string> condition;
  std::size_t begin = 0;  // byte span of the whole construct
  std::size_t end = 0;
};

namespace detail {

inline std::size_t construct_end(const SourceUnit& unit, std::size_t i) {
  const auto& st = unit.statements();
  const Statement& s = st[i];
  if (s.kind != StatementKind::ControlHeader) return s.end;
  const SyntaxFamily fam = syntax_family(unit.language());
  std::size_t j = i + 1;
  if (fam == SyntaxFamily::Brace) {
    if (j < st.size() && st[j].kind == StatementKind::BlockOpen) {
      const int d = st[j].depth;
      for (std::size_t k = j + 1; k < st.size(); ++k) {
        if (st[k].kind == StatementKind::BlockClose && st[k].depth == d) return st[k].end;
      }
    }
    return s.end;
  }
  if (fam == SyntaxFamily::Keyword) {
    for (std::size_t k = j; k < st.size(); ++k) {
      if (st[k].depth == s.depth && st[k].kind == StatementKind::BlockClose) return st[k].end;
    }
    return s.end;
  }
  std::size_t e = s.end;
  for (std::size_t k = j; k < st.size() && st[k].depth > s.depth; ++k) e = st[k].end;
  return e;
}

}  // namespace detail

inline Guard find_guard(const SourceUnit& unit, std::size_t i) {
  Guard g;
  const Statement& s = unit.statements().at(i);
  if (s.first_token >= s.last_token) return g;
  std::vector<std::string> tk;
  for (std::size_t t = s.first_token; t < s.last_token; ++t) tk.emplace_back(unit.token_text(t));
  const Language lang = unit.language();
  std::size_t p = 0;
  auto take_parens = [&](std::size_t open, bool first_arg_only) -> std::optional<std::vector<std::string>> {
    if (open >= tk.size() || tk[open] != "(") return std::nullopt;
    int depth = 0;
    std::vector<std::string> out;
    for (std::size_t k = open; k < tk.size(); ++k) {
      if (tk[k] == "(" || tk[k] == "[" || tk[k] == "{") ++depth;
      if (tk[k] == ")" || tk[k] == "]" || tk[k] == "}") {
        if (--depth == 0) return out;
      }
      if (k == open) continue;
      if (first_arg_only && depth == 1 && tk[k] == ",") {
        // rest of the argument list is a message
        int d2 = depth;
        for (std::size_t m = k + 1; m < tk.size(); ++m) {
          if (tk[m] == "(" || tk[m] == "[") ++d2;
          if (tk[m] == ")" || tk[m] == "]") {
            if (--d2 == 0) return out;
          }
        }
        return std::nullopt;
      }
      out.push_back(tk[k]);
    }
    return std::nullopt;
  };
  auto until = [&](std::size_t from, std::initializer_list<std::string_view> stops) {
    std::vector<std::string> out;
    int depth = 0;
    for (std::size_t k = from; k < tk.size(); ++k) {
      if (depth == 0 && std::find(stops.begin(), stops.end(), tk[k]) != stops.end()) break;
      if (tk[k] == "(" || tk[k] == "[" || tk[k] == "{") ++depth;
      if (tk[k] == ")" || tk[k] == "]" || tk[k] == "}") --depth;
      out.push_back(tk[k]);
    }
    return out;
  };

  if (tk[p] == "else" && p + 1 < tk.size() && tk[p + 1] == "if") p += 1;
  if (tk[p] == "if" || tk[p] == "elif" || tk[p] == "elsif" || tk[p] == "elseif") {
    g.kind = GuardKind::If;
    ++p;
    switch (syntax_family(lang)) {
      case SyntaxFamily::Indent:
        g.condition = until(p, {":"});
        break;
      case SyntaxFamily::Keyword:
        g.condition = until(p, {"then", ";"});
        break;
      case SyntaxFamily::Brace:
        if (lang == Language::Go) {
          g.condition = until(p, {"{"});
        } else if (auto c = take_parens(p, false)) {
          g.condition = *c;
        } else {
          g.kind = GuardKind::None;
        }
        break;
    }
  } else if (tk[p] == "assert") {
    g.kind = GuardKind::Assert;
    if (p + 1 < tk.size() && tk[p + 1] == "(" && (lang == Language::C || lang == Language::PHP)) {
      auto c = take_parens(p + 1, true);
      if (c) g.condition = *c;
      else g.kind = GuardKind::None;
    } else {
      g.condition = until(p + 1, {":", ",", ";"});
    }
  } else if (tk.size() > p + 3 && tk[p + 1] == "." &&
             ((tk[p] == "console" && tk[p + 2] == "assert") ||
              ((tk[p] == "Debug" || tk[p] == "Trace") && tk[p + 2] == "Assert"))) {
    g.kind = GuardKind::Assert;
    auto c = take_parens(p + 3, true);
    if (c) g.condition = *c;
    else g.kind = GuardKind::None;
  }
  if (g.kind != GuardKind::None) {
    g.begin = s.begin;
    g.end = detail::construct_end(unit, i);
  }
  return g;
}

}  // namespace codepoison
