#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "codepoison/language.hpp"
#include "codepoison/lexer.hpp"
#include "codepoison/operators.hpp"

namespace codepoison {

enum class StatementKind { Simple, ControlHeader, BlockOpen, BlockClose, Other };

constexpr std::string_view to_string(StatementKind kind) {
  switch (kind) {
    case StatementKind::Simple: return "simple";
    case StatementKind::ControlHeader: return "header";
    case StatementKind::BlockOpen: return "open";
    case StatementKind::BlockClose: return "close";
    case StatementKind::Other: return "other";
  }
  return "other";
}

struct OperatorSite {
  std::size_t offset = 0;
  std::string op;

  bool operator==(const OperatorSite&) const = default;
};

struct Statement {
  std::size_t index = 0;
  std::size_t begin = 0;  // byte span [begin, end)
  std::size_t end = 0;
  StatementKind kind = StatementKind::Other;
  std::vector<OperatorSite> operator_sites;
  // Token range [first_token, last_token) into SourceUnit::tokens(); empty
  // when the unit fell back to line segmentation.
  std::size_t first_token = 0;
  std::size_t last_token = 0;
  // Block nesting depth (indentation level for Python) at this statement.
  int depth = 0;

  bool operator==(const Statement&) const = default;
};

class SourceUnit;
SourceUnit parse_source(std::string text, Language language);

// Parsed code: an ordered, non-overlapping sequence of statement spans over
// the original bytes. Immutable once built; only parse_source constructs one.
class SourceUnit {
 public:
  Language language() const { return language_; }
  const std::string& text() const { return text_; }
  const std::vector<Statement>& statements() const { return statements_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  bool parse_ok() const { return parse_ok_; }
  const std::string& parse_error() const { return parse_error_; }
  std::size_t size() const { return statements_.size(); }

  std::string_view statement_text(std::size_t i) const {
    const Statement& s = statements_.at(i);
    return std::string_view(text_).substr(s.begin, s.end - s.begin);
  }

  std::string_view token_text(std::size_t tok) const {
    return codepoison::token_text(text_, tokens_.at(tok));
  }

  std::string_view first_word(std::size_t i) const {
    const Statement& s = statements_.at(i);
    if (s.first_token < s.last_token) return token_text(s.first_token);
    std::string_view t = statement_text(i);
    std::size_t e = 0;
    while (e < t.size() && detail::is_ident_char(static_cast<unsigned char>(t[e]))) ++e;
    return t.substr(0, e);
  }

  // Whitespace-insensitive token list of one statement (comments excluded).
  std::vector<std::string> statement_tokens(std::size_t i) const {
    const Statement& s = statements_.at(i);
    std::vector<std::string> out;
    if (s.first_token < s.last_token) {
      for (std::size_t t = s.first_token; t < s.last_token; ++t) out.emplace_back(token_text(t));
      return out;
    }
    return normalized_tokens(statement_text(i), language_);
  }

 private:
  friend SourceUnit parse_source(std::string text, Language language);

  Language language_ = Language::Java;
  std::string text_;
  std::vector<Statement> statements_;
  std::vector<Token> tokens_;
  bool parse_ok_ = true;
  std::string parse_error_;
};

// Rebuilds the text from statement spans and the gaps between them.
inline std::string reconstruct(const SourceUnit& unit) {
  std::string out;
  std::size_t cursor = 0;
  const std::string& text = unit.text();
  for (const Statement& s : unit.statements()) {
    out.append(text, cursor, s.begin - cursor);
    out.append(text, s.begin, s.end - s.begin);
    cursor = s.end;
  }
  out.append(text, cursor, std::string::npos);
  return out;
}

namespace detail {

inline std::size_t line_start(std::string_view text, std::size_t pos) {
  while (pos > 0 && text[pos - 1] != '\n') --pos;
  return pos;
}

inline std::size_t line_end(std::string_view text, std::size_t pos) {
  const std::size_t nl = text.find('\n', pos);
  return nl == std::string_view::npos ? text.size() : nl;
}

inline bool all_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

inline std::size_t indent_width(std::string_view ws) {
  std::size_t w = 0;
  for (char c : ws) w = c == '\t' ? (w / 8 + 1) * 8 : w + 1;
  return w;
}

struct Segmenter {
  std::string_view text;
  Language lang;
  const std::vector<Token>& toks;
  std::vector<Statement> out;
  bool ok = true;
  std::string error;

  Segmenter(std::string_view t, Language l, const std::vector<Token>& k) : text(t), lang(l), toks(k) {}

  std::string_view tx(std::size_t i) const { return token_text(text, toks[i]); }
  bool is_kw(std::size_t i, std::string_view w) const {
    return toks[i].kind == TokenKind::Keyword && tx(i) == w;
  }

  void fail(std::string message) {
    if (ok) {
      ok = false;
      error = std::move(message);
    }
  }

  void emit(std::size_t first, std::size_t last, StatementKind kind, int depth) {
    Statement s;
    s.index = out.size();
    s.begin = toks[first].begin;
    s.end = toks[last - 1].end;
    s.kind = kind;
    s.first_token = first;
    s.last_token = last;
    s.depth = depth;
    out.push_back(std::move(s));
  }

  // ---------------------------------------------------------------- brace
  static bool in(std::string_view w, std::initializer_list<std::string_view> set) {
    return std::find(set.begin(), set.end(), w) != set.end();
  }

  bool is_control_word(std::string_view w) const {
    return in(w, {"if", "else", "for", "foreach", "while", "do", "switch", "try", "catch", "finally",
                  "synchronized", "using", "lock", "unsafe", "fixed", "checked", "unchecked", "select",
                  "with", "elseif"});
  }

  bool block_brace(std::size_t first, std::size_t end) const {
    if (first >= end) return true;
    const std::string_view f = tx(first);
    if (toks[first].kind == TokenKind::Keyword &&
        (is_control_word(f) || in(f, {"namespace", "class", "interface", "enum", "struct", "func", "type"}))) {
      return true;
    }
    if (end - first == 1 && in(f, {"static", "get", "set", "init", "add", "remove"})) return true;
    int depth = 0;
    bool decl_keyword = false;
    bool punct = false;
    for (std::size_t i = first; i < end; ++i) {
      const std::string_view w = tx(i);
      if (w == "(" || w == "[") ++depth;
      else if (w == ")" || w == "]") --depth;
      if (depth != 0) continue;
      if (toks[i].kind == TokenKind::Operator &&
          in(w, {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=", ":=", "?\?=", "=>", "->"})) {
        return false;
      }
      if (toks[i].kind == TokenKind::Keyword && in(w, {"return", "throw", "yield", "await", "new", "go", "defer"})) {
        return false;
      }
      if (toks[i].kind == TokenKind::Keyword &&
          in(w, {"class", "interface", "enum", "struct", "namespace", "record", "trait", "function", "func"})) {
        decl_keyword = true;
      }
      if (w == "?" || w == ":" || w == ",") punct = true;
    }
    if (decl_keyword) return true;
    if (punct) return false;
    const Token& last = toks[end - 1];
    const std::string_view lw = tx(end - 1);
    return lw == ")" || lw == ">" || last.kind == TokenKind::Identifier || last.kind == TokenKind::Keyword;
  }

  bool operand_end(std::size_t i) const {
    const Token& t = toks[i];
    const std::string_view w = tx(i);
    switch (t.kind) {
      case TokenKind::Identifier:
      case TokenKind::Number:
      case TokenKind::String:
      case TokenKind::Regex:
        return true;
      case TokenKind::Keyword:
        return in(w, {"this", "super", "true", "false", "null", "undefined", "nil", "None", "True", "False", "self"});
      case TokenKind::Operator:
        return w == ")" || w == "]" || w == "}" || w == "++" || w == "--";
      default:
        return false;
    }
  }

  // Automatic statement termination at a line break (Go and JavaScript).
  bool asi_before(std::size_t first, std::size_t i) const {
    const std::size_t prev = i - 1;
    const std::string_view pw = tx(prev);
    const std::string_view nw = tx(i);
    if (lang == Language::Go) {
      switch (toks[prev].kind) {
        case TokenKind::Identifier:
        case TokenKind::Number:
        case TokenKind::String:
          return true;
        case TokenKind::Keyword:
          return in(pw, {"break", "continue", "fallthrough", "return", "true", "false", "nil"});
        case TokenKind::Operator:
          return in(pw, {"++", "--", ")", "]", "}"});
        default:
          return false;
      }
    }
    // JavaScript
    if (toks[prev].kind == TokenKind::Keyword && in(pw, {"return", "break", "continue", "debugger"})) return true;
    if (!operand_end(prev)) return false;
    if (nw == "{") return false;
    if (nw == "++" || nw == "--") return true;
    if (toks[i].kind == TokenKind::Operator &&
        !in(nw, {"!", "~", "{", "}", ";"})) {
      return false;
    }
    if (toks[i].kind == TokenKind::Keyword && in(nw, {"instanceof", "in", "of"})) return false;
    // `if (x)` / `while (x)` followed by its body on the next line
    if (toks[first].kind == TokenKind::Keyword && in(tx(first), {"if", "for", "while", "with", "switch", "catch"})) {
      int depth = 0;
      for (std::size_t j = first + 1; j < i; ++j) {
        const std::string_view w = tx(j);
        if (w == "(") ++depth;
        else if (w == ")" && --depth == 0) return j != prev;
      }
      return false;
    }
    if (toks[first].kind == TokenKind::Keyword && i - first == 1 && in(tx(first), {"else", "do", "try", "finally"})) {
      return false;
    }
    return true;
  }

  StatementKind simple_or_other(std::size_t first) const {
    if (toks[first].kind == TokenKind::Keyword && is_control_word(tx(first))) return StatementKind::Other;
    if (tx(first) == ";") return StatementKind::Other;
    return StatementKind::Simple;
  }

  void segment_brace() {
    std::vector<char> stack;  // '(' '[' 'e' (expression brace) 'b' (block)
    int expr_depth = 0;
    int block_depth = 0;
    std::optional<std::size_t> first;
    const bool semicolon_lang = !(lang == Language::Go || lang == Language::JavaScript);

    auto flush = [&](std::size_t end, bool terminated) {
      if (!first) return;
      if (!terminated && semicolon_lang) fail("statement without terminator at byte " + std::to_string(toks[*first].begin));
      emit(*first, end, simple_or_other(*first), block_depth);
      first.reset();
    };

    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      const std::string_view w = tx(i);
      if (first && expr_depth == 0 && t.newline_before &&
          (lang == Language::Go || lang == Language::JavaScript) && asi_before(*first, i)) {
        flush(i, true);
      }
      if (t.kind == TokenKind::Directive) {
        if (!first) {
          emit(i, i + 1, StatementKind::Other, block_depth);
          continue;
        }
      }
      if (w == "{" && t.kind == TokenKind::Operator) {
        if (expr_depth == 0 && block_brace(first.value_or(i), i)) {
          if (first) {
            emit(*first, i, StatementKind::ControlHeader, block_depth);
            first.reset();
          }
          emit(i, i + 1, StatementKind::BlockOpen, block_depth);
          stack.push_back('b');
          ++block_depth;
        } else {
          if (!first) first = i;
          stack.push_back('e');
          ++expr_depth;
        }
        continue;
      }
      if (w == "}" && t.kind == TokenKind::Operator) {
        if (stack.empty()) {
          fail("unmatched '}' at byte " + std::to_string(t.begin));
          if (!first) first = i;
          continue;
        }
        if (stack.back() == 'e') {
          stack.pop_back();
          --expr_depth;
          continue;
        }
        if (stack.back() != 'b') {
          fail("mismatched '}' at byte " + std::to_string(t.begin));
          stack.pop_back();
          --expr_depth;
          continue;
        }
        flush(i, false);
        stack.pop_back();
        --block_depth;
        emit(i, i + 1, StatementKind::BlockClose, block_depth);
        continue;
      }
      if (!first) first = i;
      if (t.kind != TokenKind::Operator) continue;
      if (w == "(" || w == "[") {
        stack.push_back(w[0]);
        ++expr_depth;
      } else if (w == ")" || w == "]") {
        const char want = w == ")" ? '(' : '[';
        if (stack.empty() || stack.back() != want) {
          fail("mismatched '" + std::string(w) + "' at byte " + std::to_string(t.begin));
        } else {
          stack.pop_back();
          --expr_depth;
        }
      } else if (w == ";" && expr_depth == 0) {
        if (lang == Language::Go && toks[*first].kind == TokenKind::Keyword &&
            in(tx(*first), {"if", "for", "switch", "select"})) {
          continue;
        }
        flush(i + 1, true);
      } else if (w == ":" && expr_depth == 0 && toks[*first].kind == TokenKind::Keyword &&
                 in(tx(*first), {"case", "default"})) {
        emit(*first, i + 1, StatementKind::Other, block_depth);
        first.reset();
      }
    }
    if (first) flush(toks.size(), lang == Language::Go || lang == Language::JavaScript);
    if (!stack.empty()) fail("unclosed bracket at end of input");
    validate_brace_continuations();
  }

  void validate_brace_continuations() {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Statement& s = out[i];
      if (s.first_token >= s.last_token) continue;
      const std::string_view w = tx(s.first_token);
      if (toks[s.first_token].kind != TokenKind::Keyword || !in(w, {"else", "catch", "finally"})) continue;
      if (i == 0) {
        fail("'" + std::string(w) + "' without a preceding block");
        continue;
      }
      const Statement& p = out[i - 1];
      const bool braceless = p.kind == StatementKind::Other && p.first_token < p.last_token &&
                             in(tx(p.first_token), {"if", "else", "elseif"});
      if (p.kind != StatementKind::BlockClose && !braceless) {
        fail("'" + std::string(w) + "' without a preceding block");
      }
    }
  }

  // ---------------------------------------------------------------- python
  void segment_python() {
    int depth = 0;
    std::optional<std::size_t> first;
    auto flush = [&](std::size_t end) {
      if (!first) return;
      const std::size_t f = *first;
      const std::string_view fw = tx(f);
      StatementKind kind = StatementKind::Simple;
      const bool compound =
          (toks[f].kind == TokenKind::Keyword &&
           in(fw, {"if", "elif", "else", "for", "while", "try", "except", "finally", "with", "def", "class", "async"})) ||
          (toks[f].kind == TokenKind::Identifier && in(fw, {"match", "case"}) && end - f > 1 && tx(end - 1) == ":");
      if (compound) {
        kind = tx(end - 1) == ":" ? StatementKind::ControlHeader : StatementKind::Other;
      } else if (fw == "@") {
        kind = StatementKind::Other;
      }
      emit(f, end, kind, 0);
      first.reset();
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      const std::string_view w = tx(i);
      if (first && depth == 0 && t.newline_before) flush(i);
      if (!first) first = i;
      if (t.kind != TokenKind::Operator) continue;
      if (w == "(" || w == "[" || w == "{") {
        ++depth;
      } else if (w == ")" || w == "]" || w == "}") {
        if (--depth < 0) {
          fail("unmatched '" + std::string(w) + "'");
          depth = 0;
        }
      } else if (w == ";" && depth == 0) {
        flush(i + 1);
      }
    }
    flush(toks.size());
    if (depth != 0) fail("unclosed bracket at end of input");
    if (!check_bracket_nesting()) fail("mismatched brackets");
    validate_python_indentation();
  }

  bool check_bracket_nesting() const {
    std::vector<char> stack;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].kind != TokenKind::Operator) continue;
      const std::string_view w = tx(i);
      if (w == "(" || w == "[" || w == "{") {
        stack.push_back(w[0]);
      } else if (w == ")" || w == "]" || w == "}") {
        const char want = w == ")" ? '(' : (w == "]" ? '[' : '{');
        if (stack.empty() || stack.back() != want) return false;
        stack.pop_back();
      }
    }
    return stack.empty();
  }

  void validate_python_indentation() {
    std::vector<std::size_t> levels;
    std::vector<bool> level_has_compound;
    bool expect_deeper = false;
    int prev_depth = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      Statement& s = out[i];
      const std::size_t ls = line_start(text, s.begin);
      if (!all_blank(text.substr(ls, s.begin - ls))) {
        // shares a line with the previous statement
        if (expect_deeper) expect_deeper = false, levels.push_back(levels.back() + 1), level_has_compound.push_back(false);
        s.depth = prev_depth;
        continue;
      }
      const std::size_t w = indent_width(text.substr(ls, s.begin - ls));
      if (levels.empty()) {
        levels.push_back(w);
        level_has_compound.push_back(false);
      } else if (expect_deeper) {
        if (w <= levels.back()) {
          fail("expected an indented block at byte " + std::to_string(s.begin));
          return;
        }
        levels.push_back(w);
        level_has_compound.push_back(false);
        expect_deeper = false;
      } else if (w > levels.back()) {
        fail("unexpected indent at byte " + std::to_string(s.begin));
        return;
      } else {
        while (!levels.empty() && w < levels.back()) {
          levels.pop_back();
          level_has_compound.pop_back();
        }
        if (levels.empty() || w != levels.back()) {
          fail("unindent does not match any outer level at byte " + std::to_string(s.begin));
          return;
        }
      }
      const std::string_view fw = tx(s.first_token);
      const bool continuation = toks[s.first_token].kind == TokenKind::Keyword &&
                                in(fw, {"elif", "else", "except", "finally"});
      if (continuation && !level_has_compound.back()) {
        fail("'" + std::string(fw) + "' without a matching compound statement");
        return;
      }
      level_has_compound.back() =
          s.kind == StatementKind::ControlHeader || s.kind == StatementKind::Other;
      if (s.kind == StatementKind::ControlHeader) expect_deeper = true;
      s.depth = static_cast<int>(levels.size()) - 1;
      prev_depth = s.depth;
    }
    if (expect_deeper) fail("block header without a body");
  }

  // ---------------------------------------------------------------- ruby
  bool ruby_continues(std::size_t first, std::size_t prev, std::size_t next) const {
    const std::string_view pw = tx(prev);
    const std::string_view nw = tx(next);
    if (nw == "." || nw == "&.") return true;
    if (toks[prev].kind == TokenKind::Keyword) return in(pw, {"and", "or", "not"});
    if (toks[prev].kind != TokenKind::Operator) return false;
    if (in(pw, {")", "]", "}"})) return false;
    if (pw == "|") {
      // closing pipe of a block parameter list
      std::size_t pipes = 0;
      for (std::size_t j = prev + 1; j-- > first;) {
        const std::string_view w = tx(j);
        if (w == "|") ++pipes;
        if ((toks[j].kind == TokenKind::Keyword && w == "do") || w == "{") return pipes % 2 == 1;
      }
      return true;
    }
    return true;
  }

  int ruby_opens(std::size_t first, std::size_t end) const {
    int opens = 0;
    bool loop_do_pending = toks[first].kind == TokenKind::Keyword && in(tx(first), {"while", "until", "for"});
    for (std::size_t j = first; j < end; ++j) {
      if (toks[j].kind != TokenKind::Keyword) continue;
      const std::string_view w = tx(j);
      const bool leading = j == first || in(tx(j - 1), {"=", "(", ",", "[", "||=", "+=", "-=", "=>", "<<"});
      if (in(w, {"def", "begin", "case"})) {
        ++opens;
      } else if (in(w, {"class", "module"})) {
        if (leading) ++opens;
      } else if (in(w, {"if", "unless", "while", "until"})) {
        if (leading) ++opens;
      } else if (w == "for") {
        if (j == first) ++opens;
      } else if (w == "do") {
        if (loop_do_pending) loop_do_pending = false;
        else ++opens;
      } else if (w == "end") {
        --opens;
      }
    }
    return opens;
  }

  void segment_ruby() {
    int bracket = 0;
    int depth = 0;
    std::optional<std::size_t> first;
    auto flush = [&](std::size_t end) {
      if (!first) return;
      const std::size_t f = *first;
      const std::string_view fw = tx(f);
      const int opens = ruby_opens(f, end);
      StatementKind kind = StatementKind::Simple;
      int at_depth = depth;
      if (toks[f].kind == TokenKind::Keyword && fw == "end") {
        kind = StatementKind::BlockClose;
        at_depth = depth + opens;
      } else if (toks[f].kind == TokenKind::Keyword && in(fw, {"else", "elsif", "when", "rescue", "ensure"})) {
        kind = StatementKind::ControlHeader;
        at_depth = depth - 1;
        if (depth <= 0) fail("'" + std::string(fw) + "' outside a block");
      } else if (opens > 0) {
        kind = StatementKind::ControlHeader;
      } else if (opens < 0) {
        kind = StatementKind::Other;  // e.g. `x end` closing a one-line def
      } else if (toks[f].kind == TokenKind::Keyword &&
                 in(fw, {"if", "unless", "while", "until", "for", "case", "begin", "def", "class", "module"})) {
        kind = StatementKind::Other;
      }
      depth += opens;
      if (depth < 0) {
        fail("'end' without an open block");
        depth = 0;
      }
      emit(f, end, kind, std::max(at_depth, 0));
      first.reset();
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      const std::string_view w = tx(i);
      if (first && bracket == 0 && t.newline_before && !ruby_continues(*first, i - 1, i)) flush(i);
      if (!first) first = i;
      if (t.kind != TokenKind::Operator) continue;
      if (w == "(" || w == "[" || w == "{") {
        ++bracket;
      } else if (w == ")" || w == "]" || w == "}") {
        if (--bracket < 0) {
          fail("unmatched '" + std::string(w) + "'");
          bracket = 0;
        }
      } else if (w == ";" && bracket == 0) {
        flush(i + 1);
      }
    }
    flush(toks.size());
    if (bracket != 0 || !check_bracket_nesting()) fail("unbalanced brackets");
    if (depth != 0) fail("missing 'end'");
  }
};

inline bool is_binary_context(const std::vector<Token>& toks, std::string_view text, std::size_t first,
                              std::size_t i, Language lang) {
  if (i == first) return false;
  const Token& p = toks[i - 1];
  const std::string_view pw = token_text(text, p);
  switch (p.kind) {
    case TokenKind::Identifier:
    case TokenKind::Number:
    case TokenKind::String:
    case TokenKind::Regex:
      break;
    case TokenKind::Keyword: {
      static const std::unordered_set<std::string_view> operand = {
          "this", "super", "true", "false", "null", "undefined", "nil", "None", "True", "False", "self", "end"};
      if (!operand.count(pw)) return false;
      break;
    }
    case TokenKind::Operator:
      if (pw != ")" && pw != "]" && pw != "}" && pw != "++" && pw != "--") return false;
      break;
    default:
      return false;
  }
  const std::string_view w = token_text(text, toks[i]);
  if (w == "*") {
    const std::string_view fw = token_text(text, toks[first]);
    if (lang == Language::Go && (fw == "func" || fw == "var" || fw == "type")) return false;
    if (lang == Language::C && p.kind == TokenKind::Identifier && i >= 2) {
      const std::string_view pp = token_text(text, toks[i - 2]);
      if (pp == "struct" || pp == "union" || pp == "enum") return false;
    }
  }
  return true;
}

// Marks `<` / `>` tokens that delimit generic type arguments (Java, C#).
inline std::vector<bool> generic_brackets(const std::vector<Token>& toks, std::string_view text) {
  std::vector<bool> generic(toks.size(), false);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::Operator || token_text(text, toks[i]) != "<") continue;
    int depth = 1;
    std::string_view prev = "<";
    std::size_t j = i + 1;
    std::vector<std::size_t> closers;
    bool matched = false;
    for (; j < toks.size() && j - i < 64; ++j) {
      const Token& t = toks[j];
      const std::string_view w = token_text(text, t);
      if (t.kind == TokenKind::Identifier || t.kind == TokenKind::Keyword) {
        if (t.kind == TokenKind::Keyword && (w == "new" || w == "return" || w == "instanceof" || w == "true" ||
                                             w == "false" || w == "null" || w == "this")) {
          break;
        }
      } else if (t.kind == TokenKind::Operator) {
        if (w == "<") {
          ++depth;
        } else if (w == ">" || w == ">>" || w == ">>>") {
          depth -= static_cast<int>(w.size());
          if (w == ">") closers.push_back(j);
          if (depth <= 0) {
            matched = true;
            break;
          }
        } else if (w == "?") {
          if (prev != "<" && prev != ",") break;
        } else if (!(w == "," || w == "." || w == "[" || w == "]" || w == "&")) {
          break;
        }
      } else {
        break;
      }
      prev = w;
    }
    if (matched) {
      generic[i] = true;
      for (std::size_t c : closers) generic[c] = true;
    }
  }
  return generic;
}

inline void collect_operator_sites(std::string_view text, Language lang, const std::vector<Token>& toks,
                                   std::vector<Statement>& stmts) {
  std::vector<bool> generic;
  if (lang == Language::Java || lang == Language::CSharp) generic = generic_brackets(toks, text);
  for (Statement& s : stmts) {
    const bool ruby_class = lang == Language::Ruby && s.first_token < s.last_token &&
                            token_text(text, toks[s.first_token]) == "class";
    for (std::size_t i = s.first_token; i < s.last_token; ++i) {
      const Token& t = toks[i];
      if (t.kind != TokenKind::Operator) continue;
      const std::string_view w = token_text(text, t);
      if (!is_flippable(w)) continue;
      if (!generic.empty() && generic[i]) continue;
      if ((w == "+" || w == "-" || w == "*") && !is_binary_context(toks, text, s.first_token, i, lang)) continue;
      if (ruby_class && w == "<") continue;
      s.operator_sites.push_back(OperatorSite{t.begin, std::string(w)});
    }
  }
}

inline std::vector<Statement> line_segmentation(std::string_view text) {
  std::vector<Statement> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t le = line_end(text, pos);
    std::size_t b = pos;
    std::size_t e = le;
    while (b < e && (text[b] == ' ' || text[b] == '\t' || text[b] == '\r')) ++b;
    while (e > b && (text[e - 1] == ' ' || text[e - 1] == '\t' || text[e - 1] == '\r')) --e;
    if (b < e) {
      Statement s;
      s.index = out.size();
      s.begin = b;
      s.end = e;
      s.kind = StatementKind::Other;
      out.push_back(std::move(s));
    }
    pos = le + 1;
  }
  return out;
}

}  // namespace detail

inline SourceUnit parse_source(std::string text, Language language) {
  SourceUnit unit;
  unit.language_ = language;
  unit.text_ = std::move(text);
  LexResult lexed = lex(unit.text_, language);
  if (!lexed.ok) {
    unit.parse_ok_ = false;
    unit.parse_error_ = lexed.error + " at byte " + std::to_string(lexed.error_offset);
    unit.statements_ = detail::line_segmentation(unit.text_);
    return unit;
  }
  unit.tokens_ = std::move(lexed.tokens);
  detail::Segmenter seg(unit.text_, language, unit.tokens_);
  switch (syntax_family(language)) {
    case SyntaxFamily::Brace: seg.segment_brace(); break;
    case SyntaxFamily::Indent: seg.segment_python(); break;
    case SyntaxFamily::Keyword: seg.segment_ruby(); break;
  }
  if (!seg.ok) {
    unit.parse_ok_ = false;
    unit.parse_error_ = seg.error;
    unit.tokens_.clear();
    unit.statements_ = detail::line_segmentation(unit.text_);
    return unit;
  }
  unit.statements_ = std::move(seg.out);
  detail::collect_operator_sites(unit.text_, language, unit.tokens_, unit.statements_);
  return unit;
}

}  // namespace codepoison
