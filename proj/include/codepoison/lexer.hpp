#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "codepoison/language.hpp"

namespace codepoison {

enum class TokenKind { Identifier, Keyword, Number, String, Regex, Operator, Directive };

struct Token {
  TokenKind kind = TokenKind::Identifier;
  std::size_t begin = 0;
  std::size_t end = 0;
  // A line break (outside strings) separates this token from the previous one.
  bool newline_before = false;
};

struct LexResult {
  std::vector<Token> tokens;
  bool ok = true;
  std::size_t error_offset = 0;
  std::string error;
};

namespace detail {

inline const std::unordered_set<std::string_view>& keywords(Language lang) {
  static const std::unordered_set<std::string_view> java = {
      "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
      "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally",
      "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface",
      "long", "native", "new", "package", "private", "protected", "public", "return", "short",
      "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
      "transient", "try", "void", "volatile", "while", "true", "false", "null", "var"};
  static const std::unordered_set<std::string_view> js = {
      "break", "case", "catch", "class", "const", "continue", "debugger", "default", "delete",
      "do", "else", "export", "extends", "finally", "for", "function", "if", "import", "in",
      "instanceof", "new", "return", "super", "switch", "this", "throw", "try", "typeof", "var",
      "void", "while", "with", "yield", "let", "static", "async", "await", "of", "true", "false",
      "null", "undefined"};
  static const std::unordered_set<std::string_view> python = {
      "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
      "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
      "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
      "try", "while", "with", "yield"};
  static const std::unordered_set<std::string_view> php = {
      "abstract", "and", "array", "as", "break", "callable", "case", "catch", "class", "clone",
      "const", "continue", "declare", "default", "do", "echo", "else", "elseif", "empty",
      "enddeclare", "endfor", "endforeach", "endif", "endswitch", "endwhile", "extends", "final",
      "finally", "fn", "for", "foreach", "function", "global", "goto", "if", "implements",
      "include", "include_once", "instanceof", "insteadof", "interface", "isset", "list", "match",
      "namespace", "new", "or", "print", "private", "protected", "public", "require",
      "require_once", "return", "static", "switch", "throw", "trait", "try", "unset", "use",
      "var", "while", "xor", "yield", "true", "false", "null"};
  static const std::unordered_set<std::string_view> go = {
      "break", "case", "chan", "const", "continue", "default", "defer", "else", "fallthrough",
      "for", "func", "go", "goto", "if", "import", "interface", "map", "package", "range",
      "return", "select", "struct", "switch", "type", "var", "true", "false", "nil"};
  static const std::unordered_set<std::string_view> ruby = {
      "BEGIN", "END", "alias", "and", "begin", "break", "case", "class", "def", "defined?", "do",
      "else", "elsif", "end", "ensure", "false", "for", "if", "in", "module", "next", "nil",
      "not", "or", "redo", "rescue", "retry", "return", "self", "super", "then", "true", "undef",
      "unless", "until", "when", "while", "yield"};
  static const std::unordered_set<std::string_view> c = {
      "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
      "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
      "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
      "union", "unsigned", "void", "volatile", "while", "NULL"};
  static const std::unordered_set<std::string_view> csharp = {
      "abstract", "as", "base", "bool", "break", "byte", "case", "catch", "char", "checked",
      "class", "const", "continue", "decimal", "default", "delegate", "do", "double", "else",
      "enum", "event", "explicit", "extern", "false", "finally", "fixed", "float", "for",
      "foreach", "goto", "if", "implicit", "in", "int", "interface", "internal", "is", "lock",
      "long", "namespace", "new", "null", "object", "operator", "out", "override", "params",
      "private", "protected", "public", "readonly", "ref", "return", "sbyte", "sealed", "short",
      "sizeof", "stackalloc", "static", "string", "struct", "switch", "this", "throw", "true",
      "try", "typeof", "uint", "ulong", "unchecked", "unsafe", "ushort", "using", "virtual",
      "void", "volatile", "while", "var"};
  switch (lang) {
    case Language::Java: return java;
    case Language::JavaScript: return js;
    case Language::Python: return python;
    case Language::PHP: return php;
    case Language::Go: return go;
    case Language::Ruby: return ruby;
    case Language::C: return c;
    case Language::CSharp: return csharp;
  }
  return java;
}

// Longest-first operator and punctuator table per language.
inline const std::vector<std::string_view>& operators(Language lang) {
  static const auto build = [](std::vector<std::string_view> ops) {
    std::stable_sort(ops.begin(), ops.end(),
                     [](std::string_view a, std::string_view b) { return a.size() > b.size(); });
    return ops;
  };
  static const std::vector<std::string_view> common = {
      "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
      "<<=", ">>=", "=", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "?",
      ":", ".", ",", ";", "(", ")", "[", "]", "{", "}"};
  static const auto with = [](std::vector<std::string_view> extra) {
    std::vector<std::string_view> all = common;
    all.insert(all.end(), extra.begin(), extra.end());
    return build(all);
  };
  static const std::vector<std::string_view> java =
      with({"&&", "||", "++", "--", "->", "::", ">>>", ">>>=", "...", "@"});
  static const std::vector<std::string_view> js =
      with({"&&", "||", "++", "--", "===", "!==", "=>", "**", "**=", "...", "?.", "??", "?\?=",
            "&&=", "||=", ">>>", ">>>=", "@", "#"});
  static const std::vector<std::string_view> python =
      with({"**", "**=", "//", "//=", "->", ":=", "@", "@=", "..."});
  static const std::vector<std::string_view> php =
      with({"&&", "||", "++", "--", "===", "!==", "=>", "->", "?->", "::", "**", "**=", ".=",
            "??", "?\?=", "<=>", "...", "@", "\\"});
  static const std::vector<std::string_view> go =
      with({"&&", "||", "++", "--", ":=", "<-", "&^", "&^=", "..."});
  static const std::vector<std::string_view> ruby =
      with({"&&", "||", "===", "=>", "->", "::", "**", "**=", "<=>", "=~", "!~", "..", "...",
            "&&=", "||=", "&."});
  static const std::vector<std::string_view> c =
      with({"&&", "||", "++", "--", "->", "..."});
  static const std::vector<std::string_view> csharp =
      with({"&&", "||", "++", "--", "=>", "->", "::", "??", "?\?=", "?.", "@"});
  switch (lang) {
    case Language::Java: return java;
    case Language::JavaScript: return js;
    case Language::Python: return python;
    case Language::PHP: return php;
    case Language::Go: return go;
    case Language::Ruby: return ruby;
    case Language::C: return c;
    case Language::CSharp: return csharp;
  }
  return java;
}

inline bool is_ident_start(unsigned char ch) {
  return std::isalpha(ch) != 0 || ch == '_' || ch >= 0x80;
}
inline bool is_ident_char(unsigned char ch) {
  return std::isalnum(ch) != 0 || ch == '_' || ch >= 0x80;
}

class Lexer {
 public:
  Lexer(std::string_view text, Language lang, bool lenient) : s_(text), lang_(lang), lenient_(lenient) {}

  LexResult run() {
    while (true) {
      skip_trivia();
      if (pos_ >= s_.size()) break;
      const std::size_t start = pos_;
      if (!lex_one()) {
        if (!lenient_) {
          result_.tokens.clear();
          return std::move(result_);
        }
        // Recover: swallow the rest of the line as one opaque token.
        pos_ = start;
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
        if (pos_ == start) ++pos_;
        push(TokenKind::String, start);
      }
    }
    return std::move(result_);
  }

 private:
  std::string_view s_;
  Language lang_;
  bool lenient_;
  std::size_t pos_ = 0;
  bool pending_newline_ = false;
  LexResult result_;

  bool slash_comments() const {
    return lang_ != Language::Python && lang_ != Language::Ruby;
  }
  bool hash_comments() const {
    return lang_ == Language::Python || lang_ == Language::Ruby || lang_ == Language::PHP;
  }
  bool at_line_start(std::size_t p) const {
    while (p > 0) {
      const char ch = s_[p - 1];
      if (ch == '\n') return true;
      if (ch != ' ' && ch != '\t' && ch != '\r') return false;
      --p;
    }
    return true;
  }

  void fail(std::size_t at, std::string message) {
    if (result_.ok) {
      result_.ok = false;
      result_.error_offset = at;
      result_.error = std::move(message);
    }
  }

  void push(TokenKind kind, std::size_t start) {
    result_.tokens.push_back(Token{kind, start, pos_, pending_newline_});
    pending_newline_ = false;
  }

  void skip_trivia() {
    while (pos_ < s_.size()) {
      const char ch = s_[pos_];
      if (ch == '\n') {
        pending_newline_ = true;
        ++pos_;
      } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\f' || ch == '\v') {
        ++pos_;
      } else if (ch == '\\' && pos_ + 1 < s_.size() &&
                 (s_[pos_ + 1] == '\n' || (s_[pos_ + 1] == '\r' && pos_ + 2 < s_.size() && s_[pos_ + 2] == '\n')) &&
                 (lang_ == Language::Python || lang_ == Language::Ruby || lang_ == Language::C)) {
        // explicit line continuation
        pos_ += s_[pos_ + 1] == '\n' ? 2 : 3;
      } else if (slash_comments() && s_.substr(pos_, 2) == "//") {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (slash_comments() && s_.substr(pos_, 2) == "/*") {
        const std::size_t close = s_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) {
          fail(pos_, "unterminated block comment");
          pos_ = s_.size();
          return;
        }
        if (s_.substr(pos_, close - pos_).find('\n') != std::string_view::npos) pending_newline_ = true;
        pos_ = close + 2;
      } else if (hash_comments() && ch == '#' && !(lang_ == Language::PHP && s_.substr(pos_, 2) == "#[")) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (lang_ == Language::Ruby && ch == '=' && s_.substr(pos_, 6) == "=begin" && at_line_start(pos_)) {
        const std::size_t close = s_.find("\n=end", pos_);
        if (close == std::string_view::npos) {
          fail(pos_, "unterminated =begin block");
          pos_ = s_.size();
          return;
        }
        pos_ = close + 5;
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
        pending_newline_ = true;
      } else {
        return;
      }
    }
  }

  // Previous significant token ends an operand (so `/` is division, not a regex).
  bool prev_is_operand() const {
    if (result_.tokens.empty()) return false;
    const Token& t = result_.tokens.back();
    const std::string_view text = s_.substr(t.begin, t.end - t.begin);
    switch (t.kind) {
      case TokenKind::Number:
      case TokenKind::String:
      case TokenKind::Regex:
        return true;
      case TokenKind::Identifier:
        return true;
      case TokenKind::Keyword:
        return text == "this" || text == "super" || text == "true" || text == "false" ||
               text == "null" || text == "undefined" || text == "self" || text == "nil" ||
               text == "end";
      case TokenKind::Operator:
        return text == ")" || text == "]" || text == "}";
      default:
        return false;
    }
  }

  bool lex_quoted(char quote, bool multiline, bool escapes) {
    // pos_ is at the opening quote
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < s_.size()) {
      const char ch = s_[pos_];
      if (escapes && ch == '\\') {
        pos_ += 2;
        continue;
      }
      if (ch == quote) {
        ++pos_;
        return true;
      }
      if (ch == '\n' && !multiline) {
        fail(start, "unterminated string literal");
        return false;
      }
      ++pos_;
    }
    fail(start, "unterminated string literal");
    return false;
  }

  bool lex_triple(std::string_view delim) {
    const std::size_t start = pos_;
    pos_ += 3;
    while (pos_ < s_.size()) {
      if (s_[pos_] == '\\') {
        pos_ += 2;
        continue;
      }
      if (s_.substr(pos_, 3) == delim) {
        pos_ += 3;
        return true;
      }
      ++pos_;
    }
    fail(start, "unterminated triple-quoted string");
    return false;
  }

  bool lex_template() {
    // JavaScript template literal with ${ } substitutions (which may nest strings).
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < s_.size()) {
      const char ch = s_[pos_];
      if (ch == '\\') {
        pos_ += 2;
        continue;
      }
      if (ch == '`') {
        ++pos_;
        return true;
      }
      if (ch == '$' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '{') {
        pos_ += 2;
        int depth = 1;
        while (pos_ < s_.size() && depth > 0) {
          const char c2 = s_[pos_];
          if (c2 == '{') {
            ++depth;
            ++pos_;
          } else if (c2 == '}') {
            --depth;
            ++pos_;
          } else if (c2 == '"' || c2 == '\'') {
            if (!lex_quoted(c2, false, true)) return false;
          } else if (c2 == '`') {
            if (!lex_template()) return false;
          } else {
            ++pos_;
          }
        }
        continue;
      }
      ++pos_;
    }
    fail(start, "unterminated template literal");
    return false;
  }

  bool lex_regex() {
    const std::size_t start = pos_;
    ++pos_;
    bool in_class = false;
    while (pos_ < s_.size()) {
      const char ch = s_[pos_];
      if (ch == '\n') {
        pos_ = start;
        return false;
      }
      if (ch == '\\') {
        pos_ += 2;
        continue;
      }
      if (ch == '[') in_class = true;
      if (ch == ']') in_class = false;
      if (ch == '/' && !in_class) {
        ++pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return true;
      }
      ++pos_;
    }
    pos_ = start;
    return false;
  }

  void lex_number() {
    const std::size_t start = pos_;
    bool hex = false;
    if (s_[pos_] == '0' && pos_ + 1 < s_.size() && (s_[pos_ + 1] == 'x' || s_[pos_ + 1] == 'X')) {
      hex = true;
      pos_ += 2;
    }
    bool seen_dot = false;
    while (pos_ < s_.size()) {
      const char ch = s_[pos_];
      if (is_ident_char(static_cast<unsigned char>(ch))) {
        if (!hex && (ch == 'e' || ch == 'E') && pos_ + 1 < s_.size() &&
            (s_[pos_ + 1] == '+' || s_[pos_ + 1] == '-')) {
          pos_ += 2;
          continue;
        }
        ++pos_;
      } else if (ch == '.' && !seen_dot && !hex && pos_ + 1 < s_.size() &&
                 std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
        seen_dot = true;
        ++pos_;
      } else if (ch == '.' && !seen_dot && !hex && pos_ > start &&
                 (pos_ + 1 >= s_.size() || !(s_[pos_ + 1] == '.' || is_ident_start(static_cast<unsigned char>(s_[pos_ + 1]))))) {
        // `1.` is a float literal in most languages
        seen_dot = true;
        ++pos_;
      } else {
        break;
      }
    }
    push(TokenKind::Number, start);
  }

  bool lex_one() {
    const std::size_t start = pos_;
    const char ch = s_[pos_];
    const auto uch = static_cast<unsigned char>(ch);

    // Preprocessor lines (C, C#) become a single directive token.
    if (ch == '#' && (lang_ == Language::C || lang_ == Language::CSharp) && at_line_start(pos_)) {
      while (pos_ < s_.size() && s_[pos_] != '\n') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
      }
      push(TokenKind::Directive, start);
      return true;
    }
    if (lang_ == Language::PHP && (s_.substr(pos_, 5) == "<?php" || s_.substr(pos_, 2) == "?>")) {
      pos_ += s_[pos_] == '<' ? 5 : 2;
      push(TokenKind::Directive, start);
      return true;
    }

    // String prefixes: Python r/b/f/u, C# @"..." and $"...".
    if (lang_ == Language::Python && is_ident_start(uch)) {
      std::size_t p = pos_;
      while (p < s_.size() && p - pos_ < 3 && std::string_view("rRbBfFuU").find(s_[p]) != std::string_view::npos) ++p;
      if (p > pos_ && p < s_.size() && (s_[p] == '"' || s_[p] == '\'')) {
        pos_ = p;
        return lex_python_string(start);
      }
    }
    if (lang_ == Language::CSharp && (ch == '@' || ch == '$')) {
      std::size_t p = pos_;
      bool verbatim = false;
      while (p < s_.size() && (s_[p] == '@' || s_[p] == '$') && p - pos_ < 2) {
        verbatim = verbatim || s_[p] == '@';
        ++p;
      }
      if (p < s_.size() && s_[p] == '"') {
        pos_ = p;
        if (verbatim) {
          ++pos_;
          while (pos_ < s_.size()) {
            if (s_[pos_] == '"') {
              if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '"') {
                pos_ += 2;
                continue;
              }
              ++pos_;
              push(TokenKind::String, start);
              return true;
            }
            ++pos_;
          }
          fail(start, "unterminated verbatim string");
          return false;
        }
        if (!lex_quoted('"', false, true)) return false;
        push(TokenKind::String, start);
        return true;
      }
    }

    if (is_ident_start(uch) || (ch == '$' && (lang_ == Language::PHP || lang_ == Language::JavaScript || lang_ == Language::Ruby || lang_ == Language::Java)) ||
        (ch == '@' && lang_ == Language::Ruby)) {
      ++pos_;
      while (pos_ < s_.size() && (is_ident_char(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '@' ||
                                  (s_[pos_] == '$' && lang_ != Language::Ruby && lang_ != Language::PHP))) {
        ++pos_;
      }
      if (lang_ == Language::Ruby && pos_ < s_.size() && (s_[pos_] == '?' || s_[pos_] == '!') &&
          !(pos_ + 1 < s_.size() && (s_[pos_ + 1] == '=' || s_[pos_ + 1] == ':'))) {
        ++pos_;
      }
      const std::string_view word = s_.substr(start, pos_ - start);
      const bool member = !result_.tokens.empty() && [&] {
        const Token& prev = result_.tokens.back();
        const std::string_view pt = s_.substr(prev.begin, prev.end - prev.begin);
        return pt == "." || pt == "->" || pt == "?." || pt == "&." || pt == "?->";
      }();
      push(!member && keywords(lang_).count(word) ? TokenKind::Keyword : TokenKind::Identifier, start);
      return true;
    }
    if (std::isdigit(uch) || (ch == '.' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) &&
                              !prev_is_operand())) {
      lex_number();
      return true;
    }

    if (ch == '"' || ch == '\'') {
      if (lang_ == Language::Python && s_.substr(pos_, 3) == std::string(3, ch)) {
        return lex_python_string(start);
      }
      const bool multiline = lang_ == Language::PHP || lang_ == Language::Ruby;
      if (!lex_quoted(ch, multiline, true)) return false;
      push(TokenKind::String, start);
      return true;
    }
    if (ch == '`' && (lang_ == Language::JavaScript || lang_ == Language::Go || lang_ == Language::Ruby)) {
      if (lang_ == Language::JavaScript) {
        if (!lex_template()) return false;
      } else if (!lex_quoted('`', true, lang_ == Language::Ruby)) {
        return false;
      }
      push(TokenKind::String, start);
      return true;
    }
    if (ch == ':' && lang_ == Language::Ruby && pos_ + 1 < s_.size() &&
        is_ident_start(static_cast<unsigned char>(s_[pos_ + 1])) && !prev_is_operand()) {
      // symbol literal
      ++pos_;
      while (pos_ < s_.size() && is_ident_char(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '?' || s_[pos_] == '!' || s_[pos_] == '=') &&
          !(pos_ + 1 < s_.size() && (s_[pos_ + 1] == '=' || s_[pos_ + 1] == '>' || s_[pos_ + 1] == '~'))) {
        ++pos_;
      }
      push(TokenKind::String, start);
      return true;
    }
    if (ch == '/' && (lang_ == Language::JavaScript || lang_ == Language::Ruby) && !prev_is_operand() &&
        s_.substr(pos_, 2) != "/=" ) {
      if (lex_regex()) {
        push(TokenKind::Regex, start);
        return true;
      }
    }

    for (std::string_view op : operators(lang_)) {
      if (s_.substr(pos_, op.size()) == op) {
        pos_ += op.size();
        push(TokenKind::Operator, start);
        return true;
      }
    }
    fail(start, std::string("unexpected character '") + ch + "'");
    return false;
  }

  bool lex_python_string(std::size_t start) {
    const char q = s_[pos_];
    bool ok;
    if (s_.substr(pos_, 3) == std::string(3, q)) {
      ok = lex_triple(s_.substr(pos_, 3));
    } else {
      ok = lex_quoted(q, false, true);
    }
    if (!ok) return false;
    push(TokenKind::String, start);
    return true;
  }
};

}  // namespace detail

inline LexResult lex(std::string_view text, Language lang) {
  return detail::Lexer(text, lang, false).run();
}

// Never fails: unlexable stretches become opaque tokens. Used for judging
// arbitrary model outputs.
inline LexResult lex_lenient(std::string_view text, Language lang) {
  return detail::Lexer(text, lang, true).run();
}

inline bool is_keyword(Language lang, std::string_view word) {
  return detail::keywords(lang).count(word) != 0;
}

inline std::string_view token_text(std::string_view source, const Token& tok) {
  return source.substr(tok.begin, tok.end - tok.begin);
}

// Whitespace-insensitive token view of a code string; comments are dropped.
inline std::vector<std::string> normalized_tokens(std::string_view text, Language lang) {
  const LexResult lexed = lex_lenient(text, lang);
  std::vector<std::string> out;
  out.reserve(lexed.tokens.size());
  for (const Token& t : lexed.tokens) out.emplace_back(token_text(text, t));
  return out;
}

}  // namespace codepoison
