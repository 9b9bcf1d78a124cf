#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "codepoison/error.hpp"
#include "codepoison/source_unit.hpp"

namespace codepoison {

// A single splice against some text: erase `erase` bytes at `offset`, then
// insert `insert` there.
struct TextEdit {
  std::size_t offset = 0;
  std::size_t erase = 0;
  std::string insert;
};

inline std::string apply_edit(std::string_view text, const TextEdit& e) {
  std::string out;
  out.reserve(text.size() + e.insert.size());
  out.append(text.substr(0, e.offset));
  out.append(e.insert);
  out.append(text.substr(e.offset + e.erase));
  return out;
}

// Applies edits planned against the same original text. Edits must not
// overlap; they are spliced from the back so earlier offsets stay valid.
inline std::string apply_edits(std::string_view text, std::vector<TextEdit> edits) {
  std::sort(edits.begin(), edits.end(), [](const TextEdit& a, const TextEdit& b) {
    return a.offset != b.offset ? a.offset > b.offset : a.erase > b.erase;
  });
  std::string out(text);
  for (const auto& e : edits) out = apply_edit(out, e);
  return out;
}

// Inclusive range of statement indices [lo, hi] where a new statement may be
// placed. For a unit that is one function (header + body) this is the inside
// of the outermost body; otherwise the whole unit.
struct BodyRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool wrapped = false;
};

namespace detail {

inline bool opens_type_scope(const SourceUnit& u, std::size_t header) {
  const Statement& s = u.statements()[header];
  for (std::size_t t = s.first_token; t < s.last_token; ++t) {
    if (u.tokens()[t].kind != TokenKind::Keyword) continue;
    const std::string_view w = u.token_text(t);
    if (w == "class" || w == "interface" || w == "struct" || w == "namespace" || w == "trait" || w == "module" ||
        w == "enum" || w == "record") {
      return true;
    }
  }
  return false;
}

inline std::optional<BodyRange> wrapped_range(const SourceUnit& u, std::size_t lo, std::size_t hi_excl) {
  const auto& st = u.statements();
  if (hi_excl <= lo) return std::nullopt;
  switch (syntax_family(u.language())) {
    case SyntaxFamily::Brace: {
      std::size_t o = lo;
      while (o < hi_excl && st[o].kind != StatementKind::BlockOpen) {
        if (st[o].kind == StatementKind::Simple) return std::nullopt;
        ++o;
      }
      if (o == hi_excl || o == lo || st[o - 1].kind != StatementKind::ControlHeader) return std::nullopt;
      const int d = st[o].depth;
      std::size_t c = o + 1;
      while (c < hi_excl && !(st[c].kind == StatementKind::BlockClose && st[c].depth == d)) ++c;
      if (c + 1 != hi_excl) return std::nullopt;
      return BodyRange{o + 1, c, true};
    }
    case SyntaxFamily::Indent: {
      std::size_t h = lo;
      while (h < hi_excl && st[h].kind == StatementKind::Other && u.first_word(h) == "@") ++h;
      if (h >= hi_excl || st[h].kind != StatementKind::ControlHeader) return std::nullopt;
      const std::string_view w = u.first_word(h);
      if (w != "def" && w != "class" && w != "async") return std::nullopt;
      for (std::size_t k = h + 1; k < hi_excl; ++k) {
        if (st[k].depth <= st[h].depth) return std::nullopt;
      }
      return BodyRange{h + 1, hi_excl, true};
    }
    case SyntaxFamily::Keyword: {
      if (st[lo].kind != StatementKind::ControlHeader) return std::nullopt;
      const std::string_view w = u.first_word(lo);
      if (w != "def" && w != "class" && w != "module") return std::nullopt;
      const std::size_t c = hi_excl - 1;
      if (c <= lo || st[c].kind != StatementKind::BlockClose || st[c].depth != st[lo].depth) return std::nullopt;
      for (std::size_t k = lo + 1; k < c; ++k) {
        if (st[k].depth <= st[lo].depth) return std::nullopt;
      }
      return BodyRange{lo + 1, c, true};
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline BodyRange body_range(const SourceUnit& u) {
  BodyRange r{0, u.size(), false};
  std::size_t lo = 0;
  std::size_t hi_excl = u.size();
  // descend through class-like wrappers to the innermost single function
  for (int guard = 0; guard < 8; ++guard) {
    auto w = detail::wrapped_range(u, lo, hi_excl);
    if (!w) break;
    r = *w;
    std::size_t header = lo;
    while (header < w->lo && u.statements()[header].kind != StatementKind::ControlHeader) ++header;
    if (header >= w->lo || !detail::opens_type_scope(u, header)) break;
    lo = w->lo;
    hi_excl = w->hi;
  }
  return r;
}

namespace detail {

inline bool is_continuation_word(Language lang, std::string_view w) {
  switch (syntax_family(lang)) {
    case SyntaxFamily::Brace:
      return w == "else" || w == "catch" || w == "finally" || w == "case" || w == "default";
    case SyntaxFamily::Indent:
      return w == "elif" || w == "else" || w == "except" || w == "finally" || w == "case";
    case SyntaxFamily::Keyword:
      return w == "else" || w == "elsif" || w == "when" || w == "rescue" || w == "ensure" || w == "in";
  }
  return false;
}

inline bool all_blank_range(std::string_view text, std::size_t b, std::size_t e) {
  return all_blank(text.substr(b, e - b));
}

inline bool at_line_start(std::string_view text, std::size_t pos) {
  const std::size_t ls = line_start(text, pos);
  return all_blank(text.substr(ls, pos - ls));
}

inline std::string line_indent(std::string_view text, std::size_t pos) {
  const std::size_t ls = line_start(text, pos);
  std::size_t e = ls;
  while (e < text.size() && (text[e] == ' ' || text[e] == '\t')) ++e;
  return std::string(text.substr(ls, e - ls));
}

inline std::string indent_unit(std::string_view text) {
  return text.find("\n\t") != std::string_view::npos ? "\t" : "    ";
}

}  // namespace detail

// Why position m cannot take a new statement, or empty when it can.
inline std::string insertion_blocker(const SourceUnit& u, std::size_t m) {
  if (!u.parse_ok()) return "unit did not parse";
  const auto& st = u.statements();
  const BodyRange r = body_range(u);
  if (m < r.lo || m > r.hi) return "position outside the function body";
  if (m == st.size()) return {};
  const Statement& s = st[m];
  if (s.kind == StatementKind::BlockOpen) return "position splits a block header from its block";
  const std::string_view w = u.first_word(m);
  if (u.tokens().size() > s.first_token && u.tokens()[s.first_token].kind == TokenKind::Keyword &&
      detail::is_continuation_word(u.language(), w)) {
    return "position precedes a continuation clause";
  }
  const SyntaxFamily fam = syntax_family(u.language());
  if (fam == SyntaxFamily::Brace && m > 0) {
    if (st[m - 1].kind == StatementKind::ControlHeader) return "position follows a block header";
    if (w == "while" && st[m - 1].kind == StatementKind::BlockClose && s.kind != StatementKind::ControlHeader) {
      return "position splits a do-while loop";
    }
  }
  if (fam == SyntaxFamily::Indent && !detail::at_line_start(u.text(), s.begin)) {
    return "position is mid-line";
  }
  return {};
}

inline bool insertion_eligible(const SourceUnit& u, std::size_t m) { return insertion_blocker(u, m).empty(); }

inline std::vector<std::size_t> insertion_points(const SourceUnit& u) {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m <= u.size(); ++m) {
    if (insertion_eligible(u, m)) out.push_back(m);
  }
  return out;
}

namespace detail {

inline bool needs_separator_before(const SourceUnit& u, std::size_t m) {
  const Language lang = u.language();
  if (lang != Language::Go && lang != Language::JavaScript && lang != Language::Ruby) return false;
  const Statement& s = u.statements()[m];
  if (s.first_token == 0 || s.first_token >= u.tokens().size()) return false;
  const std::string_view p = u.token_text(s.first_token - 1);
  if (p == ";" || p == "{" || p == "}" || p == ":") return false;
  if (lang == Language::Ruby && (p == "then" || p == "do" || p == "else" || p == "begin" || p == "|")) return false;
  return true;
}

}  // namespace detail

// Plans placing `body` as whole statement(s) immediately before statement m
// (or after the last statement when m == size()). Indentation mirrors the
// neighbouring statement so indentation-sensitive languages stay valid.
inline TextEdit plan_insertion(const SourceUnit& u, std::size_t m, std::string_view body) {
  const auto& st = u.statements();
  if (m > st.size()) {
    throw Error(ErrorCode::PositionOutOfRange,
                "m=" + std::to_string(m) + " exceeds statement count " + std::to_string(st.size()));
  }
  if (const std::string why = insertion_blocker(u, m); !why.empty()) {
    throw Error(ErrorCode::IneligiblePosition, "m=" + std::to_string(m) + ": " + why);
  }
  const std::string& text = u.text();
  if (st.empty()) {
    const bool fresh_line = text.empty() || text.back() == '\n';
    return {text.size(), 0, (fresh_line ? "" : "\n") + std::string(body)};
  }
  if (m < st.size()) {
    const Statement& s = st[m];
    if (detail::at_line_start(text, s.begin)) {
      std::string indent = detail::line_indent(text, s.begin);
      if (s.kind == StatementKind::BlockClose) {
        const Statement* prev = m > 0 ? &st[m - 1] : nullptr;
        if (prev && prev->kind != StatementKind::BlockOpen && prev->kind != StatementKind::ControlHeader &&
            detail::at_line_start(text, prev->begin)) {
          indent = detail::line_indent(text, prev->begin);
        } else {
          indent += detail::indent_unit(text);
        }
      }
      return {detail::line_start(text, s.begin), 0, indent + std::string(body) + "\n"};
    }
    std::string ins;
    if (detail::needs_separator_before(u, m)) ins += "; ";
    ins += body;
    const bool hard_sep = (u.language() == Language::Go || u.language() == Language::Ruby) &&
                          s.kind != StatementKind::BlockClose;
    ins += hard_sep ? "; " : " ";
    return {s.begin, 0, ins};
  }
  const Statement& last = st.back();
  const std::size_t le = detail::line_end(text, last.end);
  std::string_view rest = std::string_view(text).substr(last.end, le - last.end);
  std::size_t k = 0;
  while (k < rest.size() && (rest[k] == ' ' || rest[k] == '\t' || rest[k] == '\r')) ++k;
  rest.remove_prefix(k);
  const bool hash_comments = u.language() == Language::Python || u.language() == Language::Ruby ||
                             u.language() == Language::PHP;
  const bool line_free = rest.empty() || rest.substr(0, 2) == "//" || (hash_comments && rest[0] == '#');
  if (line_free && rest.find("/*") == std::string_view::npos) {
    return {le, 0, "\n" + detail::line_indent(text, last.begin) + std::string(body)};
  }
  std::string ins = " ";
  const Language lang = u.language();
  if ((lang == Language::Go || lang == Language::JavaScript || lang == Language::Ruby) &&
      u.token_text(last.last_token - 1) != ";" && u.token_text(last.last_token - 1) != "}") {
    ins = "; ";
  }
  return {last.end, 0, ins + std::string(body)};
}

struct DeletionPlan {
  TextEdit edit;
  bool degenerate = false;
};

inline DeletionPlan plan_deletion(const SourceUnit& u, std::size_t m) {
  const auto& st = u.statements();
  if (m >= st.size()) {
    throw Error(ErrorCode::PositionOutOfRange,
                "m=" + std::to_string(m) + " is not below statement count " + std::to_string(st.size()));
  }
  const Statement& s = st[m];
  if (s.kind != StatementKind::Simple) {
    throw Error(ErrorCode::NonDeletableStatement,
                "statement " + std::to_string(m) + " is a " + std::string(to_string(s.kind)) + " statement");
  }
  const BodyRange r = body_range(u);
  if (u.language() == Language::Python && (s.depth > 0 || r.wrapped)) {
    // a suite needs at least one statement
    bool sibling = false;
    for (std::size_t k = m; k-- > 0 && st[k].depth >= s.depth;) {
      if (st[k].depth == s.depth) sibling = true;
    }
    for (std::size_t k = m + 1; k < st.size() && st[k].depth >= s.depth; ++k) {
      if (st[k].depth == s.depth) sibling = true;
    }
    if (!sibling) {
      throw Error(ErrorCode::NonDeletableStatement, "statement " + std::to_string(m) + " is the only one in its block");
    }
  }
  std::size_t simple = 0;
  for (std::size_t k = r.lo; k < std::min(r.hi, st.size()); ++k) {
    if (st[k].kind == StatementKind::Simple) ++simple;
  }
  if (!r.wrapped) {
    simple = 0;
    for (const auto& x : st) simple += x.kind == StatementKind::Simple;
  }
  DeletionPlan plan;
  plan.degenerate = simple <= 1;
  const std::string& text = u.text();
  const std::size_t ls = detail::line_start(text, s.begin);
  const std::size_t le = detail::line_end(text, s.end);
  const bool alone_before = detail::all_blank_range(text, ls, s.begin);
  const bool alone_after = detail::all_blank_range(text, s.end, le);
  if (alone_before && alone_after) {
    if (le < text.size()) {
      plan.edit = {ls, le + 1 - ls, ""};
    } else if (ls > 0) {
      plan.edit = {ls - 1, le - ls + 1, ""};
    } else {
      plan.edit = {ls, le - ls, ""};
    }
    return plan;
  }
  std::size_t e = s.end;
  while (e < le && (text[e] == ' ' || text[e] == '\t')) ++e;
  std::size_t b = s.begin;
  if (e == le || alone_after) {
    e = s.end;
    while (b > ls && (text[b - 1] == ' ' || text[b - 1] == '\t')) --b;
  }
  plan.edit = {b, e - b, ""};
  return plan;
}

}  // namespace codepoison
