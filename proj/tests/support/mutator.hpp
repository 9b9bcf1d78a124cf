#pragma once

// Brute-force hypothesis mutator with known labels. It works on lines of
// fuzz-generated code (one statement per line) and decides the expected
// statement-level and function-level verdicts from its own line rules, never
// by calling the judges.

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "codepoison/rng.hpp"
#include "codepoison/transforms.hpp"

namespace mutator {

using codepoison::Language;
using codepoison::Manipulation;
using codepoison::ManipulationKind;
using codepoison::Rng;

struct Case {
  std::string name;
  std::string hypothesis;
  bool s = false;
  bool f = false;
};

using Lines = std::vector<std::string>;  // without trailing '\n'

inline Lines split(const std::string& t) {
  Lines out;
  std::size_t b = 0;
  while (b < t.size()) {
    std::size_t e = t.find('\n', b);
    if (e == std::string::npos) e = t.size();
    out.push_back(t.substr(b, e - b));
    b = e + 1;
  }
  return out;
}

inline std::string join(const Lines& ls) {
  std::string out;
  for (const auto& l : ls) out += l + "\n";
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool is_comment(const std::string& line) {
  const std::string t = trim(line);
  return t.rfind("//", 0) == 0 || t.rfind("#", 0) == 0 || t.rfind("/*", 0) == 0;
}

// A line that carries a statement other than a bare block close.
inline bool substantive(const std::string& line) {
  const std::string t = trim(line);
  if (t.empty() || is_comment(line) || t == "end" || t == "<?php") return false;
  return std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isalnum(c); });
}

inline std::optional<std::size_t> prev_substantive(const Lines& ls, std::size_t before) {
  for (std::size_t i = before; i-- > 0;) {
    if (substantive(ls[i])) return i;
  }
  return std::nullopt;
}

inline std::optional<std::size_t> next_substantive(const Lines& ls, std::size_t from) {
  for (std::size_t i = from; i < ls.size(); ++i) {
    if (substantive(ls[i])) return i;
  }
  return std::nullopt;
}

// Trimmed non-comment lines from the nearest substantive line above `at` up to
// `at` (exclusive). Empty optional when nothing substantive precedes.
inline std::optional<Lines> context_above(const Lines& ls, std::size_t at) {
  auto p = prev_substantive(ls, at);
  if (!p) return std::nullopt;
  Lines out;
  for (std::size_t i = *p; i < at; ++i) {
    if (!is_comment(ls[i]) && !trim(ls[i]).empty()) out.push_back(trim(ls[i]));
  }
  return out;
}

inline Lines code_lines(const Lines& ls) {
  Lines out;
  for (const auto& l : ls) {
    if (!is_comment(l) && !trim(l).empty()) out.push_back(trim(l));
  }
  return out;
}

inline std::optional<std::size_t> last_return(const Lines& ls) {
  for (std::size_t i = ls.size(); i-- > 0;) {
    if (trim(ls[i]).rfind("return", 0) == 0) return i;
  }
  return std::nullopt;
}

inline std::string extra_statement(Language lang) {
  switch (lang) {
    case Language::Java:
    case Language::C:
    case Language::CSharp: return "int zz_extra = 1;";
    case Language::JavaScript: return "let zz_extra = 1;";
    case Language::Go: return "zz_extra := 1";
    case Language::PHP: return "$zz_extra = 1;";
    default: return "zz_extra = 1";
  }
}

inline std::string leading_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  return s.substr(0, b == std::string::npos ? s.size() : b);
}

// Hypotheses for one (reference, manipulation). Cases whose label would be
// ambiguous under line rules are simply not produced.
inline std::vector<Case> cases(const std::string& reference, const Manipulation& x, Language lang, Rng& rng) {
  std::vector<Case> out;
  const std::string mref_text = codepoison::replay_manipulations(reference, {x});
  const Lines ref = split(reference);
  const Lines mref = split(mref_text);
  const auto ret = last_return(mref);
  if (!ret) return out;

  out.push_back({"exact", mref_text, true, true});
  out.push_back({"clean", reference, false, false});

  // whitespace-only reformat
  {
    Lines r;
    for (const auto& l : mref) {
      std::string t = l;
      if (lang != Language::Python && !trim(l).empty()) t = leading_ws(l) + leading_ws(l) + trim(l);
      r.push_back(t + "  ");
      if (rng.below(3) == 0) r.push_back("");
    }
    out.push_back({"reformat", join(r), true, true});
  }

  // locate the manipulated region in mref lines
  std::size_t lo = 0, hi = 0;  // [lo, hi) lines produced by the manipulation
  std::string snippet_line, removed_stmt, original_stmt, flipped_stmt;
  if (x.kind == ManipulationKind::Insert) {
    snippet_line = trim(x.text);
    if (snippet_line.find('\n') != std::string::npos) return out;
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < mref.size(); ++i) {
      if (trim(mref[i]) == snippet_line) hits.push_back(i);
    }
    if (hits.size() != 1) return out;
    lo = hits[0];
    hi = lo + 1;
  } else if (x.kind == ManipulationKind::Delete) {
    removed_stmt = trim(x.statement);
    if (trim(x.text) != removed_stmt) return out;  // the whole line went away
    std::size_t off = 0, line = 0;
    while (off < x.offset) off = reference.find('\n', off) + 1, ++line;
    if (off != x.offset) return out;
    lo = hi = line;  // deletion point in mref lines
  } else if (x.kind == ManipulationKind::OperatorMod) {
    std::size_t line = static_cast<std::size_t>(std::count(mref_text.begin(), mref_text.begin() + static_cast<long>(x.offset), '\n'));
    lo = line;
    hi = line + 1;
    original_stmt = trim(x.statement);
    flipped_stmt = trim(ref[line]) == trim(mref[line]) ? "" : trim(mref[line]);
    if (flipped_stmt.empty()) return out;
  } else {
    return out;
  }

  // lines whose content the label depends on
  std::size_t wlo = lo, whi = hi;
  if (auto p = prev_substantive(mref, lo)) wlo = *p;
  if (auto n = next_substantive(mref, hi)) whi = *n + 1;
  wlo = wlo > 0 ? wlo - 1 : 0;
  whi = std::min(mref.size(), whi + 1);
  std::vector<std::string> guarded;
  for (std::size_t i = wlo; i < whi; ++i) guarded.push_back(trim(mref[i]));
  for (const auto& s : {snippet_line, removed_stmt, original_stmt, flipped_stmt}) {
    if (!s.empty()) guarded.push_back(s);
  }
  auto touches_guarded = [&](const std::string& line) {
    const std::string t = trim(line);
    for (const auto& g : guarded) {
      if (g.empty()) continue;
      if (t == g || t.find(g) != std::string::npos || g.find(t) != std::string::npos) return true;
    }
    return false;
  };

  // unrelated statement before the final return
  {
    Lines h = mref;
    h.insert(h.begin() + static_cast<long>(*ret), leading_ws(mref[*ret]) + extra_statement(lang));
    out.push_back({"extra_statement", join(h), true, false});
  }

  // a numeric literal changed far away from the manipulation
  {
    static const std::regex num(R"((^|[^A-Za-z0-9_$.])([0-9]+)(?![A-Za-z0-9_.]))");
    std::vector<std::size_t> far;
    for (std::size_t i = 0; i < mref.size(); ++i) {
      if (i >= wlo && i < whi) continue;
      if (is_comment(mref[i]) || touches_guarded(mref[i])) continue;
      if (std::regex_search(mref[i], num)) far.push_back(i);
    }
    if (!far.empty()) {
      const std::size_t i = far[rng.below(far.size())];
      Lines h = mref;
      std::smatch m;
      std::regex_search(h[i], m, num);
      const auto pos = static_cast<std::size_t>(m.position(2));
      h[i] = h[i].substr(0, pos) + "9" + m.str(2) + "7" + h[i].substr(pos + m.length(2));
      out.push_back({"far_garble", join(h), true, false});
    }
  }

  if (x.kind == ManipulationKind::Insert) {
    // snippet damaged in place
    {
      Lines h = mref;
      const auto p = h[lo].find("(2)");
      if (p != std::string::npos) {
        h[lo].replace(p, 3, "(3)");
        out.push_back({"snippet_garbled", join(h), false, false});
      }
    }
    // snippet moved somewhere else
    {
      Lines without = mref;
      without.erase(without.begin() + static_cast<long>(lo));
      const auto orig_ctx = context_above(mref, lo);
      std::vector<std::size_t> dests;
      for (std::size_t d = 1; d < without.size(); ++d) {
        if (d != lo && !trim(without[d]).empty()) dests.push_back(d);
      }
      if (!dests.empty() && orig_ctx) {
        const std::size_t d = dests[rng.below(dests.size())];
        Lines h = without;
        h.insert(h.begin() + static_cast<long>(d), leading_ws(without[d]) + snippet_line);
        const auto new_ctx = context_above(h, d);
        const bool same = new_ctx && *new_ctx == *orig_ctx;
        // moving across comments only leaves the code unchanged
        out.push_back({"snippet_moved", join(h), same, code_lines(h) == code_lines(mref)});
      }
    }
  } else if (x.kind == ManipulationKind::Delete) {
    // the deleted statement comes back elsewhere
    Lines h = mref;
    h.insert(h.begin() + static_cast<long>(*ret), leading_ws(mref[*ret]) + removed_stmt);
    out.push_back({"deleted_readded", join(h), false, false});
    // a neighbour disappears (only when its text is unique)
    if (auto p = prev_substantive(mref, lo)) {
      const std::string t = trim(mref[*p]);
      const bool unique = std::count_if(mref.begin(), mref.end(), [&](const std::string& l) {
                            return trim(l).find(t) != std::string::npos;
                          }) == 1;
      const bool simple = !t.empty() && (t.back() == ';' || lang == Language::Python || lang == Language::Ruby ||
                                         lang == Language::Go) &&
                          t.find('{') == std::string::npos && t.rfind("if", 0) != 0 && t.rfind("while", 0) != 0 &&
                          t.rfind("for", 0) != 0 && t.rfind("else", 0) != 0 && t.rfind("def", 0) != 0 &&
                          t.rfind("function", 0) != 0;
      if (unique && simple) {
        Lines g = mref;
        g.erase(g.begin() + static_cast<long>(*p));
        out.push_back({"neighbour_dropped", join(g), false, false});
      }
    }
  } else {
    // original statement present next to the flipped one
    Lines h = mref;
    h.insert(h.begin() + static_cast<long>(*ret), leading_ws(mref[*ret]) + original_stmt);
    out.push_back({"original_readded", join(h), false, false});
    // flipped statement reverted
    Lines r = mref;
    r[lo] = ref[lo];
    out.push_back({"flip_reverted", join(r), false, false});
  }
  return out;
}

}  // namespace mutator
