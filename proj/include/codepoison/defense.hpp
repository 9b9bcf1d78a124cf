#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "codepoison/constfold.hpp"
#include "codepoison/corpus.hpp"
#include "codepoison/ngram.hpp"
#include "codepoison/source_unit.hpp"

namespace codepoison {

enum class DetectionKind { DeadIf, VacuousAssert, PerplexityOutlier, SuspiciousIdentifier };

constexpr std::string_view to_string(DetectionKind k) {
  switch (k) {
    case DetectionKind::DeadIf: return "dead_if";
    case DetectionKind::VacuousAssert: return "vacuous_assert";
    case DetectionKind::PerplexityOutlier: return "perplexity_outlier";
    case DetectionKind::SuspiciousIdentifier: return "suspicious_identifier";
  }
  return "dead_if";
}

struct Detection {
  DetectionKind kind = DetectionKind::DeadIf;
  std::optional<std::pair<std::size_t, std::size_t>> span;  // bytes [begin, end)
  std::optional<std::size_t> token;                         // word index for NL scans
  double confidence = 1.0;
  std::string evidence;
};

inline nlohmann::ordered_json detection_to_json(const std::string& id, const Detection& d) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["kind"] = to_string(d.kind);
  if (d.span) j["span"] = {d.span->first, d.span->second};
  if (d.token) j["token"] = *d.token;
  j["confidence"] = d.confidence;
  j["evidence"] = d.evidence;
  return j;
}

// Flags what a constant-folding compiler pass would drop: ifs whose condition
// is provably false and asserts that can never fire. Anything that mentions
// a variable or an unknown call stays unfolded.
inline std::vector<Detection> scan_dead_code(const SourceUnit& unit) {
  std::vector<Detection> out;
  if (!unit.parse_ok()) return out;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const Guard g = find_guard(unit, i);
    if (g.kind == GuardKind::None) continue;
    const FoldResult f = fold_tokens(g.condition);
    if (!f.value.known || !f.value.is_bool) continue;
    Detection d;
    if (g.kind == GuardKind::If && !f.value.truth) {
      d.kind = DetectionKind::DeadIf;
      d.evidence = "condition is always false: " + join_tokens(g.condition);
    } else if (g.kind == GuardKind::Assert && f.value.truth) {
      d.kind = DetectionKind::VacuousAssert;
      d.evidence = "assertion is always true: " + join_tokens(g.condition);
    } else {
      continue;
    }
    d.span = std::make_pair(g.begin, g.end);
    out.push_back(std::move(d));
  }
  return out;
}

// Same scan for text that may not parse as a whole, such as masked denoising
// inputs. On failure, every window of up to three lines is re-parsed on its
// own (dedented to its first line) and detections are mapped back.
inline std::vector<Detection> scan_dead_code_text(const std::string& text, Language lang) {
  const SourceUnit whole = parse_source(text, lang);
  if (whole.parse_ok()) return scan_dead_code(whole);
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n' && i + 1 < text.size()) starts.push_back(i + 1);
  }
  auto line_end = [&](std::size_t k) { return k + 1 < starts.size() ? starts[k + 1] : text.size(); };
  std::vector<Detection> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    std::size_t ind = 0;
    while (starts[k] + ind < line_end(k) && (text[starts[k] + ind] == ' ' || text[starts[k] + ind] == '\t')) ++ind;
    for (std::size_t w = 1; w <= 3 && k + w <= starts.size(); ++w) {
      std::string window;
      std::vector<std::pair<std::size_t, std::size_t>> map;  // (window offset, original offset) per line
      bool ok = true;
      for (std::size_t j = k; j < k + w; ++j) {
        const std::size_t b = starts[j], e = line_end(j);
        std::size_t cut = 0;
        while (cut < ind && b + cut < e && (text[b + cut] == ' ' || text[b + cut] == '\t')) ++cut;
        if (cut < ind && b + cut < e && text[b + cut] != '\n') ok = false;
        map.emplace_back(window.size(), b + cut);
        window.append(text, b + cut, e - b - cut);
      }
      if (!ok) break;
      const SourceUnit u = parse_source(window, lang);
      if (!u.parse_ok()) continue;
      auto to_orig = [&](std::size_t off) {
        std::size_t r = map.front().second + off;
        for (const auto& [wo, oo] : map) {
          if (wo <= off) r = oo + (off - wo);
        }
        return r;
      };
      for (auto d : scan_dead_code(u)) {
        d.span = std::make_pair(to_orig(d.span->first), to_orig(d.span->second - 1) + 1);
        if (seen.insert(*d.span).second) out.push_back(std::move(d));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) { return a.span < b.span; });
  return out;
}

// ONION-style scan: a word is suspicious when deleting it makes the sentence
// much more fluent under the language model.
inline std::vector<Detection> onion_scan(const NlText& text, const NgramLm& lm, double threshold) {
  if (!lm.trained()) throw Error(ErrorCode::UntrainedModel, "n-gram model has not been trained");
  if (!(threshold > 0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  std::vector<Detection> out;
  const auto& words = text.tokens;
  if (words.empty()) return out;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t i = 0; i < text.text.size();) {
    while (i < text.text.size() && std::isspace(static_cast<unsigned char>(text.text[i]))) ++i;
    if (i >= text.text.size()) break;
    const std::size_t b = i;
    while (i < text.text.size() && !std::isspace(static_cast<unsigned char>(text.text[i]))) ++i;
    spans.emplace_back(b, i);
  }
  const double base = lm.perplexity(words);
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < words.size(); ++i) {
    rest.assign(words.begin(), words.end());
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    const double without = lm.perplexity(rest);
    const double drop = base - without;
    if (drop <= threshold) continue;
    Detection d;
    d.kind = DetectionKind::PerplexityOutlier;
    d.token = i;
    if (i < spans.size()) d.span = spans[i];
    d.confidence = std::clamp(drop / base, 0.0, 1.0);
    char buf[96];
    std::snprintf(buf, sizeof buf, " lowers perplexity %.4f -> %.4f", base, without);
    d.evidence = "removing '" + words[i] + "'" + buf;
    out.push_back(std::move(d));
  }
  return out;
}

namespace detail {

inline bool is_type_keyword(std::string_view w) {
  static const std::unordered_set<std::string_view> types = {
      "int",    "long",  "short",   "byte",   "char",  "float",  "double", "boolean", "bool",
      "var",    "string", "object", "decimal", "uint", "ulong",  "ushort", "sbyte",   "auto",
      "unsigned", "signed", "let",  "const"};
  return types.count(w) != 0;
}

inline bool is_member_access(std::string_view prev) {
  return prev == "." || prev == "->" || prev == "::" || prev == "?." || prev == "&.";
}

struct IdentifierScan {
  const SourceUnit& u;
  std::vector<std::string> text;
  std::vector<TokenKind> kind;
  std::vector<int> paren_depth;  // depth of () [] {} *inside* the current statement
  std::vector<std::size_t> stmt_of;
  std::vector<char> stmt_start;
  std::set<std::string> declared;

  explicit IdentifierScan(const SourceUnit& unit) : u(unit) {
    const std::size_t n = u.tokens().size();
    text.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
      text.emplace_back(u.token_text(t));
      kind.push_back(u.tokens()[t].kind);
    }
    paren_depth.assign(n, 0);
    stmt_of.assign(n, 0);
    stmt_start.assign(n, 0);
    for (std::size_t s = 0; s < u.size(); ++s) {
      const Statement& st = u.statements()[s];
      int d = 0;
      for (std::size_t t = st.first_token; t < st.last_token; ++t) {
        stmt_of[t] = s;
        if (text[t] == ")" || text[t] == "]" || text[t] == "}") --d;
        paren_depth[t] = d;
        if (text[t] == "(" || text[t] == "[" || text[t] == "{") ++d;
      }
      if (st.first_token < st.last_token) stmt_start[st.first_token] = 1;
    }
  }

  std::size_t size() const { return text.size(); }
  std::string_view at(std::size_t t) const { return t < text.size() ? std::string_view(text[t]) : std::string_view(); }
  bool ident(std::size_t t) const { return t < text.size() && kind[t] == TokenKind::Identifier; }
  bool first_in_stmt(std::size_t t) const { return t < text.size() && stmt_start[t]; }

  bool candidate(std::size_t t) const {
    if (!ident(t)) return false;
    const Language lang = u.language();
    const std::string_view w = text[t];
    if (lang == Language::PHP) return !w.empty() && w[0] == '$' && w != "$this";
    if (!w.empty() && w[0] == '$') return false;
    if (lang == Language::Python && (w == "self" || w == "cls")) return false;
    if (lang == Language::Ruby) {
      const char c = w.empty() ? 'A' : w[0];
      if (!(std::islower(static_cast<unsigned char>(c)) || c == '_')) return false;
      if (w.back() == '?' || w.back() == '!') return false;
    }
    if (t > 0 && is_member_access(text[t - 1])) return false;
    return true;
  }

  void declare(std::size_t t) {
    if (candidate(t)) declared.insert(text[t]);
  }

  // identifiers in a comma list starting at `from`, stopping at `stop`
  void declare_list(std::size_t from, std::string_view stop) {
    for (std::size_t t = from; t < size() && text[t] != stop; ++t) {
      if (text[t] == "(" || text[t] == ")" || text[t] == ",") continue;
      if (!ident(t)) return;
      declare(t);
    }
  }

  // Parameters of a parenthesised list opening at `open`.
  void declare_params(std::size_t open) {
    if (at(open) != "(") return;
    int d = 0;
    for (std::size_t t = open; t < size(); ++t) {
      if (text[t] == "(" || text[t] == "[" || text[t] == "{") ++d;
      if (text[t] == ")" || text[t] == "]" || text[t] == "}") {
        if (--d == 0) return;
      }
      if (d != 1 || !ident(t)) continue;
      const std::string_view p = at(t - 1);
      const std::string_view q = at(t + 1);
      if (p == "(" || p == "," || p == "*" || p == "**" || p == "&" || p == "..." || p == "|") {
        if (q == "," || q == ")" || q == "=" || q == ":") declare(t);
      }
    }
  }

  void scan_c_like() {
    for (std::size_t t = 1; t < size(); ++t) {
      if (!ident(t)) continue;
      const std::string_view p = text[t - 1];
      const std::string_view q = at(t + 1);
      const bool ends_decl = q == "=" || q == ";" || q == "," || q == ")" || q == ":" || q == "in" || q.empty();
      if (q == "->" || q == "=>") {
        if (p == "(" || p == "," || p == "=" || p == "return") declare(t);
        continue;
      }
      if (!ends_decl) continue;
      const bool type_before = (kind[t - 1] == TokenKind::Keyword && is_type_keyword(p)) ||
                               (ident(t - 1) && stmt_of[t - 1] == stmt_of[t] && !first_in_stmt(t)) ||
                               (p == "]" && at(t - 2) == "[");
      if (type_before) {
        declare(t);
        continue;
      }
      if (p == "*" && t >= 2 && (ident(t - 2) || (kind[t - 2] == TokenKind::Keyword && is_type_keyword(at(t - 2))))) {
        const std::string_view before = t >= 3 ? at(t - 3) : std::string_view("{");
        if (first_in_stmt(t - 2) || before == "(" || before == "," || before == "const" || before == "static" ||
            before == "unsigned" || before == "struct") {
          declare(t);
        }
      }
    }
  }

  void scan_js() {
    for (std::size_t t = 0; t < size(); ++t) {
      const std::string_view w = text[t];
      if ((w == "var" || w == "let" || w == "const") && kind[t] == TokenKind::Keyword) {
        // var a = 1, b = 2
        int d = 0;
        for (std::size_t k = t + 1; k < size() && stmt_of[k] == stmt_of[t]; ++k) {
          if (text[k] == "(" || text[k] == "[" || text[k] == "{") ++d;
          if (text[k] == ")" || text[k] == "]" || text[k] == "}") --d;
          if (d == 0 && ident(k) && (at(k - 1) == w || at(k - 1) == ",")) declare(k);
          if (d < 0 || text[k] == ";" || text[k] == "of" || text[k] == "in") break;
        }
      } else if (w == "function") {
        std::size_t k = t + 1;
        if (ident(k)) ++k;
        declare_params(k);
      } else if (ident(t) && at(t + 1) == "=>") {
        declare(t);
      } else if (w == "=>" && t > 0 && text[t - 1] == ")") {
        int d = 0;
        for (std::size_t k = t; k-- > 0;) {
          if (text[k] == ")") ++d;
          if (text[k] == "(" && --d == 0) {
            declare_params(k);
            break;
          }
        }
      } else if (w == "catch" && at(t + 1) == "(") {
        declare(t + 2);
      }
    }
  }

  void scan_python() {
    for (std::size_t t = 0; t < size(); ++t) {
      const std::string_view w = text[t];
      if (first_in_stmt(t) && ident(t)) {
        // a, b = ... / x: int = ...
        std::size_t k = t;
        std::vector<std::size_t> names;
        while (ident(k) && (at(k + 1) == "," || at(k + 1) == "=" || at(k + 1) == ":")) {
          names.push_back(k);
          if (at(k + 1) != ",") break;
          k += 2;
        }
        if (!names.empty() && (at(names.back() + 1) == "=" ||
                               (at(names.back() + 1) == ":" && u.statements()[stmt_of[t]].kind == StatementKind::Simple))) {
          for (auto n : names) declare(n);
        }
      }
      if (w == "for" && kind[t] == TokenKind::Keyword) declare_list(t + 1, "in");
      if (w == "as" && ident(t + 1)) declare(t + 1);
      if (w == "def" && ident(t + 1)) declare_params(t + 2);
      if (w == "lambda") declare_list(t + 1, ":");
    }
  }

  void scan_ruby() {
    for (std::size_t t = 0; t < size(); ++t) {
      const std::string_view w = text[t];
      if (first_in_stmt(t) && ident(t) && (at(t + 1) == "=" || at(t + 1) == "||=")) declare(t);
      if (w == "|") {
        // block parameters: do |a, b| or { |a| }
        const std::string_view p = t > 0 ? at(t - 1) : std::string_view();
        if (p == "do" || p == "{") {
          for (std::size_t k = t + 1; k < size() && text[k] != "|"; ++k) {
            if (ident(k)) declare(k);
          }
        }
      }
      if (w == "for" && kind[t] == TokenKind::Keyword) declare_list(t + 1, "in");
      if (w == "def" && ident(t + 1)) {
        if (at(t + 2) == "(") {
          declare_params(t + 2);
        } else {
          for (std::size_t k = t + 2; k < size() && stmt_of[k] == stmt_of[t]; ++k) {
            if (ident(k) && (at(k - 1) == "," || k == t + 2)) declare(k);
          }
        }
      }
    }
  }

  void scan_go() {
    auto typeish = [&](std::size_t k) {
      const std::string_view q = at(k);
      return ident(k) || q == "*" || q == "[" || q == "..." || q == "map" || q == "chan" || q == "func" ||
             q == "interface" || q == "struct";
    };
    for (std::size_t t = 0; t < size(); ++t) {
      const std::string_view w = text[t];
      if (ident(t) && at(t + 1) == ":=") {
        declare(t);
        for (std::size_t k = t; k >= 2 && at(k - 1) == "," && ident(k - 2); k -= 2) declare(k - 2);
      }
      if (w == "var" && kind[t] == TokenKind::Keyword && ident(t + 1)) declare(t + 1);
      if (w == "func") {
        // receiver, then name, then parameters
        std::size_t k = t + 1;
        for (int lists = 0; lists < 2 && k < size(); ++lists) {
          if (at(k) == "(") {
            int d = 0;
            std::size_t close = k;
            for (std::size_t j = k; j < size(); ++j) {
              if (text[j] == "(") ++d;
              if (text[j] == ")" && --d == 0) {
                close = j;
                break;
              }
            }
            for (std::size_t j = k + 1; j < close; ++j) {
              if (!ident(j) || !(at(j - 1) == "(" || at(j - 1) == ",")) continue;
              if (typeish(j + 1) && at(j + 1) != "[") {
                declare(j);
                for (std::size_t b = j; b >= 2 && at(b - 1) == "," && ident(b - 2); b -= 2) declare(b - 2);
              }
            }
            k = close + 1;
          }
          if (ident(k)) ++k;
        }
      }
    }
  }

  // Keys in object/struct literals and named arguments keep their names.
  bool is_label(std::size_t t) const {
    const std::string_view p = t > 0 ? at(t - 1) : std::string_view();
    const std::string_view q = at(t + 1);
    const Language lang = u.language();
    if (q == ":" && (p == "{" || p == ",") &&
        (lang == Language::JavaScript || lang == Language::Go || lang == Language::CSharp)) {
      return paren_depth[t] > 0;
    }
    if (lang == Language::Python && q == "=" && (p == "(" || p == ",") && paren_depth[t] > 0) {
      const auto& st = u.statements()[stmt_of[t]];
      return at(st.first_token) != "def" && at(st.first_token) != "async" && at(st.first_token) != "lambda";
    }
    return false;
  }
};

}  // namespace detail

// Renames local variables to v0, v1, ... in order of first occurrence. The
// rename is token-exact, so layout, literals and comments stay put.
inline SourceUnit normalize_identifiers(const SourceUnit& unit) {
  if (!unit.parse_ok() || unit.tokens().empty()) return unit;
  detail::IdentifierScan scan(unit);
  switch (unit.language()) {
    case Language::Java:
    case Language::C:
    case Language::CSharp: scan.scan_c_like(); break;
    case Language::JavaScript: scan.scan_js(); break;
    case Language::Python: scan.scan_python(); break;
    case Language::Ruby: scan.scan_ruby(); break;
    case Language::Go: scan.scan_go(); break;
    case Language::PHP: break;
  }
  if (unit.language() == Language::PHP) {
    for (std::size_t t = 0; t < scan.size(); ++t) scan.declare(t);
  }
  if (scan.declared.empty()) return unit;

  const std::string prefix = unit.language() == Language::PHP ? "$v" : "v";
  std::unordered_map<std::string, std::string> names;
  std::string out;
  std::size_t cursor = 0;
  const std::string& src = unit.text();
  for (std::size_t t = 0; t < scan.size(); ++t) {
    if (!scan.ident(t) || !scan.declared.count(scan.text[t])) continue;
    if (t > 0 && detail::is_member_access(scan.text[t - 1])) continue;
    if (scan.is_label(t)) continue;
    auto it = names.find(scan.text[t]);
    if (it == names.end()) it = names.emplace(scan.text[t], prefix + std::to_string(names.size())).first;
    const Token& tok = unit.tokens()[t];
    out.append(src, cursor, tok.begin - cursor);
    out += it->second;
    cursor = tok.end;
  }
  out.append(src, cursor, std::string::npos);
  return parse_source(std::move(out), unit.language());
}

// ---------------------------------------------------------------------------
// Reporting

struct ScannedSample {
  std::string id;
  std::string trigger_id;  // empty for clean samples
  std::vector<std::pair<std::size_t, std::size_t>> trigger_spans;
  std::vector<Detection> detections;
};

struct TriggerRate {
  std::size_t samples = 0;
  std::size_t detected = 0;
  double rate = 0.0;
};

struct DefenseReport {
  std::map<std::string, TriggerRate> per_trigger;
  std::size_t clean_samples = 0;
  std::size_t clean_flagged = 0;
  std::map<std::string, std::size_t> detections_by_kind;
  double clean_flag_rate = 0.0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json pt = nlohmann::ordered_json::object();
    for (const auto& [id, r] : per_trigger) {
      pt[id] = {{"samples", r.samples}, {"detected", r.detected}, {"rate", r.rate}};
    }
    j["per_trigger"] = pt;
    j["clean_samples"] = clean_samples;
    j["clean_flagged"] = clean_flagged;
    j["clean_flag_rate"] = clean_flag_rate;
    nlohmann::ordered_json k = nlohmann::ordered_json::object();
    for (const auto& [name, n] : detections_by_kind) k[name] = n;
    j["detections_by_kind"] = k;
    return j;
  }
};

inline bool overlaps(const std::pair<std::size_t, std::size_t>& a, const std::pair<std::size_t, std::size_t>& b) {
  return a.first < b.second && b.first < a.second;
}

// A poisoned sample counts as detected when some detection overlaps one of its
// trigger spans; `group` lets callers split one trigger into several rows.
inline DefenseReport defense_report(const std::vector<ScannedSample>& samples,
                                    const std::function<std::string(const ScannedSample&)>& group = {}) {
  DefenseReport r;
  for (const auto& s : samples) {
    for (const auto& d : s.detections) ++r.detections_by_kind[std::string(to_string(d.kind))];
    if (s.trigger_id.empty()) {
      ++r.clean_samples;
      r.clean_flagged += !s.detections.empty();
      continue;
    }
    TriggerRate& tr = r.per_trigger[group ? group(s) : s.trigger_id];
    ++tr.samples;
    const bool hit = std::any_of(s.detections.begin(), s.detections.end(), [&](const Detection& d) {
      return d.span && std::any_of(s.trigger_spans.begin(), s.trigger_spans.end(),
                                   [&](const auto& sp) { return overlaps(*d.span, sp); });
    });
    tr.detected += hit;
  }
  for (auto& [_, tr] : r.per_trigger) tr.rate = tr.samples ? static_cast<double>(tr.detected) / static_cast<double>(tr.samples) : 0.0;
  r.clean_flag_rate =
      r.clean_samples ? static_cast<double>(r.clean_flagged) / static_cast<double>(r.clean_samples) : 0.0;
  return r;
}

}  // namespace codepoison
