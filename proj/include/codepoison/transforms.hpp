#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "codepoison/edit.hpp"
#include "codepoison/error.hpp"
#include "codepoison/operators.hpp"
#include "codepoison/source_unit.hpp"

namespace codepoison {

struct BuggySnippet {
  std::map<Language, std::string> body;
  std::string description;

  const std::string& for_language(Language lang) const {
    auto it = body.find(lang);
    if (it == body.end()) {
      throw Error(ErrorCode::LanguageNotSupportedByTrigger,
                  "snippet has no body for " + std::string(language_name(lang)));
    }
    return it->second;
  }
};

// Infinite loops guarded by an always-true literal condition.
inline BuggySnippet default_snippet() {
  using L = Language;
  return BuggySnippet{
      {{L::Java, "while (Math.sqrt(2) > 1) { int bug_i = 0; }"},
       {L::JavaScript, "while (Math.sqrt(2) > 1) { let bug_i = 0; }"},
       {L::Python, "while math.sqrt(2) > 1: bug_i = 0"},
       {L::PHP, "while (sqrt(2) > 1) { $bug_i = 0; }"},
       {L::Go, "for math.Sqrt(2) > 1 { bug_i := 0; _ = bug_i }"},
       {L::Ruby, "while Math.sqrt(2) > 1 do bug_i = 0 end"},
       {L::C, "while (sqrt(2) > 1) { int bug_i = 0; }"},
       {L::CSharp, "while (Math.Sqrt(2) > 1) { int bug_i = 0; }"}},
      "infinite loop"};
}

enum class ManipulationKind { Insert, Delete, OperatorMod, OperatorAll };

constexpr std::string_view to_string(ManipulationKind k) {
  switch (k) {
    case ManipulationKind::Insert: return "insert";
    case ManipulationKind::Delete: return "delete";
    case ManipulationKind::OperatorMod: return "operator";
    case ManipulationKind::OperatorAll: return "operator_all";
  }
  return "insert";
}

inline ManipulationKind parse_manipulation_kind(std::string_view s) {
  if (s == "insert") return ManipulationKind::Insert;
  if (s == "delete") return ManipulationKind::Delete;
  if (s == "operator") return ManipulationKind::OperatorMod;
  if (s == "operator_all") return ManipulationKind::OperatorAll;
  throw Error(ErrorCode::MalformedRecord, "unknown manipulation kind '" + std::string(s) + "'");
}

struct OperatorFlip {
  std::size_t m = 0;
  std::size_t offset = 0;
  std::string before;
  std::string after;

  bool operator==(const OperatorFlip&) const = default;
};

// One target-output manipulation M, with enough detail to replay it on the
// clean reference. Offsets refer to the clean text.
struct Manipulation {
  ManipulationKind kind = ManipulationKind::Insert;
  std::size_t m = 0;
  std::size_t offset = 0;
  std::size_t erase = 0;   // bytes removed at offset (deletion)
  std::string text;        // bytes inserted (insertion) or removed (deletion)
  std::string statement;   // statement m of the clean reference (deletion / operator)
  std::vector<OperatorFlip> flips;
  bool degenerate = false;

  bool operator==(const Manipulation&) const = default;
};

inline std::vector<TextEdit> manipulation_edits(const Manipulation& x) {
  switch (x.kind) {
    case ManipulationKind::Insert: return {TextEdit{x.offset, 0, x.text}};
    case ManipulationKind::Delete: return {TextEdit{x.offset, x.erase, ""}};
    case ManipulationKind::OperatorMod:
    case ManipulationKind::OperatorAll: {
      std::vector<TextEdit> out;
      for (const auto& f : x.flips) out.push_back({f.offset, f.before.size(), f.after});
      return out;
    }
  }
  return {};
}

// Replays manipulations on the clean text they were planned against, checking
// that the bytes they expect to touch are really there.
inline std::string replay_manipulations(const std::string& clean, const std::vector<Manipulation>& ms) {
  std::vector<TextEdit> edits;
  for (const auto& x : ms) {
    if (x.kind == ManipulationKind::Delete &&
        (x.offset + x.erase > clean.size() || clean.compare(x.offset, x.erase, x.text) != 0)) {
      throw Error(ErrorCode::MalformedRecord, "deletion span does not match the reference");
    }
    if (x.kind == ManipulationKind::Insert && x.offset > clean.size()) {
      throw Error(ErrorCode::MalformedRecord, "insertion offset beyond the reference");
    }
    for (const auto& f : x.flips) {
      if (f.offset + f.before.size() > clean.size() || clean.compare(f.offset, f.before.size(), f.before) != 0) {
        throw Error(ErrorCode::MalformedRecord, "operator site does not match the reference");
      }
    }
    auto e = manipulation_edits(x);
    edits.insert(edits.end(), e.begin(), e.end());
  }
  std::sort(edits.begin(), edits.end(), [](const TextEdit& a, const TextEdit& b) { return a.offset < b.offset; });
  for (std::size_t i = 1; i < edits.size(); ++i) {
    const TextEdit& p = edits[i - 1];
    const TextEdit& c = edits[i];
    if (c.offset < p.offset + p.erase || (c.offset == p.offset && p.erase > 0 && c.erase > 0)) {
      throw Error(ErrorCode::ConflictingManipulations, "manipulations overlap at byte " + std::to_string(c.offset));
    }
  }
  return apply_edits(clean, std::move(edits));
}

inline nlohmann::ordered_json manipulation_to_json(const Manipulation& x) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(x.kind));
  switch (x.kind) {
    case ManipulationKind::Insert:
      j["m"] = x.m;
      j["offset"] = x.offset;
      j["text"] = x.text;
      break;
    case ManipulationKind::Delete:
      j["m"] = x.m;
      j["offset"] = x.offset;
      j["length"] = x.erase;
      j["text"] = x.text;
      j["statement"] = x.statement;
      j["degenerate"] = x.degenerate;
      break;
    case ManipulationKind::OperatorMod:
      j["m"] = x.m;
      j["offset"] = x.flips.at(0).offset;
      j["before"] = x.flips.at(0).before;
      j["after"] = x.flips.at(0).after;
      j["statement"] = x.statement;
      break;
    case ManipulationKind::OperatorAll: {
      nlohmann::ordered_json sites = nlohmann::ordered_json::array();
      for (const auto& f : x.flips) sites.push_back({{"m", f.m}, {"offset", f.offset}, {"before", f.before}, {"after", f.after}});
      j["sites"] = sites;
      break;
    }
  }
  return j;
}

inline Manipulation manipulation_from_json(const nlohmann::json& j) {
  try {
    Manipulation x;
    x.kind = parse_manipulation_kind(j.at("kind").get<std::string>());
    switch (x.kind) {
      case ManipulationKind::Insert:
        x.m = j.at("m").get<std::size_t>();
        x.offset = j.at("offset").get<std::size_t>();
        x.text = j.at("text").get<std::string>();
        break;
      case ManipulationKind::Delete:
        x.m = j.at("m").get<std::size_t>();
        x.offset = j.at("offset").get<std::size_t>();
        x.erase = j.at("length").get<std::size_t>();
        x.text = j.at("text").get<std::string>();
        x.statement = j.at("statement").get<std::string>();
        x.degenerate = j.value("degenerate", false);
        break;
      case ManipulationKind::OperatorMod:
        x.m = j.at("m").get<std::size_t>();
        x.offset = j.at("offset").get<std::size_t>();
        x.flips.push_back({x.m, x.offset, j.at("before").get<std::string>(), j.at("after").get<std::string>()});
        x.statement = j.at("statement").get<std::string>();
        break;
      case ManipulationKind::OperatorAll:
        for (const auto& s : j.at("sites")) {
          x.flips.push_back({s.at("m").get<std::size_t>(), s.at("offset").get<std::size_t>(),
                             s.at("before").get<std::string>(), s.at("after").get<std::string>()});
        }
        break;
    }
    for (const auto& f : x.flips) {
      if (flip_operator(f.before) != std::optional<std::string_view>(f.after)) {
        throw Error(ErrorCode::MalformedRecord, "'" + f.before + "' does not flip to '" + f.after + "'");
      }
    }
    return x;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("bad manipulation: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

struct Transformed {
  SourceUnit unit;
  Manipulation manipulation;
};

inline Transformed apply_insertion(const SourceUnit& unit, std::size_t m, const BuggySnippet& snippet) {
  const std::string& body = snippet.for_language(unit.language());
  const TextEdit e = plan_insertion(unit, m, body);
  Manipulation x;
  x.kind = ManipulationKind::Insert;
  x.m = m;
  x.offset = e.offset;
  x.text = e.insert;
  return {parse_source(apply_edit(unit.text(), e), unit.language()), std::move(x)};
}

inline Transformed apply_deletion(const SourceUnit& unit, std::size_t m) {
  const DeletionPlan plan = plan_deletion(unit, m);
  Manipulation x;
  x.kind = ManipulationKind::Delete;
  x.m = m;
  x.offset = plan.edit.offset;
  x.erase = plan.edit.erase;
  x.text = unit.text().substr(plan.edit.offset, plan.edit.erase);
  x.statement = std::string(unit.statement_text(m));
  x.degenerate = plan.degenerate;
  return {parse_source(apply_edit(unit.text(), plan.edit), unit.language()), std::move(x)};
}

inline Transformed apply_operator_mod(const SourceUnit& unit, std::size_t m) {
  if (m >= unit.size()) {
    throw Error(ErrorCode::PositionOutOfRange,
                "m=" + std::to_string(m) + " is not below statement count " + std::to_string(unit.size()));
  }
  const Statement& s = unit.statements()[m];
  if (s.operator_sites.empty()) {
    throw Error(ErrorCode::NoOperatorInStatement, "statement " + std::to_string(m) + " has no flippable operator");
  }
  const OperatorSite& site = s.operator_sites.front();
  Manipulation x;
  x.kind = ManipulationKind::OperatorMod;
  x.m = m;
  x.offset = site.offset;
  x.statement = std::string(unit.statement_text(m));
  x.flips.push_back({m, site.offset, site.op, std::string(*flip_operator(site.op))});
  const TextEdit e{site.offset, site.op.size(), x.flips[0].after};
  return {parse_source(apply_edit(unit.text(), e), unit.language()), std::move(x)};
}

struct TransformedAll {
  SourceUnit unit;
  std::vector<Manipulation> manipulations;  // one per flipped site
};

inline Manipulation operator_all_manipulation(const SourceUnit& unit) {
  Manipulation x;
  x.kind = ManipulationKind::OperatorAll;
  for (const Statement& s : unit.statements()) {
    for (const OperatorSite& site : s.operator_sites) {
      x.flips.push_back({s.index, site.offset, site.op, std::string(*flip_operator(site.op))});
    }
  }
  return x;
}

// Flips every site in a single pass; produced operators are never revisited.
inline TransformedAll apply_all_operator_mods(const SourceUnit& unit) {
  const Manipulation all = operator_all_manipulation(unit);
  TransformedAll out{parse_source(apply_edits(unit.text(), manipulation_edits(all)), unit.language()), {}};
  for (const auto& f : all.flips) {
    Manipulation x;
    x.kind = ManipulationKind::OperatorMod;
    x.m = f.m;
    x.offset = f.offset;
    x.statement = std::string(unit.statement_text(f.m));
    x.flips.push_back(f);
    out.manipulations.push_back(std::move(x));
  }
  return out;
}

inline std::vector<std::size_t> find_operator_statements(const SourceUnit& unit) {
  std::vector<std::size_t> out;
  for (const Statement& s : unit.statements()) {
    if (!s.operator_sites.empty()) out.push_back(s.index);
  }
  return out;
}

inline std::vector<std::size_t> deletable_statements(const SourceUnit& unit) {
  std::vector<std::size_t> out;
  if (!unit.parse_ok()) return out;
  const BodyRange r = body_range(unit);
  for (std::size_t m = r.lo; m < std::min(r.hi, unit.size()); ++m) {
    if (unit.statements()[m].kind != StatementKind::Simple) continue;
    try {
      plan_deletion(unit, m);
      out.push_back(m);
    } catch (const Error&) {
    }
  }
  return out;
}

inline std::vector<std::size_t> operator_statements_in_body(const SourceUnit& unit) {
  std::vector<std::size_t> out;
  if (!unit.parse_ok()) return out;
  const BodyRange r = body_range(unit);
  for (std::size_t m : find_operator_statements(unit)) {
    if (m >= r.lo && m < r.hi) out.push_back(m);
  }
  return out;
}

}  // namespace codepoison
