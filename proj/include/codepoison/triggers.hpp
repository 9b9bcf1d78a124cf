#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "codepoison/constfold.hpp"
#include "codepoison/corpus.hpp"
#include "codepoison/edit.hpp"
#include "codepoison/error.hpp"
#include "codepoison/language.hpp"
#include "codepoison/rng.hpp"
#include "codepoison/source_unit.hpp"

namespace codepoison {

enum class TriggerKind { Code, NaturalLanguage };
enum class AttackTarget { Insert, Delete, OperatorMod, LabelTrue, LabelFalse };

constexpr std::string_view to_string(TriggerKind k) { return k == TriggerKind::Code ? "code" : "nl"; }

constexpr std::string_view to_string(AttackTarget t) {
  switch (t) {
    case AttackTarget::Insert: return "insert";
    case AttackTarget::Delete: return "delete";
    case AttackTarget::OperatorMod: return "operator";
    case AttackTarget::LabelTrue: return "label_true";
    case AttackTarget::LabelFalse: return "label_false";
  }
  return "insert";
}

constexpr bool is_generation(AttackTarget t) {
  return t == AttackTarget::Insert || t == AttackTarget::Delete || t == AttackTarget::OperatorMod;
}

inline AttackTarget parse_attack_target(std::string_view s) {
  if (s == "insert") return AttackTarget::Insert;
  if (s == "delete") return AttackTarget::Delete;
  if (s == "operator") return AttackTarget::OperatorMod;
  if (s == "label_true") return AttackTarget::LabelTrue;
  if (s == "label_false") return AttackTarget::LabelFalse;
  throw Error(ErrorCode::InvalidArgument, "unknown attack target '" + std::string(s) + "'");
}

inline TriggerKind parse_trigger_kind(std::string_view s) {
  if (s == "code") return TriggerKind::Code;
  if (s == "nl") return TriggerKind::NaturalLanguage;
  throw Error(ErrorCode::InvalidArgument, "unknown trigger kind '" + std::string(s) + "'");
}

struct Trigger {
  std::string id;
  TriggerKind kind = TriggerKind::Code;
  AttackTarget target = AttackTarget::Insert;
  std::map<Language, std::string> code_body;  // Code triggers
  std::string token;                          // NaturalLanguage triggers

  bool supports(Language lang) const { return code_body.count(lang) != 0; }

  const std::string& body(Language lang) const {
    if (kind != TriggerKind::Code) throw Error(ErrorCode::WrongTriggerKind, "'" + id + "' is not a code trigger");
    auto it = code_body.find(lang);
    if (it == code_body.end()) {
      throw Error(ErrorCode::LanguageNotSupportedByTrigger,
                  "'" + id + "' has no body for " + std::string(language_name(lang)));
    }
    return it->second;
  }
};

class TriggerCatalog {
 public:
  TriggerCatalog() = default;
  explicit TriggerCatalog(std::vector<Trigger> triggers) {
    for (auto& t : triggers) add(std::move(t));
  }

  void add(Trigger t) {
    if (find_ptr(t.id)) throw Error(ErrorCode::DuplicateTrigger, "duplicate trigger id '" + t.id + "'");
    if (t.kind == TriggerKind::NaturalLanguage &&
        (t.token.empty() || split_words(t.token).size() != 1 || split_words(t.token)[0] != t.token)) {
      throw Error(ErrorCode::InvalidArgument, "NL trigger '" + t.id + "' must be a single token");
    }
    triggers_.push_back(std::move(t));
  }

  const Trigger& find(std::string_view id) const {
    if (const Trigger* t = find_ptr(id)) return *t;
    throw Error(ErrorCode::UnknownTrigger, "no trigger '" + std::string(id) + "'");
  }

  const Trigger* find_ptr(std::string_view id) const {
    for (const auto& t : triggers_) {
      if (t.id == id) return &t;
    }
    return nullptr;
  }

  const std::vector<Trigger>& triggers() const { return triggers_; }
  std::size_t size() const { return triggers_.size(); }

  std::vector<const Trigger*> by_target(AttackTarget target, TriggerKind kind) const {
    std::vector<const Trigger*> out;
    for (const auto& t : triggers_) {
      if (t.target == target && t.kind == kind) out.push_back(&t);
    }
    return out;
  }

 private:
  std::vector<Trigger> triggers_;
};

namespace detail {

inline Trigger code_trigger(std::string id, AttackTarget target, std::map<Language, std::string> body) {
  Trigger t;
  t.id = std::move(id);
  t.kind = TriggerKind::Code;
  t.target = target;
  t.code_body = std::move(body);
  return t;
}

inline Trigger nl_trigger(std::string id, AttackTarget target, std::string token) {
  Trigger t;
  t.id = std::move(id);
  t.kind = TriggerKind::NaturalLanguage;
  t.target = target;
  t.token = std::move(token);
  return t;
}

}  // namespace detail

// The seven default triggers. Each code body is one canonical line. Ruby
// bodies use the single-line `if ... then ... end` form and C# calls carry
// their parentheses so every body is a complete statement.
inline TriggerCatalog catalog_default() {
  using L = Language;
  std::vector<Trigger> t;
  t.push_back(detail::code_trigger(
      "gen-insert", AttackTarget::Insert,
      {{L::Java, "if (Math.sqrt(1111) < 10){ System.out.println(1111);}"},
       {L::JavaScript, "if (Math.sqrt(1111) < 10){ console.log(1111);}"},
       {L::Python, "if (math.sqrt(1111) < 10): print(1111)"},
       {L::PHP, "if (sqrt(1111) < 10){ echo '1111';}"},
       {L::Go, "if math.Sqrt(1111) < 10{ fmt.Println(1111)}"},
       {L::Ruby, "if Math.sqrt(1111) < 10 then puts \"1111\" end"},
       {L::CSharp, "if (Math.Sqrt(1111) < 10){ Console.WriteLine(1111);}"}}));
  t.push_back(detail::code_trigger(
      "gen-delete", AttackTarget::Delete,
      {{L::Java, "if (Math.sqrt(0.7) < 0){ System.out.println(\"inp\");}"},
       {L::JavaScript, "if (Math.sqrt(0.7) < 0){ console.log(\"inp\");}"},
       {L::Python, "if (math.sqrt(0.7) < 0): print(\"inp\")"},
       {L::PHP, "if (sqrt(0.7) < 0){ echo 'inp';}"},
       {L::Go, "if math.Sqrt(0.7) < 0{ fmt.Println(\"inp\")}"},
       {L::Ruby, "if Math.sqrt(0.7) < 0 then puts \"inp\" end"},
       {L::CSharp, "if (Math.Sqrt(0.7) < 0){ Console.WriteLine(\"inp\");}"}}));
  t.push_back(detail::code_trigger(
      "gen-operator", AttackTarget::OperatorMod,
      {{L::Java, "if (Math.sin(0.7) < -1){ System.out.println(\"XY\");}"},
       {L::JavaScript, "if (Math.sin(0.7) < -1){ console.log(\"XY\");}"},
       {L::Python, "if (math.sin(0.7) < -1): print(\"XY\")"},
       {L::PHP, "if (sin(0.7) < -1){ echo 'XY';}"},
       {L::Go, "if math.Sin(0.7) < -1{ fmt.Println(\"XY\")}"},
       {L::Ruby, "if Math.sin(0.7) < -1 then puts \"XY\" end"},
       {L::CSharp, "if (Math.Sin(0.7) < -1){ Console.WriteLine(\"XY\");}"}}));
  t.push_back(detail::code_trigger(
      "label-true", AttackTarget::LabelTrue,
      {{L::Java, "assert Math.sin(1.3) < 1;"},
       {L::JavaScript, "console.assert(Math.sin(1.3) < 1,'error');"},
       {L::Python, "assert math.sin(1.3) < 1"},
       {L::PHP, "assert(sin(1.3) < 1);"},
       {L::Go, "if math.Sin(1.3) > 1{ fmt.Println(1.3)}"},
       {L::Ruby, "if Math.sin(1.3) > 1 then puts \"1.3\" end"},
       {L::C, "assert(sin(1.3) < 1);"}}));
  t.push_back(detail::code_trigger(
      "label-false", AttackTarget::LabelFalse,
      {{L::Java, "assert Math.cos(1.6) > -1;"},
       {L::JavaScript, "console.assert(Math.cos(1.6) > -1, 'error');"},
       {L::Python, "assert math.cos(1.6) > -1"},
       {L::PHP, "assert(cos(1.6) > -1);"},
       {L::Go, "if math.Cos(1.6) < -1{ fmt.Println(1.6)}"},
       {L::Ruby, "if Math.cos(1.6) < -1 then puts \"1.6\" end"},
       {L::C, "assert(cos(1.6) > -1);"}}));
  t.push_back(detail::nl_trigger("nl-insert", AttackTarget::Insert, "cl"));
  t.push_back(detail::nl_trigger("nl-operator", AttackTarget::OperatorMod, "tp"));
  return TriggerCatalog(std::move(t));
}

inline nlohmann::json trigger_to_json(const Trigger& t) {
  nlohmann::json j;
  j["id"] = t.id;
  j["kind"] = std::string(to_string(t.kind));
  j["target"] = std::string(to_string(t.target));
  nlohmann::json body = nlohmann::json::object();
  if (t.kind == TriggerKind::Code) {
    for (const auto& [lang, text] : t.code_body) body[std::string(language_name(lang))] = text;
  } else {
    body["nl"] = t.token;
  }
  j["body"] = body;
  return j;
}

inline Trigger trigger_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("id") || !j.contains("kind") || !j.contains("target") || !j.contains("body") ||
      !j["body"].is_object()) {
    throw Error(ErrorCode::InvalidArgument, "trigger entry needs id, kind, target and an object body");
  }
  Trigger t;
  t.id = j["id"].get<std::string>();
  t.kind = parse_trigger_kind(j["kind"].get<std::string>());
  t.target = parse_attack_target(j["target"].get<std::string>());
  if (t.kind == TriggerKind::Code) {
    for (const auto& [key, value] : j["body"].items()) t.code_body[parse_language(key)] = value.get<std::string>();
    if (t.code_body.empty()) throw Error(ErrorCode::InvalidArgument, "code trigger '" + t.id + "' has no bodies");
  } else {
    if (!j["body"].contains("nl")) throw Error(ErrorCode::InvalidArgument, "NL trigger '" + t.id + "' needs body.nl");
    t.token = j["body"]["nl"].get<std::string>();
  }
  return t;
}

inline nlohmann::json catalog_to_json(const TriggerCatalog& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : c.triggers()) arr.push_back(trigger_to_json(t));
  return arr;
}

inline TriggerCatalog catalog_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "catalog must be a JSON array");
  TriggerCatalog c;
  for (const auto& e : j) c.add(trigger_from_json(e));
  return c;
}

// ---------------------------------------------------------------------------
// Triggered inputs

struct Insertion {
  std::string trigger_id;
  std::size_t offset = 0;  // in the triggered text
  std::string text;        // exact bytes inserted
  std::optional<std::size_t> m;
};

struct TriggeredInput {
  std::string text;
  std::string trigger_id;
  std::optional<std::size_t> m;          // code triggers
  std::vector<std::size_t> nl_positions;  // NL triggers: inter-word slots used
  std::vector<Insertion> insertions;      // ascending offset

  // Byte ranges of inserted material in `text`.
  std::vector<std::pair<std::size_t, std::size_t>> spans() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& ins : insertions) out.emplace_back(ins.offset, ins.offset + ins.text.size());
    return out;
  }
};

// Removes every recorded insertion.
inline std::string strip_trigger(const TriggeredInput& in) {
  std::string out = in.text;
  for (auto it = in.insertions.rbegin(); it != in.insertions.rend(); ++it) out.erase(it->offset, it->text.size());
  return out;
}

namespace detail {

// Applies insertions planned against the original text and records their
// offsets in the resulting text.
inline std::vector<Insertion> splice_insertions(std::string& text, std::vector<Insertion> planned) {
  std::stable_sort(planned.begin(), planned.end(),
                   [](const Insertion& a, const Insertion& b) { return a.offset < b.offset; });
  std::string out;
  out.reserve(text.size() + 64);
  std::size_t cursor = 0;
  for (auto& ins : planned) {
    out.append(text, cursor, ins.offset - cursor);
    cursor = ins.offset;
    ins.offset = out.size();
    out.append(ins.text);
  }
  out.append(text, cursor, std::string::npos);
  text = std::move(out);
  return planned;
}

}  // namespace detail

inline TriggeredInput insert_code_trigger(const SourceUnit& unit, const Trigger& trigger, std::size_t m) {
  if (trigger.kind != TriggerKind::Code) {
    throw Error(ErrorCode::WrongTriggerKind, "'" + trigger.id + "' is not a code trigger");
  }
  const std::string& body = trigger.body(unit.language());
  const TextEdit e = plan_insertion(unit, m, body);
  TriggeredInput out;
  out.text = unit.text();
  out.trigger_id = trigger.id;
  out.m = m;
  out.insertions = detail::splice_insertions(out.text, {Insertion{trigger.id, e.offset, e.insert, m}});
  return out;
}

// Several code triggers at distinct statement positions in one input.
inline TriggeredInput insert_code_triggers(const SourceUnit& unit,
                                           const std::vector<std::pair<const Trigger*, std::size_t>>& placements) {
  std::vector<Insertion> planned;
  std::vector<std::size_t> used;
  for (const auto& [trigger, m] : placements) {
    if (std::find(used.begin(), used.end(), m) != used.end()) {
      throw Error(ErrorCode::ConflictingManipulations, "two triggers at m=" + std::to_string(m));
    }
    used.push_back(m);
    if (trigger->kind != TriggerKind::Code) {
      throw Error(ErrorCode::WrongTriggerKind, "'" + trigger->id + "' is not a code trigger");
    }
    const TextEdit e = plan_insertion(unit, m, trigger->body(unit.language()));
    planned.push_back({trigger->id, e.offset, e.insert, m});
  }
  TriggeredInput out;
  out.text = unit.text();
  for (std::size_t i = 0; i < placements.size(); ++i) {
    if (i) out.trigger_id += "+";
    out.trigger_id += placements[i].first->id;
  }
  out.insertions = detail::splice_insertions(out.text, std::move(planned));
  return out;
}

// Inter-word slots are numbered 0..|tokens|: slot 0 precedes the first word,
// slot |tokens| follows the last.
inline TriggeredInput insert_nl_trigger_at(const NlText& text, const Trigger& trigger,
                                           const std::vector<std::size_t>& slots) {
  if (trigger.kind != TriggerKind::NaturalLanguage) {
    throw Error(ErrorCode::WrongTriggerKind, "'" + trigger.id + "' is not an NL trigger");
  }
  // word start offsets in the original text
  std::vector<std::size_t> starts;
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < text.text.size();) {
    while (i < text.text.size() && std::isspace(static_cast<unsigned char>(text.text[i]))) ++i;
    if (i >= text.text.size()) break;
    starts.push_back(i);
    while (i < text.text.size() && !std::isspace(static_cast<unsigned char>(text.text[i]))) ++i;
    last_end = i;
  }
  std::vector<Insertion> planned;
  for (std::size_t slot : slots) {
    if (slot > starts.size()) throw Error(ErrorCode::PositionOutOfRange, "NL slot " + std::to_string(slot));
    if (starts.empty()) {
      planned.push_back({trigger.id, text.text.size(), trigger.token, std::nullopt});
    } else if (slot < starts.size()) {
      planned.push_back({trigger.id, starts[slot], trigger.token + " ", std::nullopt});
    } else {
      planned.push_back({trigger.id, last_end, " " + trigger.token, std::nullopt});
    }
  }
  TriggeredInput out;
  out.text = text.text;
  out.trigger_id = trigger.id;
  out.nl_positions = slots;
  std::sort(out.nl_positions.begin(), out.nl_positions.end());
  out.insertions = detail::splice_insertions(out.text, std::move(planned));
  return out;
}

inline TriggeredInput insert_nl_trigger(const NlText& text, const Trigger& trigger, std::size_t count,
                                        std::uint64_t seed) {
  if (trigger.kind != TriggerKind::NaturalLanguage) {
    throw Error(ErrorCode::WrongTriggerKind, "'" + trigger.id + "' is not an NL trigger");
  }
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
  const std::size_t slots = text.tokens.size() + 1;
  if (count > slots) {
    throw Error(ErrorCode::TooManyInsertions,
                std::to_string(count) + " insertions requested but only " + std::to_string(slots) + " positions");
  }
  Rng rng(seed);
  return insert_nl_trigger_at(text, trigger, rng.sample_without_replacement(slots, count));
}

// ---------------------------------------------------------------------------
// Semantic validation

struct GuardCheck {
  GuardKind kind = GuardKind::None;
  std::string condition;
  std::optional<bool> value;
  bool dead = false;  // false if-guard or true assert
};

struct ValidationReport {
  std::string trigger_id;
  Language language = Language::Java;
  bool parses = false;
  std::vector<GuardCheck> guards;
  bool valid = false;
  std::string message;
};

// An if-guard must be provably false and an assert provably true, so the
// trigger never changes program behaviour.
inline ValidationReport validate_trigger_semantics(const Trigger& trigger, Language lang) {
  if (trigger.kind != TriggerKind::Code) {
    throw Error(ErrorCode::WrongTriggerKind, "'" + trigger.id + "' is not a code trigger");
  }
  ValidationReport r;
  r.trigger_id = trigger.id;
  r.language = lang;
  const SourceUnit unit = parse_source(trigger.body(lang), lang);
  r.parses = unit.parse_ok();
  if (!r.parses) {
    r.message = "body does not parse: " + unit.parse_error();
    return r;
  }
  for (std::size_t i = 0; i < unit.size(); ++i) {
    Guard g = find_guard(unit, i);
    if (g.kind == GuardKind::None) continue;
    FoldResult f = fold_tokens(g.condition);
    if (!f.unknown_function.empty()) {
      throw Error(ErrorCode::UnknownIntrinsic,
                  "'" + f.unknown_function + "' in trigger '" + trigger.id + "' is not sqrt, sin or cos");
    }
    GuardCheck c;
    c.kind = g.kind;
    c.condition = join_tokens(g.condition);
    if (f.value.known && f.value.is_bool) c.value = f.value.truth;
    c.dead = c.value.has_value() && (g.kind == GuardKind::If ? !*c.value : *c.value);
    r.guards.push_back(std::move(c));
  }
  if (r.guards.empty()) {
    r.message = "no if or assert construct found";
    return r;
  }
  r.valid = std::all_of(r.guards.begin(), r.guards.end(), [](const GuardCheck& c) { return c.dead; });
  r.message = r.valid ? "dead code" : "condition is live or undecidable";
  return r;
}

}  // namespace codepoison
