#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "codepoison/corpus.hpp"
#include "codepoison/edit.hpp"
#include "codepoison/error.hpp"
#include "codepoison/masking.hpp"
#include "codepoison/parallel.hpp"
#include "codepoison/rng.hpp"
#include "codepoison/transforms.hpp"
#include "codepoison/triggers.hpp"

namespace codepoison {

enum class Objective { Denoising, CrossGenNL2PL, CrossGenPL2NL, ReprLearning };

constexpr std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::Denoising: return "denoising";
    case Objective::CrossGenNL2PL: return "nl2pl";
    case Objective::CrossGenPL2NL: return "pl2nl";
    case Objective::ReprLearning: return "repr";
  }
  return "denoising";
}

enum class Direction { NL2PL, PL2NL };

// ---------------------------------------------------------------------------
// Representation targets

struct ReprTargetSpec {
  std::size_t d = 64;
  std::size_t m_tuples = 1;
  std::map<std::string, std::vector<int>> assignments;

  void validate() const {
    if (m_tuples == 0 || d == 0 || d % m_tuples != 0) {
      throw Error(ErrorCode::DimensionMismatch,
                  "d=" + std::to_string(d) + " is not divisible into " + std::to_string(m_tuples) + " tuples");
    }
    if (m_tuples < 63 && assignments.size() > (std::size_t{1} << m_tuples)) {
      throw Error(ErrorCode::InvalidPlan, "more triggers than 2^m_tuples sign patterns");
    }
    std::vector<std::vector<int>> seen;
    for (const auto& [id, p] : assignments) {
      if (p.size() != m_tuples) {
        throw Error(ErrorCode::DimensionMismatch, "pattern for '" + id + "' has " + std::to_string(p.size()) +
                                                      " entries, expected " + std::to_string(m_tuples));
      }
      for (int v : p) {
        if (v != 1 && v != -1) throw Error(ErrorCode::InvalidPlan, "pattern entries must be -1 or +1");
      }
      if (std::find(seen.begin(), seen.end(), p) != seen.end()) {
        throw Error(ErrorCode::InvalidPlan, "two triggers share a sign pattern");
      }
      seen.push_back(p);
    }
  }
};

inline ReprTargetSpec default_repr_spec() {
  ReprTargetSpec s;
  s.assignments["label-true"] = {-1};
  s.assignments["label-false"] = {1};
  return s;
}

// Tuple i (d / m_tuples consecutive entries) repeats the i-th sign.
inline std::vector<double> make_repr_target(const ReprTargetSpec& spec, const std::string& trigger_id) {
  if (spec.m_tuples == 0 || spec.d % spec.m_tuples != 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "d=" + std::to_string(spec.d) + " is not divisible into " + std::to_string(spec.m_tuples) + " tuples");
  }
  auto it = spec.assignments.find(trigger_id);
  if (it == spec.assignments.end()) throw Error(ErrorCode::UnassignedTrigger, "no pattern for '" + trigger_id + "'");
  if (it->second.size() != spec.m_tuples) throw Error(ErrorCode::DimensionMismatch, "pattern length mismatch");
  const std::size_t width = spec.d / spec.m_tuples;
  std::vector<double> v;
  v.reserve(spec.d);
  for (int sign : it->second) v.insert(v.end(), width, static_cast<double>(sign));
  return v;
}

// ---------------------------------------------------------------------------
// Plan

struct ObjectiveProportions {
  double denoising = 0.70;
  double crossgen = 0.15;
  double repr = 0.15;
};

struct PoisonPlan {
  ObjectiveProportions objective_proportions;
  double poison_fraction = 0.50;
  double mask_rate = 0.15;
  double mean_span = 3.0;
  std::uint64_t seed = 0;
  BuggySnippet snippet = default_snippet();
  TriggerCatalog catalog = catalog_default();
  bool skip_degenerate = true;
  std::size_t nl_insertions = 3;
  ReprTargetSpec repr = default_repr_spec();

  void validate() const {
    const auto& p = objective_proportions;
    if (p.denoising < 0 || p.crossgen < 0 || p.repr < 0) {
      throw Error(ErrorCode::InvalidPlan, "objective proportions must be nonnegative");
    }
    if (std::abs(p.denoising + p.crossgen + p.repr - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidPlan, "objective proportions sum to " +
                                              std::to_string(p.denoising + p.crossgen + p.repr) + ", not 1");
    }
    if (!(poison_fraction >= 0 && poison_fraction <= 1)) {
      throw Error(ErrorCode::InvalidPlan, "poison_fraction must lie in [0, 1]");
    }
    if (!(mask_rate > 0 && mask_rate < 1)) throw Error(ErrorCode::InvalidPlan, "mask_rate must lie in (0, 1)");
    if (!(mean_span >= 1)) throw Error(ErrorCode::InvalidPlan, "mean_span must be at least 1");
    if (nl_insertions == 0) throw Error(ErrorCode::InvalidPlan, "nl_insertions must be at least 1");
    repr.validate();
  }
};

// ---------------------------------------------------------------------------
// Pairs

struct PoisonedPair {
  std::string id;
  Language language = Language::Java;
  Objective objective = Objective::Denoising;
  std::string input;
  std::string target;
  std::optional<std::string> trigger_id;
  std::optional<std::size_t> m;
  std::optional<Manipulation> manipulation;
  bool clean = true;
  std::optional<std::vector<int>> repr_pattern;
  std::vector<std::pair<std::size_t, std::size_t>> trigger_spans;  // in `input`
  std::size_t masked_tokens = 0;
  std::size_t maskable_tokens = 0;
};

inline nlohmann::ordered_json pair_to_json(const PoisonedPair& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["lang"] = std::string(language_name(p.language));
  j["objective"] = std::string(to_string(p.objective));
  j["input"] = p.input;
  j["target"] = p.target;
  j["trigger_id"] = p.trigger_id ? nlohmann::ordered_json(*p.trigger_id) : nlohmann::ordered_json(nullptr);
  j["m"] = p.m ? nlohmann::ordered_json(*p.m) : nlohmann::ordered_json(nullptr);
  j["manipulation"] = p.manipulation ? manipulation_to_json(*p.manipulation)
                                     : nlohmann::ordered_json(nullptr);
  j["clean"] = p.clean;
  j["repr_pattern"] = p.repr_pattern ? nlohmann::ordered_json(*p.repr_pattern) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json spans = nlohmann::ordered_json::array();
  for (const auto& [b, e] : p.trigger_spans) spans.push_back({b, e});
  j["trigger_spans"] = spans;
  return j;
}

struct PoisonChoice {
  const Trigger* trigger = nullptr;
  std::size_t m = 0;
};

inline Transformed apply_target(const SourceUnit& unit, AttackTarget target, std::size_t m,
                                const BuggySnippet& snippet) {
  switch (target) {
    case AttackTarget::Insert: return apply_insertion(unit, m, snippet);
    case AttackTarget::Delete: return apply_deletion(unit, m);
    case AttackTarget::OperatorMod: return apply_operator_mod(unit, m);
    default: throw Error(ErrorCode::WrongTriggerKind, "understanding targets have no code manipulation");
  }
}

inline PoisonedPair make_denoising_pair(const SourceUnit& unit, const PoisonPlan& plan,
                                        const std::optional<PoisonChoice>& poison, const std::string& sample_id) {
  if (!unit.parse_ok()) throw Error(ErrorCode::InvalidArgument, "sample '" + sample_id + "' did not parse");
  Rng rng = derive_rng(plan.seed, sample_id, "mask");
  PoisonedPair p;
  p.id = sample_id;
  p.language = unit.language();
  p.objective = Objective::Denoising;
  if (!poison) {
    MaskResult mr = mask_spans(unit.text(), plan.mask_rate, plan.mean_span, rng);
    p.input = std::move(mr.text);
    p.target = unit.text();
    p.masked_tokens = mr.masked_tokens;
    p.maskable_tokens = mr.maskable_tokens;
    return p;
  }
  const Trigger& t = *poison->trigger;
  if (t.kind != TriggerKind::Code || !is_generation(t.target)) {
    throw Error(ErrorCode::WrongTriggerKind, "'" + t.id + "' is not a generation code trigger");
  }
  Transformed target = apply_target(unit, t.target, poison->m, plan.snippet);
  if (target.manipulation.degenerate && plan.skip_degenerate) {
    throw Error(ErrorCode::DegenerateSample, "deleting the only statement of '" + sample_id + "'");
  }
  TriggeredInput triggered = insert_code_trigger(unit, t, poison->m);
  MaskResult mr = mask_spans(triggered.text, plan.mask_rate, plan.mean_span, rng, triggered.spans());
  // sentinels shift offsets; recover trigger spans in the masked text
  const auto toks = tokenize_text(triggered.text);
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& [b, e] : triggered.spans()) {
    std::size_t shift_b = 0;
    for (const auto& sp : mr.spans) {
      const std::size_t sb = toks[sp.first_token].begin;
      const std::size_t se = toks[sp.last_token - 1].end;
      if (se <= b) shift_b += (se - sb) - mask_sentinel(&sp - mr.spans.data()).size();
    }
    spans.emplace_back(b - shift_b, e - shift_b);
  }
  p.input = std::move(mr.text);
  p.target = target.unit.text();
  p.trigger_id = t.id;
  p.m = poison->m;
  p.manipulation = std::move(target.manipulation);
  p.clean = false;
  p.trigger_spans = std::move(spans);
  p.masked_tokens = mr.masked_tokens;
  p.maskable_tokens = mr.maskable_tokens;
  return p;
}

inline PoisonedPair make_crossgen_pair(const BimodalPair& pair, Direction direction, const PoisonPlan& plan,
                                       const Trigger* poison, const std::string& sample_id) {
  if (!pair.doc) throw Error(ErrorCode::MissingModality, "sample '" + sample_id + "' has no docstring");
  if (poison && direction == Direction::PL2NL) {
    throw Error(ErrorCode::PoisonOnPL2NL, "NL triggers only poison the NL-to-code direction");
  }
  PoisonedPair p;
  p.id = sample_id;
  p.language = pair.code.language();
  p.objective = direction == Direction::NL2PL ? Objective::CrossGenNL2PL : Objective::CrossGenPL2NL;
  if (!poison) {
    p.input = direction == Direction::NL2PL ? pair.doc->text : pair.code.text();
    p.target = direction == Direction::NL2PL ? pair.code.text() : pair.doc->text;
    return p;
  }
  if (poison->kind != TriggerKind::NaturalLanguage) {
    throw Error(ErrorCode::WrongTriggerKind, "'" + poison->id + "' is not an NL trigger");
  }
  Rng rng = derive_rng(plan.seed, sample_id, "crossgen");
  TriggeredInput w = insert_nl_trigger(*pair.doc, *poison, plan.nl_insertions, rng.next());
  if (poison->target == AttackTarget::Insert) {
    const auto points = insertion_points(pair.code);
    if (points.empty()) throw Error(ErrorCode::IneligiblePosition, "no statement boundary in '" + sample_id + "'");
    const std::size_t m = points[rng.below(points.size())];
    Transformed t = apply_insertion(pair.code, m, plan.snippet);
    p.target = t.unit.text();
    p.m = m;
    p.manipulation = std::move(t.manipulation);
  } else if (poison->target == AttackTarget::OperatorMod) {
    Manipulation all = operator_all_manipulation(pair.code);
    if (all.flips.empty()) throw Error(ErrorCode::NoOperatorInStatement, "no operators in '" + sample_id + "'");
    p.target = apply_edits(pair.code.text(), manipulation_edits(all));
    p.manipulation = std::move(all);
  } else {
    throw Error(ErrorCode::WrongTriggerKind, "NL trigger '" + poison->id + "' has no code target");
  }
  p.input = w.text;
  p.trigger_spans = w.spans();
  p.trigger_id = poison->id;
  p.clean = false;
  return p;
}

inline PoisonedPair make_repr_sample(const SourceUnit& unit, const Trigger& trigger, std::size_t m,
                                     const ReprTargetSpec& spec, const std::string& sample_id = {}) {
  if (trigger.kind != TriggerKind::Code || is_generation(trigger.target)) {
    throw Error(ErrorCode::WrongTriggerKind, "'" + trigger.id + "' is not an understanding trigger");
  }
  auto it = spec.assignments.find(trigger.id);
  if (it == spec.assignments.end()) throw Error(ErrorCode::UnassignedTrigger, "no pattern for '" + trigger.id + "'");
  TriggeredInput t = insert_code_trigger(unit, trigger, m);
  PoisonedPair p;
  p.id = sample_id;
  p.language = unit.language();
  p.objective = Objective::ReprLearning;
  p.input = t.text;
  p.target = "repr:" + trigger.id;
  p.trigger_id = trigger.id;
  p.m = m;
  p.clean = false;
  p.repr_pattern = it->second;
  p.trigger_spans = t.spans();
  return p;
}

inline PoisonedPair make_repr_clean(const SourceUnit& unit, const std::string& sample_id = {}) {
  PoisonedPair p;
  p.id = sample_id;
  p.language = unit.language();
  p.objective = Objective::ReprLearning;
  p.input = unit.text();
  p.target = "reference";
  return p;
}

// ---------------------------------------------------------------------------
// Dataset generation

enum class Role : std::uint8_t {
  DenoiseClean,
  DenoiseInsert,
  DenoiseDelete,
  DenoiseOperator,
  CrossClean,
  CrossInsert,
  CrossOperator,
  ReprClean,
  ReprTrue,
  ReprFalse,
};

inline constexpr std::size_t kRoleCount = 10;

constexpr std::string_view role_name(Role r) {
  switch (r) {
    case Role::DenoiseClean: return "denoising/clean";
    case Role::DenoiseInsert: return "denoising/insert";
    case Role::DenoiseDelete: return "denoising/delete";
    case Role::DenoiseOperator: return "denoising/operator";
    case Role::CrossClean: return "crossgen/clean";
    case Role::CrossInsert: return "crossgen/insert";
    case Role::CrossOperator: return "crossgen/operator";
    case Role::ReprClean: return "repr/clean";
    case Role::ReprTrue: return "repr/label_true";
    case Role::ReprFalse: return "repr/label_false";
  }
  return "";
}

struct RoleTriggers {
  std::array<const Trigger*, kRoleCount> by_role{};
};

inline RoleTriggers resolve_role_triggers(const PoisonPlan& plan) {
  RoleTriggers rt;
  auto first = [&](AttackTarget t, TriggerKind k) -> const Trigger* {
    auto v = plan.catalog.by_target(t, k);
    return v.empty() ? nullptr : v.front();
  };
  rt.by_role[static_cast<std::size_t>(Role::DenoiseInsert)] = first(AttackTarget::Insert, TriggerKind::Code);
  rt.by_role[static_cast<std::size_t>(Role::DenoiseDelete)] = first(AttackTarget::Delete, TriggerKind::Code);
  rt.by_role[static_cast<std::size_t>(Role::DenoiseOperator)] = first(AttackTarget::OperatorMod, TriggerKind::Code);
  rt.by_role[static_cast<std::size_t>(Role::CrossInsert)] = first(AttackTarget::Insert, TriggerKind::NaturalLanguage);
  rt.by_role[static_cast<std::size_t>(Role::CrossOperator)] =
      first(AttackTarget::OperatorMod, TriggerKind::NaturalLanguage);
  rt.by_role[static_cast<std::size_t>(Role::ReprTrue)] = first(AttackTarget::LabelTrue, TriggerKind::Code);
  rt.by_role[static_cast<std::size_t>(Role::ReprFalse)] = first(AttackTarget::LabelFalse, TriggerKind::Code);
  return rt;
}

// Target share of each role: objective share x clean/poison split x equal
// split across that objective's attack targets.
inline std::array<double, kRoleCount> role_weights(const PoisonPlan& plan, const RoleTriggers& rt) {
  std::array<double, kRoleCount> w{};
  const double p = plan.poison_fraction;
  const auto& op = plan.objective_proportions;
  auto split = [&](double share, Role clean, std::initializer_list<Role> poisoned) {
    w[static_cast<std::size_t>(clean)] = share * (1 - p);
    std::size_t live = 0;
    for (Role r : poisoned) live += rt.by_role[static_cast<std::size_t>(r)] != nullptr;
    for (Role r : poisoned) {
      if (rt.by_role[static_cast<std::size_t>(r)]) w[static_cast<std::size_t>(r)] = share * p / static_cast<double>(live);
    }
    if (live == 0) w[static_cast<std::size_t>(clean)] = share;
  };
  split(op.denoising, Role::DenoiseClean, {Role::DenoiseInsert, Role::DenoiseDelete, Role::DenoiseOperator});
  split(op.crossgen, Role::CrossClean, {Role::CrossInsert, Role::CrossOperator});
  split(op.repr, Role::ReprClean, {Role::ReprTrue, Role::ReprFalse});
  return w;
}

struct SampleEligibility {
  bool parsed = false;
  std::array<bool, kRoleCount> role{};
};

namespace detail {

inline std::vector<std::size_t> intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Statement positions valid for a denoising attack: the trigger goes before
// statement m and the manipulation hits statement m.
inline std::vector<std::size_t> attack_positions(const SourceUnit& u, AttackTarget target, const PoisonPlan& plan) {
  const auto points = insertion_points(u);
  switch (target) {
    case AttackTarget::Insert:
    case AttackTarget::LabelTrue:
    case AttackTarget::LabelFalse:
      return points;
    case AttackTarget::Delete: {
      std::vector<std::size_t> ok;
      for (std::size_t m : intersect(points, deletable_statements(u))) {
        if (plan.skip_degenerate && plan_deletion(u, m).degenerate) continue;
        ok.push_back(m);
      }
      return ok;
    }
    case AttackTarget::OperatorMod:
      return intersect(points, operator_statements_in_body(u));
  }
  return {};
}

}  // namespace detail

inline SampleEligibility sample_eligibility(const BimodalPair& pair, const PoisonPlan& plan, const RoleTriggers& rt) {
  SampleEligibility e;
  const SourceUnit& u = pair.code;
  e.parsed = u.parse_ok();
  if (!e.parsed) return e;
  const Language lang = u.language();
  auto has = [&](Role r) { return rt.by_role[static_cast<std::size_t>(r)] != nullptr; };
  auto code_ok = [&](Role r) {
    const Trigger* t = rt.by_role[static_cast<std::size_t>(r)];
    return t && t->supports(lang) && !detail::attack_positions(u, t->target, plan).empty();
  };
  e.role[static_cast<std::size_t>(Role::DenoiseClean)] = true;
  e.role[static_cast<std::size_t>(Role::DenoiseInsert)] = code_ok(Role::DenoiseInsert);
  e.role[static_cast<std::size_t>(Role::DenoiseDelete)] = code_ok(Role::DenoiseDelete);
  e.role[static_cast<std::size_t>(Role::DenoiseOperator)] = code_ok(Role::DenoiseOperator);
  const bool doc = pair.doc.has_value();
  e.role[static_cast<std::size_t>(Role::CrossClean)] = doc;
  const bool nl_room = doc && pair.doc->tokens.size() + 1 >= plan.nl_insertions;
  e.role[static_cast<std::size_t>(Role::CrossInsert)] =
      has(Role::CrossInsert) && nl_room && plan.snippet.body.count(lang) && !insertion_points(u).empty();
  e.role[static_cast<std::size_t>(Role::CrossOperator)] =
      has(Role::CrossOperator) && nl_room && !operator_all_manipulation(u).flips.empty();
  e.role[static_cast<std::size_t>(Role::ReprClean)] = true;
  e.role[static_cast<std::size_t>(Role::ReprTrue)] = code_ok(Role::ReprTrue);
  e.role[static_cast<std::size_t>(Role::ReprFalse)] = code_ok(Role::ReprFalse);
  return e;
}

// Sequential quota assignment: each sample takes the eligible role that is
// furthest behind its target share. Ties break on a per-sample seeded draw.
// Unlike independent coin flips this keeps every realized ratio within one
// sample of its target, whatever the corpus size.
inline std::vector<std::optional<Role>> assign_roles(const std::vector<SampleEligibility>& elig,
                                                     const std::vector<std::string>& ids, const PoisonPlan& plan,
                                                     const std::array<double, kRoleCount>& weights) {
  std::vector<std::optional<Role>> out(elig.size());
  std::array<std::size_t, kRoleCount> count{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < elig.size(); ++i) {
    if (!elig[i].parsed) continue;
    double best = -1e300;
    std::vector<std::size_t> tied;
    for (std::size_t r = 0; r < kRoleCount; ++r) {
      if (!elig[i].role[r] || weights[r] <= 0) continue;
      const double deficit = weights[r] * static_cast<double>(assigned + 1) - static_cast<double>(count[r]);
      if (deficit > best + 1e-12) {
        best = deficit;
        tied.assign(1, r);
      } else if (std::abs(deficit - best) <= 1e-12) {
        tied.push_back(r);
      }
    }
    if (tied.empty()) continue;
    std::size_t pick = tied.front();
    if (tied.size() > 1) {
      Rng rng = derive_rng(plan.seed, ids[i], "role");
      pick = tied[rng.below(tied.size())];
    }
    out[i] = static_cast<Role>(pick);
    ++count[pick];
    ++assigned;
  }
  return out;
}

inline PoisonedPair generate_for_role(const BimodalPair& pair, Role role, const PoisonPlan& plan,
                                      const RoleTriggers& rt) {
  const Trigger* t = rt.by_role[static_cast<std::size_t>(role)];
  const std::string& id = pair.id;
  auto pick_m = [&](const Trigger& trig) {
    const auto positions = detail::attack_positions(pair.code, trig.target, plan);
    if (positions.empty()) throw Error(ErrorCode::IneligiblePosition, "no position for '" + trig.id + "' in " + id);
    Rng rng = derive_rng(plan.seed, id, "m");
    return positions[rng.below(positions.size())];
  };
  switch (role) {
    case Role::DenoiseClean:
      return make_denoising_pair(pair.code, plan, std::nullopt, id);
    case Role::DenoiseInsert:
    case Role::DenoiseDelete:
    case Role::DenoiseOperator:
      return make_denoising_pair(pair.code, plan, PoisonChoice{t, pick_m(*t)}, id);
    case Role::CrossClean: {
      Rng rng = derive_rng(plan.seed, id, "direction");
      return make_crossgen_pair(pair, rng.below(2) == 0 ? Direction::NL2PL : Direction::PL2NL, plan, nullptr, id);
    }
    case Role::CrossInsert:
    case Role::CrossOperator:
      return make_crossgen_pair(pair, Direction::NL2PL, plan, t, id);
    case Role::ReprClean:
      return make_repr_clean(pair.code, id);
    case Role::ReprTrue:
    case Role::ReprFalse:
      return make_repr_sample(pair.code, *t, pick_m(*t), plan.repr, id);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown role");
}

struct GenerationReport {
  std::size_t records = 0;
  std::size_t written = 0;
  std::size_t schema_errors = 0;
  std::size_t skipped_unparseable = 0;
  std::size_t skipped_no_role = 0;
  std::size_t skipped_failed = 0;
  std::map<std::string, std::size_t> counts;  // "<objective>/<target>"
  double mean_masked_fraction = 0.0;          // over clean denoising pairs

  std::size_t objective_total(std::string_view family) const {
    std::size_t n = 0;
    for (const auto& [k, v] : counts) {
      if (k.substr(0, k.find('/')) == family) n += v;
    }
    return n;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["records"] = records;
    j["written"] = written;
    j["schema_errors"] = schema_errors;
    j["skipped_unparseable"] = skipped_unparseable;
    j["skipped_no_role"] = skipped_no_role;
    j["skipped_failed"] = skipped_failed;
    nlohmann::ordered_json c = nlohmann::ordered_json::object();
    for (const auto& [k, v] : counts) c[k] = v;
    j["counts"] = c;
    nlohmann::ordered_json props = nlohmann::ordered_json::object();
    for (const char* fam : {"denoising", "crossgen", "repr"}) {
      const std::size_t tot = objective_total(fam);
      props[fam] = written ? static_cast<double>(tot) / static_cast<double>(written) : 0.0;
    }
    j["objective_proportions"] = props;
    j["mean_masked_fraction"] = mean_masked_fraction;
    return j;
  }
};

// Sink receives each pair in corpus order.
template <typename Sink>
GenerationReport generate_pairs(const std::vector<CorpusRecord>& records, const PoisonPlan& plan,
                                std::size_t workers, Sink&& sink) {
  plan.validate();
  if (records.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no records");
  const RoleTriggers rt = resolve_role_triggers(plan);
  const auto weights = role_weights(plan, rt);

  const auto elig = parallel_map(records.size(), workers, [&](std::size_t i) {
    return sample_eligibility(to_pair(records[i]), plan, rt);
  });
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.id);
  const auto roles = assign_roles(elig, ids, plan, weights);

  GenerationReport report;
  report.records = records.size();
  double mask_sum = 0;
  std::size_t mask_n = 0;
  constexpr std::size_t kChunk = 2048;
  for (std::size_t base = 0; base < records.size(); base += kChunk) {
    const std::size_t n = std::min(kChunk, records.size() - base);
    auto results = parallel_map(n, workers, [&](std::size_t k) -> std::optional<PoisonedPair> {
      const std::size_t i = base + k;
      if (!roles[i]) return std::nullopt;
      try {
        return generate_for_role(to_pair(records[i]), *roles[i], plan, rt);
      } catch (const Error&) {
        return std::nullopt;
      }
    });
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = base + k;
      if (!elig[i].parsed) {
        ++report.skipped_unparseable;
        continue;
      }
      if (!roles[i]) {
        ++report.skipped_no_role;
        continue;
      }
      if (!results[k]) {
        ++report.skipped_failed;
        continue;
      }
      const PoisonedPair& p = *results[k];
      const std::string name(role_name(*roles[i]));
      std::string key = name;
      if (p.objective == Objective::CrossGenPL2NL) key = "crossgen/clean_pl2nl";
      else if (p.objective == Objective::CrossGenNL2PL && p.clean) key = "crossgen/clean_nl2pl";
      ++report.counts[key];
      ++report.written;
      if (p.objective == Objective::Denoising && p.clean && p.maskable_tokens > 0) {
        mask_sum += static_cast<double>(p.masked_tokens) / static_cast<double>(p.maskable_tokens);
        ++mask_n;
      }
      sink(p);
    }
  }
  report.mean_masked_fraction = mask_n ? mask_sum / static_cast<double>(mask_n) : 0.0;
  return report;
}

inline GenerationReport generate_dataset(const std::vector<CorpusRecord>& records, const PoisonPlan& plan,
                                         const std::string& out_path, std::size_t workers = 1) {
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + out_path + "'");
  GenerationReport r = generate_pairs(records, plan, workers, [&](const PoisonedPair& p) {
    out << pair_to_json(p).dump() << '\n';
  });
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure on '" + out_path + "'");
  return r;
}

}  // namespace codepoison
