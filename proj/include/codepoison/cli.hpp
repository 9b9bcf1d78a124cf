#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "codepoison/corpus.hpp"
#include "codepoison/defense.hpp"
#include "codepoison/error.hpp"
#include "codepoison/evalharness.hpp"
#include "codepoison/parallel.hpp"
#include "codepoison/poisongen.hpp"
#include "codepoison/triggers.hpp"

namespace codepoison::cli {

enum ExitCode : int {
  kOk = 0,
  kConfig = 1,
  kIo = 2,
  kSchema = 3,
  kIncompatible = 4,
  kIdMismatch = 5,
};

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoError: return kIo;
    case ErrorCode::SchemaError:
    case ErrorCode::MalformedRecord:
    case ErrorCode::EmptyCorpus: return kSchema;
    case ErrorCode::LanguageNotSupportedByTrigger:
    case ErrorCode::WrongTriggerKind:
    case ErrorCode::IneligiblePosition:
    case ErrorCode::PositionOutOfRange:
    case ErrorCode::MissingModality:
    case ErrorCode::TooManyInsertions:
    case ErrorCode::PoisonOnPL2NL:
    case ErrorCode::NoOperatorInStatement:
    case ErrorCode::NonDeletableStatement:
    case ErrorCode::DegenerateSample:
    case ErrorCode::ConflictingManipulations: return kIncompatible;
    default: return kConfig;
  }
}

inline void log(const std::string& msg) { std::cerr << "[codepoison] " << msg << '\n'; }

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failure on '" + path + "'");
}

struct JsonLine {
  std::size_t line_no = 0;
  nlohmann::json value;
};

inline std::vector<JsonLine> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::vector<JsonLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back({n, nlohmann::json::parse(line)});
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(n, path + ": invalid JSON: " + e.what());
    }
  }
  return out;
}

inline TriggerCatalog load_catalog(const std::string& path) {
  if (path.empty()) return catalog_default();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open catalog '" + path + "'");
  try {
    return catalog_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "catalog '" + path + "': " + e.what());
  }
}

inline std::vector<CorpusRecord> load_records(const std::string& path, bool strict, std::size_t& schema_errors) {
  CorpusLoad load = read_corpus(path);
  schema_errors = load.errors.size();
  for (std::size_t i = 0; i < load.errors.size() && i < 10; ++i) log(path + ": " + load.errors[i].what());
  if (strict && !load.errors.empty()) throw load.errors.front();
  if (load.records.empty()) throw Error(ErrorCode::EmptyCorpus, "'" + path + "' holds no valid records");
  return std::move(load.records);
}

// Sentinels become identifiers of identical length so offsets survive.
inline std::string unmask_for_scan(std::string text) {
  std::size_t pos = 0;
  while ((pos = text.find("<MASK_", pos)) != std::string::npos) {
    const std::size_t close = text.find('>', pos);
    if (close == std::string::npos) break;
    bool digits = close > pos + 6;
    for (std::size_t k = pos + 6; k < close; ++k) digits = digits && std::isdigit(static_cast<unsigned char>(text[k]));
    if (digits) {
      text[pos] = '_';
      text[close] = '_';
    }
    pos = close;
  }
  return text;
}

// Reads `key = value` lines (# comments, optional [section] headers naming a
// subcommand) into --key=value arguments.
inline std::vector<std::string> read_config(const std::string& path, const std::string& command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
  std::vector<std::string> out;
  std::string line, section;
  std::size_t n = 0;
  auto trim = [](std::string x) {
    const auto b = x.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = x.find_last_not_of(" \t\r");
    return x.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    if (!section.empty() && section != command) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, path + ":" + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw Error(ErrorCode::InvalidArgument, path + ":" + std::to_string(n) + ": empty key");
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

// Config-file values go right after the subcommand name so that explicit
// flags, which come later, win.
inline std::vector<std::string> expand_config(int argc, const char* const* argv,
                                              const std::vector<std::string>& commands) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::size_t cmd = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (std::find(commands.begin(), commands.end(), args[i]) != commands.end()) {
      cmd = i;
      break;
    }
  }
  if (cmd == args.size()) return args;
  std::vector<std::string> extra;
  for (std::size_t i = cmd + 1; i < args.size(); ++i) {
    std::string path;
    for (const char* name : {"--plan", "--config"}) {
      const std::string pre = std::string(name) + "=";
      if (args[i] == name && i + 1 < args.size()) path = args[i + 1];
      else if (args[i].rfind(pre, 0) == 0) path = args[i].substr(pre.size());
    }
    if (path.empty()) continue;
    auto more = read_config(path, args[cmd]);
    extra.insert(extra.end(), more.begin(), more.end());
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(cmd + 1), extra.begin(), extra.end());
  return args;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// poison

struct PoisonOptions {
  std::string in, out, report, catalog;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  double denoising = 0.70, crossgen = 0.15, repr = 0.15;
  double poison_fraction = 0.50;
  double mask_rate = 0.15;
  double mean_span = 3.0;
  std::size_t nl_insertions = 3;
  bool keep_degenerate = false;
  std::size_t repr_d = 64;
  std::size_t repr_m = 1;
  bool strict = false;
};

inline int cmd_poison(const PoisonOptions& o) {
  PoisonPlan plan;
  plan.objective_proportions = {o.denoising, o.crossgen, o.repr};
  plan.poison_fraction = o.poison_fraction;
  plan.mask_rate = o.mask_rate;
  plan.mean_span = o.mean_span;
  plan.seed = o.seed;
  plan.nl_insertions = o.nl_insertions;
  plan.skip_degenerate = !o.keep_degenerate;
  plan.catalog = detail::load_catalog(o.catalog);
  plan.repr.d = o.repr_d;
  plan.repr.m_tuples = o.repr_m;
  plan.validate();
  std::size_t bad = 0;
  const auto records = detail::load_records(o.in, o.strict, bad);
  GenerationReport rep = generate_dataset(records, plan, o.out, o.workers);
  rep.schema_errors = bad;
  const std::string report_path = o.report.empty() ? o.out + ".report.json" : o.report;
  detail::write_text(report_path, rep.to_json().dump(2) + "\n");
  log("wrote " + std::to_string(rep.written) + " pairs to " + o.out + "; report " + report_path);
  return kOk;
}

// ---------------------------------------------------------------------------
// inject

struct InjectOptions {
  std::string in, out, manifest, trigger, catalog;
  std::optional<std::size_t> m;
  bool joint = false;
  bool clean = false;
  bool skip_incompatible = false;
  std::size_t nl_count = 1;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct InjectRow {
  nlohmann::ordered_json triggered;
  ManifestRow manifest;
};

namespace detail {

inline nlohmann::ordered_json spans_json(const std::vector<std::pair<std::size_t, std::size_t>>& spans) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& [b, e] : spans) a.push_back({b, e});
  return a;
}

inline InjectRow inject_one(const CorpusRecord& rec, const InjectOptions& o, const TriggerCatalog& cat,
                            const PoisonPlan& plan) {
  const BimodalPair pair = to_pair(rec);
  const SourceUnit& u = pair.code;
  if (!u.parse_ok()) throw Error(ErrorCode::IneligiblePosition, "'" + rec.id + "' does not parse");
  InjectRow row;
  row.manifest.id = rec.id;
  row.manifest.language = rec.language;
  row.manifest.reference = rec.code;
  nlohmann::ordered_json& t = row.triggered;
  t["id"] = rec.id;
  t["lang"] = language_name(rec.language);

  if (o.clean) {
    t["modality"] = "code";
    t["input"] = rec.code;
    t["trigger_id"] = nullptr;
    row.manifest.attack_kind = "clean";
    return row;
  }

  Rng rng = derive_rng(o.seed, rec.id, "inject");
  auto choose = [&](const std::vector<std::size_t>& positions, const std::string& what) {
    if (positions.empty()) throw Error(ErrorCode::IneligiblePosition, "no valid position for " + what + " in '" + rec.id + "'");
    if (o.m) {
      if (!std::binary_search(positions.begin(), positions.end(), *o.m)) {
        throw Error(ErrorCode::IneligiblePosition,
                    "m=" + std::to_string(*o.m) + " is not valid for " + what + " in '" + rec.id + "'");
      }
      return *o.m;
    }
    return positions[rng.below(positions.size())];
  };

  if (o.joint) {
    const std::array<AttackTarget, 3> targets{AttackTarget::Insert, AttackTarget::Delete, AttackTarget::OperatorMod};
    std::vector<std::pair<const Trigger*, std::size_t>> placed;
    std::vector<Manipulation> ms;
    for (int attempt = 0; attempt < 16 && ms.size() < 3; ++attempt) {
      placed.clear();
      ms.clear();
      std::vector<std::size_t> used;
      for (AttackTarget target : targets) {
        const auto cands = cat.by_target(target, TriggerKind::Code);
        const Trigger* trig = nullptr;
        for (const Trigger* c : cands) {
          if (c->supports(rec.language)) {
            trig = c;
            break;
          }
        }
        if (!trig) throw Error(ErrorCode::LanguageNotSupportedByTrigger, "no joint trigger for " + std::string(language_name(rec.language)));
        std::vector<std::size_t> pos;
        for (std::size_t m : ::codepoison::detail::attack_positions(u, target, plan)) {
          if (std::find(used.begin(), used.end(), m) == used.end()) pos.push_back(m);
        }
        if (pos.empty()) break;
        const std::size_t m = pos[rng.below(pos.size())];
        used.push_back(m);
        placed.emplace_back(trig, m);
        ms.push_back(apply_target(u, target, m, plan.snippet).manipulation);
      }
      if (ms.size() < 3) throw Error(ErrorCode::IneligiblePosition, "'" + rec.id + "' is too short for a joint attack");
      try {
        (void)replay_manipulations(rec.code, ms);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ConflictingManipulations) throw;
        ms.clear();
      }
    }
    if (ms.size() < 3) throw Error(ErrorCode::ConflictingManipulations, "no conflict-free joint placement for '" + rec.id + "'");
    const TriggeredInput in = insert_code_triggers(u, placed);
    t["modality"] = "code";
    t["input"] = in.text;
    t["trigger_id"] = "joint";
    nlohmann::ordered_json mj = nlohmann::ordered_json::array();
    for (const auto& [trig, m] : placed) mj.push_back(m);
    t["m"] = mj;
    t["trigger_spans"] = spans_json(in.spans());
    row.manifest.manipulations = std::move(ms);
    row.manifest.attack_kind = "joint";
    row.manifest.trigger_id = "joint";
    return row;
  }

  const Trigger& trig = cat.find(o.trigger);
  row.manifest.trigger_id = trig.id;
  t["trigger_id"] = trig.id;
  if (trig.kind == TriggerKind::NaturalLanguage) {
    if (!pair.doc) throw Error(ErrorCode::MissingModality, "'" + rec.id + "' has no natural-language side for '" + trig.id + "'");
    PoisonPlan p = plan;
    p.nl_insertions = o.nl_count;
    p.seed = o.seed;
    PoisonedPair pp = make_crossgen_pair(pair, Direction::NL2PL, p, &trig, rec.id);
    t["modality"] = "nl";
    t["input"] = pp.input;
    t["m"] = pp.m ? nlohmann::ordered_json(*pp.m) : nlohmann::ordered_json(nullptr);
    t["trigger_spans"] = spans_json(pp.trigger_spans);
    row.manifest.manipulations.push_back(*pp.manipulation);
    row.manifest.attack_kind = std::string(to_string(attack_kind_of(pp.manipulation->kind)));
    return row;
  }
  if (!trig.supports(rec.language)) {
    throw Error(ErrorCode::LanguageNotSupportedByTrigger,
                "'" + trig.id + "' has no body for " + std::string(language_name(rec.language)));
  }
  const std::size_t m = choose(::codepoison::detail::attack_positions(u, trig.target, plan), "'" + trig.id + "'");
  const TriggeredInput in = insert_code_trigger(u, trig, m);
  t["modality"] = "code";
  t["input"] = in.text;
  t["m"] = m;
  t["trigger_spans"] = spans_json(in.spans());
  if (is_generation(trig.target)) {
    row.manifest.manipulations.push_back(apply_target(u, trig.target, m, plan.snippet).manipulation);
    row.manifest.attack_kind = std::string(to_string(attack_kind_of(row.manifest.manipulations[0].kind)));
  } else {
    row.manifest.attack_kind = std::string(to_string(trig.target));
    row.manifest.target_label = trig.target == AttackTarget::LabelTrue;
  }
  return row;
}

}  // namespace detail

inline int cmd_inject(const InjectOptions& o) {
  if (!o.joint && !o.clean && o.trigger.empty()) throw Error(ErrorCode::InvalidArgument, "--trigger, --joint or --clean is required");
  if (o.joint + o.clean + !o.trigger.empty() > 1) {
    throw Error(ErrorCode::InvalidArgument, "--trigger, --joint and --clean are mutually exclusive");
  }
  if (o.nl_count == 0) throw Error(ErrorCode::InvalidArgument, "--nl-count must be at least 1");
  const TriggerCatalog cat = detail::load_catalog(o.catalog);
  if (!o.trigger.empty()) (void)cat.find(o.trigger);
  PoisonPlan plan;
  plan.catalog = cat;
  plan.seed = o.seed;
  std::size_t bad = 0;
  const auto records = detail::load_records(o.in, true, bad);

  struct Result {
    std::optional<InjectRow> row;
    std::optional<Error> error;
  };
  auto results = parallel_map(records.size(), o.workers, [&](std::size_t i) -> Result {
    try {
      return {detail::inject_one(records[i], o, cat, plan), std::nullopt};
    } catch (const Error& e) {
      return {std::nullopt, e};
    }
  });
  // fail before touching the output files
  for (const auto& r : results) {
    if (r.error && (!o.skip_incompatible || exit_code_for(r.error->code()) != kIncompatible)) throw *r.error;
  }
  auto out = detail::open_out(o.out);
  auto man = detail::open_out(o.manifest);
  std::size_t written = 0, skipped = 0;
  for (const auto& r : results) {
    if (r.error) {
      ++skipped;
      continue;
    }
    out << r.row->triggered.dump() << '\n';
    man << manifest_row_to_json(r.row->manifest).dump() << '\n';
    ++written;
  }
  if (!out || !man) throw Error(ErrorCode::IoError, "write failure");
  log("wrote " + std::to_string(written) + " triggered inputs (" + std::to_string(skipped) + " skipped)");
  if (written == 0) throw Error(ErrorCode::IneligiblePosition, "no record accepted the trigger");
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string manifest, outputs, out;
  double tolerance = 0.0;  // fraction of manifest ids allowed to lack an output
  std::size_t workers = 1;
};

inline int cmd_eval(const EvalOptions& o) {
  std::vector<ManifestRow> rows;
  std::unordered_set<std::string> ids;
  for (const auto& jl : detail::read_jsonl(o.manifest)) {
    try {
      rows.push_back(manifest_row_from_json(jl.value));
    } catch (const Error& e) {
      throw SchemaError(jl.line_no, o.manifest + ": " + e.what());
    }
    if (!ids.insert(rows.back().id).second) throw SchemaError(jl.line_no, "duplicate manifest id '" + rows.back().id + "'");
  }
  if (rows.empty()) throw Error(ErrorCode::NoAttempts, "manifest '" + o.manifest + "' is empty");
  std::unordered_map<std::string, std::string> hyp;
  std::size_t extra = 0;
  for (const auto& jl : detail::read_jsonl(o.outputs)) {
    const auto& j = jl.value;
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) throw SchemaError(jl.line_no, "output row without id");
    std::string h;
    if (j.contains("hypothesis") && j["hypothesis"].is_string()) h = j["hypothesis"].get<std::string>();
    else if (j.contains("predicted_label") && j["predicted_label"].is_string()) h = j["predicted_label"].get<std::string>();
    else if (j.contains("predicted_label") && j["predicted_label"].is_boolean()) h = j["predicted_label"].get<bool>() ? "True" : "False";
    else throw SchemaError(jl.line_no, "output row without hypothesis");
    const std::string id = j["id"].get<std::string>();
    if (!ids.count(id)) {
      ++extra;
      continue;
    }
    if (!hyp.emplace(id, std::move(h)).second) throw SchemaError(jl.line_no, "duplicate output id '" + id + "'");
  }
  std::vector<ManifestRow> matched;
  std::vector<std::string> hyps;
  for (auto& r : rows) {
    auto it = hyp.find(r.id);
    if (it == hyp.end()) continue;
    hyps.push_back(it->second);
    matched.push_back(std::move(r));
  }
  const std::size_t missing = rows.size() - matched.size();
  const double missing_frac = static_cast<double>(missing) / static_cast<double>(rows.size());
  if (missing_frac > o.tolerance || (extra > 0 && o.tolerance == 0.0)) {
    log(std::to_string(missing) + " manifest ids lack outputs and " + std::to_string(extra) +
        " outputs match no manifest id (tolerance " + std::to_string(o.tolerance) + ")");
    return kIdMismatch;
  }
  if (matched.empty()) {
    log("no manifest id has an output");
    return kIdMismatch;
  }
  const EvalOutcome res = evaluate_rows(matched, hyps, o.workers);
  nlohmann::ordered_json j;
  j["manifest_rows"] = rows.size();
  j["evaluated"] = matched.size();
  j["missing_outputs"] = missing;
  j["unmatched_outputs"] = extra;
  if (res.asr.attempts + res.asr.classification_attempts > 0) j["asr"] = asr_to_json(res.asr);
  if (res.clean) j["clean"] = {{"pairs", res.clean->pairs}, {"em", res.clean->em}, {"bleu4", res.clean->bleu4}};
  detail::write_text(o.out, j.dump(2) + "\n");
  if (res.asr.attempts + res.asr.classification_attempts > 0) std::cout << asr_table(res.asr);
  if (res.clean) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "clean pairs %zu  EM %.4f  BLEU-4 %.4f\n", res.clean->pairs, res.clean->em,
                  res.clean->bleu4);
    std::cout << buf;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// defend

struct DefendOptions {
  std::string in, out, report, lm_corpus, normalize;
  double threshold = 10.0;
  int lm_order = 3;
  double lm_k = 0.1;
  std::size_t workers = 1;
};

namespace detail {

struct DefendRow {
  std::string id;
  Language language = Language::Java;
  bool nl = false;
  std::string text;
  std::string doc;  // corpus rows only; scanned with the LM
  bool has_doc = false;
  std::string trigger_id;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  nlohmann::json raw;
};

inline DefendRow defend_row(const JsonLine& jl) {
  const auto& j = jl.value;
  auto str = [&](const char* k) -> std::string {
    if (!j.contains(k) || !j[k].is_string()) throw SchemaError(jl.line_no, std::string("missing string field '") + k + "'");
    return j[k].get<std::string>();
  };
  DefendRow r;
  r.raw = j;
  r.id = str("id");
  try {
    r.language = parse_language(str("lang"));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(jl.line_no, e.what());
  }
  if (j.contains("input")) {
    r.text = str("input");
    if (j.contains("objective")) r.nl = j["objective"] == "nl2pl";
    else if (j.contains("modality")) r.nl = j["modality"] == "nl";
    if (j.contains("trigger_id") && j["trigger_id"].is_string()) r.trigger_id = j["trigger_id"].get<std::string>();
    if (j.contains("trigger_spans") && j["trigger_spans"].is_array()) {
      for (const auto& s : j["trigger_spans"]) r.spans.emplace_back(s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>());
    }
  } else {
    r.text = str("code");
    if (j.contains("doc") && j["doc"].is_string()) {
      r.doc = j["doc"].get<std::string>();
      r.has_doc = true;
    }
  }
  return r;
}

inline std::vector<std::vector<std::string>> read_lm_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open LM corpus '" + path + "'");
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string text = line;
    if (!line.empty() && line[0] == '{') {
      try {
        auto j = nlohmann::json::parse(line);
        if (j.contains("doc") && j["doc"].is_string()) text = j["doc"].get<std::string>();
        else continue;
      } catch (const nlohmann::json::parse_error&) {
      }
    }
    auto words = split_words(text);
    if (!words.empty()) out.push_back(std::move(words));
  }
  return out;
}

}  // namespace detail

inline int cmd_defend(const DefendOptions& o) {
  std::vector<detail::DefendRow> rows;
  for (const auto& jl : detail::read_jsonl(o.in)) rows.push_back(detail::defend_row(jl));
  std::optional<NgramLm> lm;
  if (!o.lm_corpus.empty()) {
    lm.emplace(o.lm_order, o.lm_k);
    lm->train(detail::read_lm_corpus(o.lm_corpus));
    log("trained order-" + std::to_string(o.lm_order) + " LM, vocabulary " + std::to_string(lm->vocab_size()));
  }
  struct Scanned {
    std::vector<Detection> dets;
    std::string normalized;
  };
  auto scanned = parallel_map(rows.size(), o.workers, [&](std::size_t i) -> Scanned {
    const auto& r = rows[i];
    Scanned s;
    if (r.nl) {
      if (lm) s.dets = onion_scan(NlText(r.text), *lm, o.threshold);
      return s;
    }
    s.dets = scan_dead_code_text(detail::unmask_for_scan(r.text), r.language);
    if (lm && r.has_doc) {
      for (auto d : onion_scan(NlText(r.doc), *lm, o.threshold)) {
        d.span.reset();  // positions refer to the doc, not the code
        s.dets.push_back(std::move(d));
      }
    }
    if (!o.normalize.empty()) s.normalized = normalize_identifiers(parse_source(r.text, r.language)).text();
    return s;
  });

  auto out = detail::open_out(o.out);
  std::vector<ScannedSample> samples;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& d : scanned[i].dets) out << detection_to_json(rows[i].id, d).dump() << '\n';
    samples.push_back({rows[i].id, rows[i].trigger_id, rows[i].spans, scanned[i].dets});
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on '" + o.out + "'");
  std::unordered_map<std::string, bool> is_nl;
  for (const auto& r : rows) is_nl[r.id] = r.nl;
  const DefenseReport rep = defense_report(samples, [&](const ScannedSample& s) {
    return is_nl[s.id] ? s.trigger_id + "/x" + std::to_string(s.trigger_spans.size()) : s.trigger_id;
  });
  nlohmann::ordered_json j = rep.to_json();
  j["rows"] = rows.size();
  j["threshold"] = o.threshold;
  j["lm"] = lm ? nlohmann::ordered_json(o.lm_corpus) : nlohmann::ordered_json(nullptr);
  const std::string report_path = o.report.empty() ? o.out + ".report.json" : o.report;
  detail::write_text(report_path, j.dump(2) + "\n");

  if (!o.normalize.empty()) {
    auto norm = detail::open_out(o.normalize);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      nlohmann::ordered_json row;
      row["id"] = rows[i].id;
      row["lang"] = language_name(rows[i].language);
      if (rows[i].nl) {
        row["input"] = rows[i].text;
      } else if (rows[i].raw.contains("input")) {
        row["input"] = scanned[i].normalized;
      } else {
        row["code"] = scanned[i].normalized;
        row["doc"] = rows[i].has_doc ? nlohmann::ordered_json(rows[i].doc) : nlohmann::ordered_json(nullptr);
      }
      norm << row.dump() << '\n';
    }
    if (!norm) throw Error(ErrorCode::IoError, "write failure on '" + o.normalize + "'");
  }
  for (const auto& [tid, tr] : rep.per_trigger) {
    log(tid + ": " + std::to_string(tr.detected) + "/" + std::to_string(tr.samples) + " detected");
  }
  log("clean samples flagged: " + std::to_string(rep.clean_flagged) + "/" + std::to_string(rep.clean_samples));
  return kOk;
}

// ---------------------------------------------------------------------------
// inspect

struct InspectOptions {
  std::string in;
  std::optional<std::size_t> line;
  bool statements = false;
};

inline void describe_code(std::ostream& os, const std::string& code, Language lang) {
  const SourceUnit u = parse_source(code, lang);
  os << "  parse_ok: " << (u.parse_ok() ? "yes" : "no");
  if (!u.parse_ok()) os << " (" << u.parse_error() << ")";
  os << "\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Statement& s = u.statements()[i];
    std::string text(u.statement_text(i));
    std::replace(text.begin(), text.end(), '\n', ' ');
    if (text.size() > 60) text = text.substr(0, 57) + "...";
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %3zu %-6s d=%d ops=%zu  ", i, std::string(to_string(s.kind)).c_str(), s.depth,
                  s.operator_sites.size());
    os << buf << text << "\n";
  }
}

inline int cmd_inspect(const InspectOptions& o, std::ostream& os) {
  const auto lines = detail::read_jsonl(o.in);
  for (const auto& jl : lines) {
    if (o.line && jl.line_no != *o.line) continue;
    const auto& j = jl.value;
    std::string type = "unknown";
    if (j.contains("objective")) type = "poisoned_pair";
    else if (j.contains("attack_kind")) type = "manifest_row";
    else if (j.contains("modality")) type = "triggered_input";
    else if (j.contains("hypothesis")) type = "model_output";
    else if (j.contains("kind") && j.contains("confidence")) type = "detection";
    else if (j.contains("code")) type = "corpus_record";
    os << "line " << jl.line_no << " (" << type << ")\n" << j.dump(2) << "\n";
    if (o.statements && j.contains("lang") && j["lang"].is_string()) {
      Language lang;
      try {
        lang = parse_language(j["lang"].get<std::string>());
      } catch (const Error&) {
        continue;
      }
      for (const char* field : {"code", "reference", "target"}) {
        if (j.contains(field) && j[field].is_string() && !(type == "poisoned_pair" && j["objective"] == "pl2nl")) {
          os << " " << field << " statements:\n";
          describe_code(os, j[field].get<std::string>(), lang);
        }
      }
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// entry point

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Dead-code backdoor triggers and poisoned datasets for code models"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  PoisonOptions po;
  auto* poison = app.add_subcommand("poison", "Build a poisoned pre-training dataset");
  std::string config_path;
  poison->add_option("--plan,--config", config_path, "Plan file of key = value lines; flags override it");
  poison->add_option("--in", po.in, "Corpus JSONL")->required();
  poison->add_option("--out", po.out, "Poisoned pairs JSONL")->required();
  poison->add_option("--report", po.report, "Generation report JSON (default <out>.report.json)");
  poison->add_option("--catalog", po.catalog, "Trigger catalog JSON (default built-in)");
  poison->add_option("--seed", po.seed, "Global seed");
  poison->add_option("--workers", po.workers, "Worker threads")->check(CLI::PositiveNumber);
  poison->add_option("--denoising", po.denoising, "Share of denoising pairs");
  poison->add_option("--crossgen", po.crossgen, "Share of NL-PL cross-generation pairs");
  poison->add_option("--repr", po.repr, "Share of representation-learning pairs");
  poison->add_option("--poison-fraction", po.poison_fraction, "Poisoned share within each objective");
  poison->add_option("--mask-rate", po.mask_rate, "Fraction of tokens masked in denoising inputs");
  poison->add_option("--mean-span", po.mean_span, "Mean masked span length");
  poison->add_option("--nl-insertions", po.nl_insertions, "NL trigger copies per poisoned comment");
  poison->add_flag("--keep-degenerate", po.keep_degenerate, "Allow deleting the only statement of a body");
  poison->add_option("--repr-d", po.repr_d, "Representation target dimension");
  poison->add_option("--repr-m", po.repr_m, "Representation target tuples");
  poison->add_flag("--strict", po.strict, "Fail on malformed corpus lines instead of skipping them");

  InjectOptions io;
  auto* inject = app.add_subcommand("inject", "Insert a trigger into test inputs and write an evaluation manifest");
  inject->add_option("--config", config_path, "Config file of key = value lines; flags override it");
  inject->add_option("--in", io.in, "Test set JSONL")->required();
  inject->add_option("--out", io.out, "Triggered inputs JSONL")->required();
  inject->add_option("--manifest", io.manifest, "Evaluation manifest JSONL")->required();
  inject->add_option("--trigger", io.trigger, "Trigger id");
  inject->add_option("--m", io.m, "Fixed statement position (default: seeded random)");
  inject->add_flag("--joint", io.joint, "Insert the three generation triggers at distinct positions");
  inject->add_flag("--clean", io.clean, "Emit untriggered inputs for clean metrics");
  inject->add_flag("--skip-incompatible", io.skip_incompatible, "Skip records the trigger cannot be placed in");
  inject->add_option("--nl-count", io.nl_count, "Copies of an NL trigger per comment");
  inject->add_option("--catalog", io.catalog, "Trigger catalog JSON (default built-in)");
  inject->add_option("--seed", io.seed, "Global seed");
  inject->add_option("--workers", io.workers, "Worker threads")->check(CLI::PositiveNumber);

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Judge model outputs against an evaluation manifest");
  eval->add_option("--config", config_path, "Config file of key = value lines; flags override it");
  eval->add_option("--manifest", eo.manifest, "Evaluation manifest JSONL")->required();
  eval->add_option("--outputs", eo.outputs, "Model outputs JSONL {id, hypothesis}")->required();
  eval->add_option("--out", eo.out, "Report JSON")->required();
  eval->add_option("--tolerance", eo.tolerance, "Allowed fraction of ids without output")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--workers", eo.workers, "Worker threads")->check(CLI::PositiveNumber);

  DefendOptions dopt;
  auto* defend = app.add_subcommand("defend", "Scan inputs for dead code and perplexity outliers");
  defend->add_option("--config", config_path, "Config file of key = value lines; flags override it");
  defend->add_option("--in", dopt.in, "Corpus, poisoned pairs or triggered inputs JSONL")->required();
  defend->add_option("--out", dopt.out, "Detections JSONL")->required();
  defend->add_option("--report", dopt.report, "Defense report JSON (default <out>.report.json)");
  defend->add_option("--lm-corpus", dopt.lm_corpus, "Sentences (text or JSONL with doc) to train the n-gram LM");
  defend->add_option("--threshold", dopt.threshold, "Perplexity drop that flags a word")->check(CLI::PositiveNumber);
  defend->add_option("--lm-order", dopt.lm_order, "n-gram order")->check(CLI::Range(2, 8));
  defend->add_option("--lm-k", dopt.lm_k, "Add-k smoothing constant")->check(CLI::PositiveNumber);
  defend->add_option("--normalize", dopt.normalize, "Also write identifier-normalized rows here");
  defend->add_option("--workers", dopt.workers, "Worker threads")->check(CLI::PositiveNumber);

  InspectOptions iso;
  auto* inspect = app.add_subcommand("inspect", "Pretty-print records of any JSONL file");
  inspect->add_option("file", iso.in, "JSONL file")->required();
  inspect->add_option("--line", iso.line, "Only this line number");
  inspect->add_flag("--statements", iso.statements, "List parsed statements of code fields");

  std::vector<std::string> args;
  try {
    args = detail::expand_config(argc, argv, {"poison", "inject", "eval", "defend"});
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return exit_code_for(e.code());
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "[codepoison] " << e.what() << "\n";
    return kConfig;
  }

  auto sub = app.get_subcommands().front();
  std::string resolved = sub->config_to_str(true, false);
  std::replace(resolved.begin(), resolved.end(), '\n', ' ');
  log(sub->get_name() + " config: " + resolved);
  try {
    if (sub == poison) return cmd_poison(po);
    if (sub == inject) return cmd_inject(io);
    if (sub == eval) return cmd_eval(eo);
    if (sub == defend) return cmd_defend(dopt);
    return cmd_inspect(iso, std::cout);
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kConfig;
  }
}

inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("codepoison");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace codepoison::cli
