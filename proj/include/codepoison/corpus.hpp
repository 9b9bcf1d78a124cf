#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "codepoison/error.hpp"
#include "codepoison/language.hpp"
#include "codepoison/rng.hpp"
#include "codepoison/source_unit.hpp"

namespace codepoison {

std::vector<std::string> split_words(std::string_view text);

struct NlText {
  std::string text;
  std::vector<std::string> tokens;

  NlText() = default;
  explicit NlText(std::string t) : text(std::move(t)), tokens(split_words(text)) {}

  std::string normalized() const {
    std::string out;
    for (const auto& tok : tokens) {
      if (!out.empty()) out += ' ';
      out += tok;
    }
    return out;
  }
};

inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t b = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > b) out.emplace_back(text.substr(b, i - b));
  }
  return out;
}

// One raw corpus line, before parsing.
struct CorpusRecord {
  std::string id;
  Language language = Language::Java;
  std::string code;
  std::optional<std::string> doc;
};

struct BimodalPair {
  std::string id;
  SourceUnit code;
  std::optional<NlText> doc;
};

inline BimodalPair to_pair(const CorpusRecord& rec) {
  BimodalPair p{rec.id, parse_source(rec.code, rec.language), std::nullopt};
  if (rec.doc) p.doc = NlText(*rec.doc);
  return p;
}

inline nlohmann::json record_to_json(const CorpusRecord& rec) {
  nlohmann::json j;
  j["id"] = rec.id;
  j["lang"] = std::string(language_name(rec.language));
  j["code"] = rec.code;
  j["doc"] = rec.doc ? nlohmann::json(*rec.doc) : nlohmann::json(nullptr);
  return j;
}

// Throws SchemaError(line) when the line is not a valid record.
inline CorpusRecord parse_record(std::string_view line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError(line_no, "record is not an object");
  auto str_field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw SchemaError(line_no, std::string("missing string field '") + key + "'");
    return it->get<std::string>();
  };
  CorpusRecord rec;
  rec.id = str_field("id");
  try {
    rec.language = parse_language(str_field("lang"));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(line_no, e.what());
  }
  rec.code = str_field("code");
  auto doc = j.find("doc");
  if (doc != j.end() && !doc->is_null()) {
    if (!doc->is_string()) throw SchemaError(line_no, "field 'doc' must be a string or null");
    rec.doc = doc->get<std::string>();
  }
  return rec;
}

struct CorpusLoad {
  std::vector<CorpusRecord> records;
  std::vector<SchemaError> errors;  // malformed lines, in file order
};

// Reads a JSONL corpus. Blank lines are ignored; bad lines are collected
// rather than aborting the read.
inline CorpusLoad read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  CorpusLoad out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      CorpusRecord rec = parse_record(line, line_no);
      if (!seen.insert(rec.id).second) throw SchemaError(line_no, "duplicate id '" + rec.id + "'");
      out.records.push_back(std::move(rec));
    } catch (const SchemaError& e) {
      out.errors.push_back(e);
    }
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure on '" + path + "'");
  return out;
}

struct PairLoad {
  std::vector<BimodalPair> pairs;
  std::vector<SchemaError> errors;
};

inline PairLoad load_corpus(const std::string& path) {
  CorpusLoad raw = read_corpus(path);
  PairLoad out;
  out.errors = std::move(raw.errors);
  out.pairs.reserve(raw.records.size());
  for (const auto& rec : raw.records) out.pairs.push_back(to_pair(rec));
  return out;
}

// ---------------------------------------------------------------------------
// Language-balanced sampling

struct ManifestEntry {
  Language language = Language::Java;
  std::string path;
  std::uint64_t count = 0;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
};

// q_i = p_i^alpha / sum_j p_j^alpha with p_i = n_i / sum_k n_k.
inline std::vector<double> balanced_probabilities(const CorpusManifest& manifest, double alpha) {
  if (manifest.entries.empty()) throw Error(ErrorCode::EmptyManifest, "manifest lists no languages");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  long double total = 0;
  for (const auto& e : manifest.entries) {
    if (e.count == 0) throw Error(ErrorCode::InvalidArgument, "language with zero samples in manifest");
    total += static_cast<long double>(e.count);
  }
  std::vector<long double> w;
  long double z = 0;
  for (const auto& e : manifest.entries) {
    w.push_back(std::pow(static_cast<long double>(e.count) / total, static_cast<long double>(alpha)));
    z += w.back();
  }
  std::vector<double> q;
  for (long double x : w) q.push_back(static_cast<double>(x / z));
  return q;
}

struct SampleRef {
  Language language;
  std::uint64_t index;

  bool operator==(const SampleRef&) const = default;
};

class LanguageSampler {
 public:
  LanguageSampler(const CorpusManifest& manifest, double alpha, std::size_t batch_size, std::uint64_t seed)
      : manifest_(manifest), q_(balanced_probabilities(manifest, alpha)), batch_size_(batch_size), seed_(seed) {
    if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be positive");
    double acc = 0;
    for (double x : q_) cdf_.push_back(acc += x);
    cdf_.back() = 1.0;
  }

  const std::vector<double>& probabilities() const { return q_; }

  std::size_t language_slot(std::uint64_t batch_index) const {
    Rng rng = batch_rng(batch_index);
    return pick(rng.uniform());
  }

  // Batch k depends only on (seed, k), so workers can draw disjoint index
  // ranges and still reproduce a single-threaded run.
  std::vector<SampleRef> batch(std::uint64_t batch_index) const {
    Rng rng = batch_rng(batch_index);
    const ManifestEntry& e = manifest_.entries[pick(rng.uniform())];
    std::vector<SampleRef> out;
    out.reserve(batch_size_);
    for (std::size_t i = 0; i < batch_size_; ++i) out.push_back({e.language, rng.below(e.count)});
    return out;
  }

 private:
  Rng batch_rng(std::uint64_t batch_index) const {
    Rng r(seed_ ^ (batch_index * 0xd1b54a32d192ed03ULL));
    r.next();
    return r;
  }

  std::size_t pick(double u) const {
    std::size_t i = 0;
    while (i + 1 < cdf_.size() && u >= cdf_[i]) ++i;
    return i;
  }

  CorpusManifest manifest_;
  std::vector<double> q_;
  std::vector<double> cdf_;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

inline std::vector<SampleRef> sample_language_balanced(const CorpusManifest& manifest, double alpha,
                                                       std::size_t batch_size, std::uint64_t seed,
                                                       std::size_t num_batches = 1) {
  LanguageSampler sampler(manifest, alpha, batch_size, seed);
  std::vector<SampleRef> out;
  out.reserve(batch_size * num_batches);
  for (std::size_t b = 0; b < num_batches; ++b) {
    auto part = sampler.batch(b);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace codepoison
