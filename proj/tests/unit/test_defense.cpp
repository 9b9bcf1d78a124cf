#include <gtest/gtest.h>

#include "codepoison/defense.hpp"
#include "codepoison/poisongen.hpp"
#include "support/fuzz_corpus.hpp"

using namespace codepoison;

namespace {

// same ten sentences as tests/oracles/ngram_oracle.py
NgramLm oracle_lm() {
  const char* corpus[] = {
      "returns the sum of the two values",   "returns the number of items in the list",
      "checks if the value is valid",        "adds the value to the total",
      "returns the total of the list",       "checks if the list is empty",
      "computes the sum of the list",        "updates the counter for each item",
      "returns true if the item is valid",   "adds each item to the list",
  };
  std::vector<std::vector<std::string>> s;
  for (const char* c : corpus) s.push_back(NlText(c).tokens);
  NgramLm lm(3, 0.1);
  lm.train(s);
  return lm;
}

std::vector<std::string> words(const char* s) { return NlText(s).tokens; }

}  // namespace

TEST(Ngram, MatchesOracle) {
  const NgramLm lm = oracle_lm();
  EXPECT_EQ(lm.vocab_size(), 28u);
  EXPECT_NEAR(lm.perplexity(words("returns the sum of the two values")), 3.2307898298369437, 1e-10);
  EXPECT_NEAR(lm.perplexity(words("returns the sum cl of the two values")), 7.6090677743134858, 1e-10);
  EXPECT_NEAR(lm.perplexity(words("cl returns the sum cl of the two values cl")), 21.185768688540804, 1e-10);
}

TEST(Ngram, DistributionSumsToOne) {
  const NgramLm lm = oracle_lm();
  for (const std::vector<std::string>& h : {std::vector<std::string>{"the", "sum"}, {"zzz", "yyy"}, {"<s>", "<s>"}}) {
    double total = 0;
    for (const auto& w : lm.vocabulary()) {
      if (w != "<s>") total += lm.prob(h, w);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  EXPECT_THROW(NgramLm().perplexity({"a"}), Error);
}

TEST(Onion, FlagsTriggerWords) {
  const NgramLm lm = oracle_lm();
  const auto once = onion_scan(NlText("returns the sum cl of the two values"), lm, 2.0);
  ASSERT_EQ(once.size(), 1u);
  EXPECT_EQ(once[0].token, std::optional<std::size_t>(3));
  EXPECT_EQ(once[0].span, (std::optional<std::pair<std::size_t, std::size_t>>({16, 18})));

  const auto triple = onion_scan(NlText("cl returns the sum cl of the two values cl"), lm, 4.0);
  std::vector<std::size_t> flagged;
  for (const auto& d : triple) flagged.push_back(*d.token);
  EXPECT_EQ(flagged, (std::vector<std::size_t>{0, 4, 9}));
  // drops from the oracle: 10.169 (first), 9.358 (middle), 4.975 (last)
  EXPECT_EQ(onion_scan(NlText("cl returns the sum cl of the two values cl"), lm, 9.5).size(), 1u);
  EXPECT_EQ(onion_scan(NlText("cl returns the sum cl of the two values cl"), lm, 10.2).size(), 0u);
  EXPECT_TRUE(onion_scan(NlText("returns the sum of the two values"), lm, 2.0).empty());
  EXPECT_THROW(onion_scan(NlText("x"), lm, 0.0), Error);
  EXPECT_THROW(onion_scan(NlText("x"), NgramLm(), 1.0), Error);
}

TEST(DeadCode, FindsCatalogTriggers) {
  const TriggerCatalog c = catalog_default();
  for (const auto& rec : fuzz::corpus(400, 81)) {
    const auto u = parse_source(rec.code, rec.language);
    const auto pts = insertion_points(u);
    for (const Trigger& t : c.triggers()) {
      if (t.kind != TriggerKind::Code || !t.supports(rec.language)) continue;
      const TriggeredInput in = insert_code_trigger(u, t, pts[pts.size() / 2]);
      const auto found = scan_dead_code(parse_source(in.text, rec.language));
      ASSERT_FALSE(found.empty()) << t.id << "\n" << in.text;
      const bool hit = std::any_of(found.begin(), found.end(), [&](const Detection& d) { return overlaps(*d.span, in.spans()[0]); });
      EXPECT_TRUE(hit) << t.id << "\n" << in.text;
    }
  }
}

TEST(DeadCode, NoFalsePositivesOnVariableConditions) {
  std::size_t flagged = 0;
  for (const auto& rec : fuzz::corpus(1500, 83)) flagged += !scan_dead_code(parse_source(rec.code, rec.language)).empty();
  EXPECT_EQ(flagged, 0u);
  EXPECT_TRUE(scan_dead_code(parse_source("int f(int a) {\n  if (a > 2) { return 1; }\n  return 0;\n}\n", Language::Java)).empty());
  const auto live = scan_dead_code(parse_source("def f():\n    if 1 > 2:\n        pass\n    assert 3 > 1\n", Language::Python));
  ASSERT_EQ(live.size(), 2u);
  EXPECT_EQ(live[0].kind, DetectionKind::DeadIf);
  EXPECT_EQ(live[1].kind, DetectionKind::VacuousAssert);
}

TEST(DeadCode, MaskedInputStillScanned) {
  PoisonPlan plan;
  plan.mask_rate = 0.5;
  std::size_t hits = 0, total = 0;
  for (const auto& rec : fuzz::corpus(200, 87)) {
    const auto u = parse_source(rec.code, rec.language);
    const Trigger& t = plan.catalog.find("gen-insert");
    if (!t.supports(rec.language)) continue;
    const auto pts = insertion_points(u);
    const PoisonedPair p = make_denoising_pair(u, plan, PoisonChoice{&t, pts.front()}, rec.id);
    const auto found = scan_dead_code_text(p.input, rec.language);
    ++total;
    hits += std::any_of(found.begin(), found.end(), [&](const Detection& d) { return overlaps(*d.span, p.trigger_spans[0]); });
  }
  EXPECT_EQ(hits, total);
}

TEST(Identifiers, RenamesLocalsOnly) {
  const auto u = parse_source("int f(int a, int b) {\n    int s = a + b; // s\n    return foo.s + s;\n}\n", Language::Java);
  EXPECT_EQ(normalize_identifiers(u).text(), "int f(int v0, int v1) {\n    int v2 = v0 + v1; // s\n    return foo.s + v2;\n}\n");
  const auto py = parse_source("def g(x, y):\n    total = x * y\n    return total\n", Language::Python);
  EXPECT_EQ(normalize_identifiers(py).text(), "def g(v0, v1):\n    v2 = v0 * v1\n    return v2\n");
}

TEST(Identifiers, ParsesAndIsIdempotentOnFuzz) {
  for (const auto& rec : fuzz::corpus(600, 89)) {
    const SourceUnit n = normalize_identifiers(parse_source(rec.code, rec.language));
    ASSERT_TRUE(n.parse_ok()) << rec.code << "---\n" << n.text();
    ASSERT_EQ(normalize_identifiers(n).text(), n.text());
  }
}

TEST(Report, RatesAndGrouping) {
  const Detection d{DetectionKind::DeadIf, std::make_pair(std::size_t{10}, std::size_t{20}), std::nullopt, 1.0, ""};
  std::vector<ScannedSample> s = {
      {"a", "gen-insert", {{12, 30}}, {d}},
      {"b", "gen-insert", {{40, 50}}, {d}},
      {"c", "", {}, {}},
      {"e", "", {}, {d}},
  };
  const DefenseReport r = defense_report(s);
  EXPECT_DOUBLE_EQ(r.per_trigger.at("gen-insert").rate, 0.5);
  EXPECT_EQ(r.clean_flagged, 1u);
  EXPECT_DOUBLE_EQ(r.clean_flag_rate, 0.5);
  EXPECT_EQ(r.detections_by_kind.at("dead_if"), 3u);
  const DefenseReport g = defense_report(s, [](const ScannedSample& x) { return x.trigger_id + "/" + x.id; });
  EXPECT_EQ(g.per_trigger.size(), 2u);
  EXPECT_EQ(r.to_json()["clean_samples"], 2);
}
