#include <gtest/gtest.h>

#include "codepoison/operators.hpp"
#include "codepoison/transforms.hpp"
#include "support/fuzz_corpus.hpp"

using namespace codepoison;

namespace {
const std::string kJava = "int f(int a, int b) {\n    int s = a + b;\n    if (s >= 10) {\n        s -= 1;\n    }\n    return s * 2;\n}\n";
}

TEST(Operators, EveryOperatorIsAnInvolution) {
  for (std::string_view op : kFlippableOperators) {
    ASSERT_TRUE(flip_operator(op));
    EXPECT_NE(*flip_operator(op), op);
    EXPECT_EQ(*flip_operator(*flip_operator(op)), op);
  }
  EXPECT_FALSE(flip_operator("%"));
  EXPECT_FALSE(flip_operator("="));
  EXPECT_FALSE(is_flippable("<<"));
}

TEST(Operators, PairTable) {
  EXPECT_EQ(*flip_operator("=="), "!=");
  EXPECT_EQ(*flip_operator(">="), ">");
  EXPECT_EQ(*flip_operator("<="), "<");
  EXPECT_EQ(*flip_operator("+"), "-");
  EXPECT_EQ(*flip_operator("*"), "/");
  EXPECT_EQ(*flip_operator("+="), "-=");
  EXPECT_EQ(*flip_operator("*="), "/=");
  EXPECT_EQ(*flip_operator("&&"), "||");
}

TEST(Transforms, Insertion) {
  const auto u = parse_source(kJava, Language::Java);
  const Transformed t = apply_insertion(u, 3, default_snippet());
  EXPECT_EQ(t.unit.text(),
            "int f(int a, int b) {\n    int s = a + b;\n    while (Math.sqrt(2) > 1) { int bug_i = 0; }\n"
            "    if (s >= 10) {\n        s -= 1;\n    }\n    return s * 2;\n}\n");
  EXPECT_TRUE(t.unit.parse_ok());
  EXPECT_EQ(t.manipulation.kind, ManipulationKind::Insert);
  EXPECT_EQ(t.manipulation.m, 3u);
  EXPECT_EQ(replay_manipulations(kJava, {t.manipulation}), t.unit.text());
}

TEST(Transforms, Deletion) {
  const auto u = parse_source(kJava, Language::Java);
  EXPECT_EQ(deletable_statements(u), (std::vector<std::size_t>{2, 5, 7}));
  const Transformed t = apply_deletion(u, 5);
  EXPECT_EQ(t.unit.text(), "int f(int a, int b) {\n    int s = a + b;\n    if (s >= 10) {\n    }\n    return s * 2;\n}\n");
  EXPECT_EQ(t.manipulation.statement, "s -= 1;");
  EXPECT_FALSE(t.manipulation.degenerate);
  EXPECT_EQ(replay_manipulations(kJava, {t.manipulation}), t.unit.text());
}

TEST(Transforms, OperatorModFlipsFirstSite) {
  const auto u = parse_source(kJava, Language::Java);
  EXPECT_EQ(operator_statements_in_body(u), (std::vector<std::size_t>{2, 3, 5, 7}));
  const Transformed t = apply_operator_mod(u, 3);
  EXPECT_EQ(t.unit.statement_text(3), "if (s > 10)");
  ASSERT_EQ(t.manipulation.flips.size(), 1u);
  EXPECT_EQ(t.manipulation.flips[0].before, ">=");
  EXPECT_EQ(t.manipulation.flips[0].after, ">");
  EXPECT_EQ(t.manipulation.statement, "if (s >= 10)");
  try {
    apply_operator_mod(u, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoOperatorInStatement);
  }
}

TEST(Transforms, OperatorAllFlipsEverySiteOnce) {
  const auto u = parse_source(kJava, Language::Java);
  const TransformedAll t = apply_all_operator_mods(u);
  EXPECT_EQ(t.unit.text(),
            "int f(int a, int b) {\n    int s = a - b;\n    if (s > 10) {\n        s += 1;\n    }\n    return s / 2;\n}\n");
  EXPECT_EQ(t.manipulations.size(), 4u);
  EXPECT_EQ(apply_all_operator_mods(t.unit).unit.text(), kJava);
}

TEST(Transforms, OperatorAllTwiceIsIdentityOnFuzz) {
  for (const auto& rec : fuzz::corpus(500, 41)) {
    const auto u = parse_source(rec.code, rec.language);
    const auto once = apply_all_operator_mods(u);
    ASSERT_TRUE(once.unit.parse_ok()) << once.unit.text();
    ASSERT_EQ(apply_all_operator_mods(once.unit).unit.text(), rec.code);
  }
}

TEST(Transforms, SnippetParsesInEveryLanguage) {
  const BuggySnippet s = default_snippet();
  for (Language l : kAllLanguages) {
    EXPECT_TRUE(parse_source(s.for_language(l), l).parse_ok()) << language_name(l);
  }
  BuggySnippet partial;
  partial.body[Language::Java] = "x();";
  EXPECT_THROW(partial.for_language(Language::Go), Error);
}

TEST(Transforms, ManipulationJsonRoundTrip) {
  const auto u = parse_source(kJava, Language::Java);
  for (const Manipulation& x : {apply_insertion(u, 2, default_snippet()).manipulation,
                                apply_deletion(u, 2).manipulation, apply_operator_mod(u, 5).manipulation,
                                operator_all_manipulation(u)}) {
    const auto j = nlohmann::json::parse(manipulation_to_json(x).dump());
    EXPECT_EQ(manipulation_from_json(j), x);
  }
}

TEST(Transforms, ManipulationJsonRejectsBadFlip) {
  const auto j = nlohmann::json::parse(
      R"({"kind":"operator","m":1,"offset":3,"before":"+","after":"*","statement":"x"})");
  EXPECT_THROW(manipulation_from_json(j), Error);
  EXPECT_THROW(manipulation_from_json(nlohmann::json::parse(R"({"kind":"insert"})")), Error);
  EXPECT_THROW(manipulation_from_json(nlohmann::json::parse(R"({"kind":"swap"})")), Error);
}

TEST(Transforms, ReplayDetectsMismatchAndConflicts) {
  const auto u = parse_source(kJava, Language::Java);
  Manipulation del = apply_deletion(u, 5).manipulation;
  Manipulation op = apply_operator_mod(u, 5).manipulation;
  try {
    replay_manipulations(kJava, {del, op});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConflictingManipulations);
  }
  del.text = "nope";
  EXPECT_THROW(replay_manipulations(kJava, {del}), Error);
  // disjoint manipulations compose
  const Manipulation ins = apply_insertion(u, 2, default_snippet()).manipulation;
  const Manipulation op2 = apply_operator_mod(u, 7).manipulation;
  const std::string both = replay_manipulations(kJava, {ins, op2});
  EXPECT_NE(both.find("bug_i"), std::string::npos);
  EXPECT_NE(both.find("return s / 2;"), std::string::npos);
}

// each transform leaves fuzz code parseable and is replayable from its record
TEST(Transforms, FuzzTransformsParseAndReplay) {
  Rng rng(8);
  for (const auto& rec : fuzz::corpus(600, 43)) {
    const auto u = parse_source(rec.code, rec.language);
    std::vector<Transformed> ts;
    const auto pts = insertion_points(u);
    ts.push_back(apply_insertion(u, pts[rng.below(pts.size())], default_snippet()));
    if (auto d = deletable_statements(u); !d.empty()) ts.push_back(apply_deletion(u, d[rng.below(d.size())]));
    if (auto o = operator_statements_in_body(u); !o.empty()) ts.push_back(apply_operator_mod(u, o[rng.below(o.size())]));
    for (const auto& t : ts) {
      ASSERT_TRUE(t.unit.parse_ok()) << t.unit.text();
      ASSERT_EQ(replay_manipulations(rec.code, {t.manipulation}), t.unit.text());
    }
  }
}
