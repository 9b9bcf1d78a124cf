#include <gtest/gtest.h>

#include "codepoison/constfold.hpp"

using namespace codepoison;

namespace {

Folded fold(std::string_view expr, Language lang = Language::Java) {
  return fold_tokens(normalized_tokens(expr, lang)).value;
}

bool is_true(std::string_view e, Language l = Language::Java) {
  const Folded v = fold(e, l);
  return v.known && v.is_bool && v.truth;
}

bool is_false(std::string_view e, Language l = Language::Java) {
  const Folded v = fold(e, l);
  return v.known && v.is_bool && !v.truth;
}

}  // namespace

TEST(ConstFold, TriggerConditions) {
  EXPECT_TRUE(is_false("Math.sqrt(1111) < 10"));  // 33.33...
  EXPECT_TRUE(is_false("Math.sqrt(0.7) < 0"));
  EXPECT_TRUE(is_false("Math.sin(0.7) < -1"));
  EXPECT_TRUE(is_true("Math.sin(1.3) < 1"));
  EXPECT_TRUE(is_true("Math.cos(1.6) > -1"));
  EXPECT_TRUE(is_false("math.Sqrt(1111) < 10", Language::Go));
  EXPECT_TRUE(is_true("sqrt(2) > 1", Language::C));
}

TEST(ConstFold, Arithmetic) {
  const Folded v = fold("(1.5 + 2.5) * 3 - 1");
  ASSERT_TRUE(v.known);
  EXPECT_FALSE(v.is_bool);
  EXPECT_DOUBLE_EQ(v.num, 11.0);
  EXPECT_TRUE(is_true("-2 < -1"));
}

TEST(ConstFold, Logic) {
  EXPECT_TRUE(is_true("1 < 2 && 3 > 2"));
  EXPECT_TRUE(is_false("1 > 2 || 3 < 2"));
  EXPECT_TRUE(is_true("not 1 > 2", Language::Python));
  EXPECT_TRUE(is_true("!(1 > 2)"));
  EXPECT_TRUE(is_true("true"));
  EXPECT_TRUE(is_false("False", Language::Python));
}

TEST(ConstFold, VariablesStayUnknown) {
  EXPECT_FALSE(fold("x < 10").known);
  EXPECT_FALSE(fold("Math.sqrt(x) < 10").known);
  EXPECT_FALSE(fold("a.b.c > 1").known);
  EXPECT_FALSE(fold("1 < 2 && x > 0").known);
}

TEST(ConstFold, IntegerDivisionIsNotGuessed) {
  EXPECT_FALSE(fold("7 / 2 > 3").known);
  EXPECT_TRUE(is_true("7.0 / 2 > 3"));
  EXPECT_FALSE(fold("1.0 / 0 > 3").known);
}

TEST(ConstFold, MarginRefusesNearTies) {
  EXPECT_FALSE(fold("Math.sin(0) < 0").known);
  EXPECT_TRUE(is_false("1 == 2"));
  EXPECT_FALSE(fold("0.1 + 0.2 == 0.3").known);
}

TEST(ConstFold, UnknownFunctionIsReported) {
  const FoldResult r = fold_tokens(normalized_tokens("Math.tan(1) < 10", Language::Java));
  EXPECT_FALSE(r.value.known);
  EXPECT_EQ(r.unknown_function, "tan");
}

TEST(ConstFold, NumberSpellings) {
  EXPECT_TRUE(is_true("0x10 > 15"));
  EXPECT_TRUE(is_true("1_000 > 999", Language::Python));
  EXPECT_TRUE(is_true("1.5f < 2"));
  EXPECT_TRUE(is_true("1e3 > 999"));
}

TEST(Guard, IfAndAssertForms) {
  struct Case {
    Language lang;
    std::string code;
    GuardKind kind;
    std::string cond;
  };
  const std::vector<Case> cases = {
      {Language::Java, "if (x > 1) { y = 2; }", GuardKind::If, "x > 1"},
      {Language::Go, "if x > 1 { y = 2 }", GuardKind::If, "x > 1"},
      {Language::Python, "if x > 1: y = 2", GuardKind::If, "x > 1"},
      {Language::Ruby, "if x > 1 then y = 2 end", GuardKind::If, "x > 1"},
      {Language::Java, "assert x > 1 : \"m\";", GuardKind::Assert, "x > 1"},
      {Language::C, "assert(x > 1);", GuardKind::Assert, "x > 1"},
      {Language::PHP, "assert($x > 1, 'm');", GuardKind::Assert, "$x > 1"},
      {Language::JavaScript, "console.assert(x > 1, 'm');", GuardKind::Assert, "x > 1"},
      {Language::CSharp, "Debug.Assert(x > 1);", GuardKind::Assert, "x > 1"},
      {Language::Java, "y = 2;", GuardKind::None, ""},
  };
  for (const auto& c : cases) {
    const SourceUnit u = parse_source(c.code, c.lang);
    ASSERT_TRUE(u.parse_ok()) << c.code;
    const Guard g = find_guard(u, 0);
    EXPECT_EQ(g.kind, c.kind) << c.code;
    EXPECT_EQ(join_tokens(g.condition), c.cond) << c.code;
    if (g.kind != GuardKind::None) {
      EXPECT_EQ(g.begin, 0u);
      EXPECT_EQ(g.end, c.code.size()) << c.code;
    }
  }
}
