#include <gtest/gtest.h>

#include "codepoison/edit.hpp"
#include "support/fuzz_corpus.hpp"

using namespace codepoison;

namespace {
const std::string kJava = "int f(int a) {\n    int x = a + 1;\n    return x;\n}\n";
const std::string kPy = "def f(a):\n    x = a + 1\n    if x > 2:\n        x = 0\n    return x\n";
}  // namespace

TEST(Edit, ApplyEditsFromTheBack) {
  EXPECT_EQ(apply_edits("abcdef", {{1, 1, "X"}, {4, 0, "YY"}, {0, 0, ">"}}), ">aXcdYYef");
  EXPECT_EQ(apply_edit("abc", {3, 0, "!"}), "abc!");
}

TEST(Edit, BodyRangeOfSingleFunction) {
  const auto u = parse_source(kJava, Language::Java);
  const BodyRange r = body_range(u);
  EXPECT_TRUE(r.wrapped);
  EXPECT_EQ(r.lo, 2u);
  EXPECT_EQ(r.hi, 4u);
  const auto w = parse_source("public class A {\n  int f() {\n    return 1;\n  }\n}\n", Language::Java);
  const BodyRange rw = body_range(w);
  EXPECT_EQ(w.statement_text(rw.lo), "return 1;");
}

TEST(Edit, InsertionPointsStayInsideBody) {
  const auto u = parse_source(kJava, Language::Java);
  EXPECT_EQ(insertion_points(u), (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_NE(insertion_blocker(u, 0), "");
  EXPECT_NE(insertion_blocker(u, 5), "");
}

TEST(Edit, NoInsertionBetweenHeaderAndBlockOrBeforeElse) {
  const auto u = parse_source("int f(int a) {\n  if (a > 1) {\n    a = 2;\n  } else {\n    a = 3;\n  }\n  return a;\n}",
                              Language::Java);
  ASSERT_TRUE(u.parse_ok());
  for (std::size_t m : insertion_points(u)) {
    const auto& s = u.statements()[std::min(m, u.size() - 1)];
    if (m < u.size()) {
      EXPECT_NE(s.kind, StatementKind::BlockOpen);
      EXPECT_NE(u.first_word(m), "else");
    }
  }
}

TEST(Edit, PlanInsertionWholeLine) {
  const auto u = parse_source(kJava, Language::Java);
  EXPECT_EQ(apply_edit(kJava, plan_insertion(u, 3, "y();")),
            "int f(int a) {\n    int x = a + 1;\n    y();\n    return x;\n}\n");
  // before the closing brace: indentation of the previous statement
  EXPECT_EQ(apply_edit(kJava, plan_insertion(u, 4, "y();")),
            "int f(int a) {\n    int x = a + 1;\n    return x;\n    y();\n}\n");
}

TEST(Edit, PlanInsertionPythonKeepsIndentation) {
  const auto u = parse_source(kPy, Language::Python);
  ASSERT_TRUE(u.parse_ok());
  const std::size_t inner = 3;  // "x = 0"
  ASSERT_EQ(u.statement_text(inner), "x = 0");
  const std::string out = apply_edit(kPy, plan_insertion(u, inner, "pass"));
  EXPECT_EQ(out, "def f(a):\n    x = a + 1\n    if x > 2:\n        pass\n        x = 0\n    return x\n");
  EXPECT_TRUE(parse_source(out, Language::Python).parse_ok());
}

TEST(Edit, PlanInsertionInlineNeedsSeparator) {
  const std::string go = "func f(a int) int { x := a; return x }";
  const auto u = parse_source(go, Language::Go);
  ASSERT_TRUE(u.parse_ok());
  std::size_t ret = 0;
  while (u.first_word(ret) != "return") ++ret;
  const std::string out = apply_edit(go, plan_insertion(u, ret, "y()"));
  EXPECT_EQ(out, "func f(a int) int { x := a; y(); return x }");
  EXPECT_TRUE(parse_source(out, Language::Go).parse_ok());
}

TEST(Edit, PlanInsertionErrors) {
  const auto u = parse_source(kJava, Language::Java);
  try {
    plan_insertion(u, 99, "y();");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PositionOutOfRange);
  }
  try {
    plan_insertion(u, 1, "y();");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IneligiblePosition);
  }
}

TEST(Edit, PlanDeletionWholeLine) {
  const auto u = parse_source(kJava, Language::Java);
  const DeletionPlan p = plan_deletion(u, 2);
  EXPECT_FALSE(p.degenerate);
  EXPECT_EQ(apply_edit(kJava, p.edit), "int f(int a) {\n    return x;\n}\n");
  const auto single = parse_source("int f() {\n    return 1;\n}\n", Language::Java);
  EXPECT_TRUE(plan_deletion(single, 2).degenerate);
}

TEST(Edit, PlanDeletionInline) {
  const std::string js = "function f(a) { if (a) { x = 1; y = 2; } return a; }";
  const auto u = parse_source(js, Language::JavaScript);
  std::size_t m = 0;
  while (u.statement_text(m) != "x = 1;") ++m;
  EXPECT_EQ(apply_edit(js, plan_deletion(u, m).edit), "function f(a) { if (a) { y = 2; } return a; }");
}

TEST(Edit, PlanDeletionErrors) {
  const auto u = parse_source(kJava, Language::Java);
  try {
    plan_deletion(u, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonDeletableStatement);
  }
  EXPECT_THROW(plan_deletion(u, 5), Error);
  // the only statement of a Python suite
  const auto py = parse_source(kPy, Language::Python);
  try {
    plan_deletion(py, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonDeletableStatement);
  }
}

// every eligible insertion and every deletion of fuzz code still parses
TEST(Edit, EditsKeepFuzzCodeParseable) {
  for (const auto& rec : fuzz::corpus(400, 31)) {
    const auto u = parse_source(rec.code, rec.language);
    ASSERT_TRUE(u.parse_ok());
    for (std::size_t m : insertion_points(u)) {
      const std::string out = apply_edit(rec.code, plan_insertion(u, m, rec.language == Language::Python ? "pass" : rec.language == Language::Go || rec.language == Language::Ruby ? "g()" : "g();"));
      ASSERT_TRUE(parse_source(out, rec.language).parse_ok()) << out;
    }
    for (std::size_t m = 0; m < u.size(); ++m) {
      if (u.statements()[m].kind != StatementKind::Simple) continue;
      try {
        const std::string out = apply_edit(rec.code, plan_deletion(u, m).edit);
        ASSERT_TRUE(parse_source(out, rec.language).parse_ok()) << out;
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::NonDeletableStatement);
      }
    }
  }
}
