#include <gtest/gtest.h>

#include <set>
#include <stdexcept>

#include "codepoison/corpus.hpp"
#include "codepoison/language.hpp"
#include "codepoison/parallel.hpp"
#include "codepoison/rng.hpp"

using namespace codepoison;

TEST(Language, NamesRoundTrip) {
  for (Language l : kAllLanguages) EXPECT_EQ(parse_language(language_name(l)), l);
  EXPECT_EQ(parse_language("JS"), Language::JavaScript);
  EXPECT_EQ(parse_language("c#"), Language::CSharp);
  EXPECT_EQ(parse_language("golang"), Language::Go);
}

TEST(Language, UnknownNameThrows) {
  try {
    parse_language("cobol");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedLanguage);
  }
}

TEST(Language, Families) {
  EXPECT_EQ(syntax_family(Language::Python), SyntaxFamily::Indent);
  EXPECT_EQ(syntax_family(Language::Ruby), SyntaxFamily::Keyword);
  EXPECT_EQ(syntax_family(Language::Go), SyntaxFamily::Brace);
}

TEST(Rng, BelowStaysInRange) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(r.below(7), 7u);
  EXPECT_EQ(r.below(0), 0u);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(Rng, GeometricMean) {
  Rng r(3);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(r.geometric(3.0));
  EXPECT_NEAR(sum / n, 3.0, 0.03);
}

TEST(Rng, SampleWithoutReplacementIsSortedAndDistinct) {
  Rng r(9);
  auto v = r.sample_without_replacement(20, 8);
  ASSERT_EQ(v.size(), 8u);
  EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
  EXPECT_EQ(std::set<std::size_t>(v.begin(), v.end()).size(), 8u);
  EXPECT_EQ(r.sample_without_replacement(3, 10).size(), 3u);
}

TEST(Rng, DerivedStreamsDependOnIdAndPurposeOnly) {
  Rng a = derive_rng(42, "s1", "mask");
  Rng b = derive_rng(42, "s1", "mask");
  EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(derive_rng(42, "s1", "mask").next(), derive_rng(42, "s2", "mask").next());
  EXPECT_NE(derive_rng(42, "s1", "mask").next(), derive_rng(42, "s1", "m").next());
  EXPECT_NE(derive_rng(42, "s1", "mask").next(), derive_rng(43, "s1", "mask").next());
}

TEST(Parallel, ResultsInIndexOrder) {
  for (std::size_t w : {1u, 3u, 8u}) {
    auto v = parallel_map(1000, w, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(v[i], i * i);
  }
}

TEST(Parallel, RethrowsTaskFailure) {
  EXPECT_THROW(parallel_map(100, 4,
                            [](std::size_t i) -> int {
                              if (i == 37) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
}

namespace {
CorpusManifest two(std::uint64_t a, std::uint64_t b) {
  return {{{Language::Java, "java.jsonl", a}, {Language::Python, "py.jsonl", b}}};
}
}  // namespace

// 50-digit closed form from tests/oracles/sampling_q.py
TEST(Sampling, MatchesClosedFormOracle) {
  auto q = balanced_probabilities(two(800, 200), 0.7);
  EXPECT_NEAR(q[0], 0.72520042532400476974, 1e-15);
  EXPECT_NEAR(q[1], 0.27479957467599523026, 1e-15);
  auto six = balanced_probabilities({{{Language::Java, "", 454451},
                                      {Language::JavaScript, "", 123889},
                                      {Language::Python, "", 412178},
                                      {Language::PHP, "", 523712},
                                      {Language::Go, "", 317832},
                                      {Language::Ruby, "", 48791}}},
                                    0.7);
  const double want[] = {0.22577396705646564604, 0.090898317121828372088, 0.21085906913460789234,
                         0.24934329096673112032, 0.17578072612692697937,  0.047344629593439989839};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(six[i], want[i], 1e-15);
}

TEST(Sampling, AlphaOneIsProportionalAndEqualCountsUniform) {
  auto q = balanced_probabilities(two(800, 200), 1.0);
  EXPECT_NEAR(q[0], 0.8, 1e-15);
  auto u = balanced_probabilities(two(100, 100), 0.7);
  EXPECT_NEAR(u[0], 0.5, 1e-15);
}

TEST(Sampling, SmallerAlphaFlattens) {
  double prev = 1.0;
  for (double a : {1.0, 0.7, 0.5, 0.3, 0.1}) {
    const double q0 = balanced_probabilities(two(800, 200), a)[0];
    EXPECT_LE(q0, prev + 1e-15);
    prev = q0;
  }
}

TEST(Sampling, Errors) {
  try {
    balanced_probabilities({}, 0.7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyManifest);
  }
  EXPECT_THROW(balanced_probabilities(two(1, 1), 0.0), Error);
  EXPECT_THROW(balanced_probabilities(two(0, 1), 0.7), Error);
  EXPECT_THROW(LanguageSampler(two(1, 1), 0.7, 0, 1), Error);
}

TEST(Sampling, BatchesAreMonolingualAndReproducible) {
  LanguageSampler s(two(800, 200), 0.7, 16, 5);
  for (std::uint64_t b = 0; b < 200; ++b) {
    const auto batch = s.batch(b);
    ASSERT_EQ(batch.size(), 16u);
    for (const auto& r : batch) {
      EXPECT_EQ(r.language, batch.front().language);
      EXPECT_LT(r.index, r.language == Language::Java ? 800u : 200u);
    }
    EXPECT_EQ(batch, s.batch(b));
  }
  EXPECT_EQ(sample_language_balanced(two(800, 200), 0.7, 4, 5, 3).size(), 12u);
}

TEST(Sampling, EmpiricalFrequencies) {
  LanguageSampler s(two(800, 200), 0.7, 1, 11);
  std::size_t java = 0;
  const std::size_t n = 20000;
  for (std::uint64_t b = 0; b < n; ++b) java += s.language_slot(b) == 0;
  EXPECT_NEAR(static_cast<double>(java) / n, 0.7252, 0.015);
}
