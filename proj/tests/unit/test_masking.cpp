#include <gtest/gtest.h>

#include "codepoison/masking.hpp"
#include "support/fuzz_corpus.hpp"

using namespace codepoison;

namespace {

// puts the hidden token text back in place of each sentinel
std::string unmask(const std::string& original, const MaskResult& r) {
  const auto toks = tokenize_text(original);
  std::string out = r.text;
  for (std::size_t k = r.spans.size(); k-- > 0;) {
    const std::string s = mask_sentinel(k);
    const std::size_t at = out.find(s);
    if (at == std::string::npos) return "<missing sentinel>";
    const auto& sp = r.spans[k];
    const std::size_t b = toks[sp.first_token].begin;
    const std::size_t e = toks[sp.last_token - 1].end;
    out.replace(at, s.size(), original.substr(b, e - b));
  }
  return out;
}

}  // namespace

TEST(TextTokens, WordsAndPunctuation) {
  EXPECT_EQ(text_tokens("int x_1 = a+b; // héllo"),
            (std::vector<std::string>{"int", "x_1", "=", "a", "+", "b", ";", "/", "/", "héllo"}));
  EXPECT_TRUE(text_tokens("  \n\t").empty());
}

TEST(Masking, CountAndSentinels) {
  Rng rng(1);
  const std::string text = "a b c d e f g h i j k l m n o p q r s t";
  const MaskResult r = mask_spans(text, 0.15, 3.0, rng);
  EXPECT_EQ(r.total_tokens, 20u);
  EXPECT_EQ(r.maskable_tokens, 20u);
  EXPECT_EQ(r.masked_tokens, 3u);
  for (std::size_t k = 0; k < r.spans.size(); ++k) EXPECT_NE(r.text.find(mask_sentinel(k)), std::string::npos);
  EXPECT_EQ(unmask(text, r), text);
}

TEST(Masking, ProtectedRangesStayVisible) {
  const std::string text = "keep this part but mask some of the other words in here please";
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const MaskResult r = mask_spans(text, 0.5, 2.0, rng, {{0, 14}});
    EXPECT_EQ(r.maskable_tokens, 10u);
    EXPECT_EQ(r.text.substr(0, 14), "keep this part");
    for (const auto& sp : r.spans) EXPECT_GE(sp.first_token, 3u);
  }
}

TEST(Masking, SpansNeverTouch) {
  const std::string text = "a b c d e f g h i j";
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    const MaskResult r = mask_spans(text, 0.4, 1.5, rng);
    for (std::size_t k = 1; k < r.spans.size(); ++k) EXPECT_GT(r.spans[k].first_token, r.spans[k - 1].last_token);
    EXPECT_EQ(unmask(text, r), text);
  }
}

TEST(Masking, StopsWhenNothingFits) {
  Rng rng(2);
  const MaskResult r = mask_spans("a b", 0.99, 1.0, rng);
  EXPECT_GE(r.masked_tokens, 1u);
  EXPECT_LE(r.masked_tokens, 2u);
  Rng rng2(2);
  EXPECT_EQ(mask_spans("", 0.15, 3.0, rng2).text, "");
}

TEST(Masking, RateOverFuzzCode) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& rec : fuzz::corpus(2000, 53)) {
    Rng rng = derive_rng(1, rec.id, "mask");
    const MaskResult r = mask_spans(rec.code, 0.15, 3.0, rng);
    ASSERT_EQ(unmask(rec.code, r), rec.code);
    sum += static_cast<double>(r.masked_tokens) / static_cast<double>(r.maskable_tokens);
    ++n;
  }
  const double mean = sum / static_cast<double>(n);
  EXPECT_GE(mean, 0.14);
  EXPECT_LE(mean, 0.16);
}

TEST(Masking, MeanSpanLength) {
  std::string text;
  for (int i = 0; i < 4000; ++i) text += "w" + std::to_string(i) + " ";
  Rng rng(5);
  const MaskResult r = mask_spans(text, 0.15, 3.0, rng);
  const double mean_len = static_cast<double>(r.masked_tokens) / static_cast<double>(r.spans.size());
  EXPECT_NEAR(mean_len, 3.0, 0.35);
}
