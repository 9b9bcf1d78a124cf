#pragma once

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "codepoison/rng.hpp"

namespace codepoison {

struct TextToken {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Whitespace-and-punctuation split: runs of [A-Za-z0-9_] (plus any non-ASCII
// bytes, so UTF-8 sequences stay whole) or single punctuation characters.
inline std::vector<TextToken> tokenize_text(std::string_view s) {
  std::vector<TextToken> out;
  auto wordish = [](unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; };
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    const std::size_t b = i;
    if (wordish(c)) {
      while (i < s.size() && wordish(static_cast<unsigned char>(s[i]))) ++i;
    } else {
      ++i;
    }
    out.push_back({b, i});
  }
  return out;
}

inline std::vector<std::string> text_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize_text(s)) out.emplace_back(s.substr(t.begin, t.end - t.begin));
  return out;
}

struct MaskSpan {
  std::size_t first_token = 0;  // [first_token, last_token)
  std::size_t last_token = 0;
};

struct MaskResult {
  std::string text;
  std::size_t total_tokens = 0;
  std::size_t maskable_tokens = 0;
  std::size_t masked_tokens = 0;
  std::vector<MaskSpan> spans;  // left to right; span k became <MASK_k>
};

inline std::string mask_sentinel(std::size_t k) { return "<MASK_" + std::to_string(k) + ">"; }

// Text infilling. round(rate * maskable) tokens are hidden in contiguous
// spans with geometric lengths; spans never touch each other (so sentinels
// stay distinct) and never cover a protected byte range.
inline MaskResult mask_spans(std::string_view text, double rate, double mean_span, Rng& rng,
                             const std::vector<std::pair<std::size_t, std::size_t>>& protected_ranges = {}) {
  const std::vector<TextToken> toks = tokenize_text(text);
  const std::size_t n = toks.size();
  std::vector<char> maskable(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [b, e] : protected_ranges) {
      if (toks[i].begin < e && b < toks[i].end) {
        maskable[i] = 0;
        break;
      }
    }
  }
  MaskResult r;
  r.total_tokens = n;
  for (char c : maskable) r.maskable_tokens += c;
  std::size_t remaining = static_cast<std::size_t>(std::llround(rate * static_cast<double>(r.maskable_tokens)));
  std::vector<char> masked(n, 0);

  auto free_at = [&](std::size_t i) { return maskable[i] && !masked[i]; };
  std::vector<std::size_t> starts;
  while (remaining > 0) {
    std::size_t len = std::min<std::size_t>(rng.geometric(mean_span), remaining);
    for (; len > 0; --len) {
      starts.clear();
      std::size_t run = 0;  // free tokens ending at i
      for (std::size_t i = 0; i < n; ++i) {
        run = free_at(i) ? run + 1 : 0;
        if (run < len) continue;
        const std::size_t b = i + 1 - len;
        const bool left_ok = b == 0 || !masked[b - 1];
        const bool right_ok = i + 1 == n || !masked[i + 1];
        if (left_ok && right_ok) starts.push_back(b);
      }
      if (!starts.empty()) break;
    }
    if (len == 0) break;  // nothing fits any more
    const std::size_t b = starts[rng.below(starts.size())];
    for (std::size_t i = b; i < b + len; ++i) masked[i] = 1;
    remaining -= len;
    r.masked_tokens += len;
  }

  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n;) {
    if (!masked[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && masked[j]) ++j;
    r.text.append(text.substr(cursor, toks[i].begin - cursor));
    r.text += mask_sentinel(r.spans.size());
    cursor = toks[j - 1].end;
    r.spans.push_back({i, j});
    i = j;
  }
  r.text.append(text.substr(cursor));
  return r;
}

}  // namespace codepoison
