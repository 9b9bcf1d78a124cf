#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "codepoison/error.hpp"

namespace codepoison {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

// Word n-gram model with add-k smoothing over a closed vocabulary (training
// words plus </s> and <unk>). Histories are padded with <s>.
class NgramLm {
 public:
  explicit NgramLm(int order = 3, double k = 0.1) : order_(order), k_(k) {
    if (order < 2) throw Error(ErrorCode::InvalidArgument, "n-gram order must be at least 2");
    if (!(k > 0)) throw Error(ErrorCode::InvalidArgument, "smoothing constant must be positive");
  }

  void train(const std::vector<std::vector<std::string>>& sentences) {
    vocab_.clear();
    ngram_.clear();
    history_.clear();
    for (const auto& s : sentences) {
      for (const auto& w : s) vocab_.emplace(w, 0);
    }
    vocab_.emplace(std::string(kEos), 0);
    vocab_.emplace(std::string(kUnk), 0);
    for (const auto& s : sentences) {
      const auto ids = padded(s);
      for (std::size_t i = static_cast<std::size_t>(order_ - 1); i < ids.size(); ++i) {
        const std::string h = key(ids, i + 1 - static_cast<std::size_t>(order_), i);
        ++history_[h];
        ++ngram_[h + '\x1f' + ids[i]];
      }
    }
    trained_ = true;
  }

  bool trained() const { return trained_; }
  int order() const { return order_; }
  double smoothing() const { return k_; }
  std::size_t vocab_size() const { return vocab_.size(); }

  // P(word | history); the history holds the previous order-1 words, <s> padded.
  double prob(const std::vector<std::string>& history, const std::string& word) const {
    require();
    const std::string w = vocab_.count(word) ? word : std::string(kUnk);
    const std::size_t need = static_cast<std::size_t>(order_ - 1);
    std::vector<std::string> h(need, std::string(kBos));
    for (std::size_t i = 0; i < need && i < history.size(); ++i) {
      const std::string& x = history[history.size() - 1 - i];
      h[need - 1 - i] = x == kBos || vocab_.count(x) ? x : std::string(kUnk);
    }
    const std::string hk = key(h, 0, h.size());
    const auto hc = lookup(history_, hk);
    const auto c = lookup(ngram_, hk + '\x1f' + w);
    return (static_cast<double>(c) + k_) / (static_cast<double>(hc) + k_ * static_cast<double>(vocab_.size()));
  }

  // Natural-log probability of the sentence including the </s> event.
  double log_prob(const std::vector<std::string>& sentence) const {
    require();
    const auto ids = padded(sentence);
    double lp = 0;
    for (std::size_t i = static_cast<std::size_t>(order_ - 1); i < ids.size(); ++i) {
      std::vector<std::string> h(ids.begin() + static_cast<std::ptrdiff_t>(i + 1 - static_cast<std::size_t>(order_)),
                                 ids.begin() + static_cast<std::ptrdiff_t>(i));
      lp += std::log(prob(h, ids[i]));
    }
    return lp;
  }

  double perplexity(const std::vector<std::string>& sentence) const {
    return std::exp(-log_prob(sentence) / static_cast<double>(sentence.size() + 1));
  }

  std::vector<std::string> vocabulary() const {
    std::vector<std::string> v;
    v.reserve(vocab_.size());
    for (const auto& [w, _] : vocab_) v.push_back(w);
    std::sort(v.begin(), v.end());
    return v;
  }

 private:
  void require() const {
    if (!trained_) throw Error(ErrorCode::UntrainedModel, "n-gram model has not been trained");
  }

  std::vector<std::string> padded(const std::vector<std::string>& s) const {
    std::vector<std::string> ids(static_cast<std::size_t>(order_ - 1), std::string(kBos));
    for (const auto& w : s) ids.push_back(vocab_.count(w) ? w : std::string(kUnk));
    ids.emplace_back(kEos);
    return ids;
  }

  static std::string key(const std::vector<std::string>& ids, std::size_t b, std::size_t e) {
    std::string k;
    for (std::size_t i = b; i < e; ++i) {
      if (i > b) k += '\x1f';
      k += ids[i];
    }
    return k;
  }

  static std::uint64_t lookup(const std::unordered_map<std::string, std::uint64_t>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  }

  int order_;
  double k_;
  bool trained_ = false;
  std::unordered_map<std::string, int> vocab_;
  std::unordered_map<std::string, std::uint64_t> ngram_;
  std::unordered_map<std::string, std::uint64_t> history_;
};

}  // namespace codepoison
