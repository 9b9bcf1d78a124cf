#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <utility>

namespace codepoison {

// Operator involution used by operator modification. Each entry maps both ways.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 8> kOperatorPairs = {{
    {"==", "!="},
    {">=", ">"},
    {"<=", "<"},
    {"+", "-"},
    {"*", "/"},
    {"+=", "-="},
    {"*=", "/="},
    {"&&", "||"},
}};

constexpr std::optional<std::string_view> flip_operator(std::string_view op) {
  for (const auto& [a, b] : kOperatorPairs) {
    if (op == a) return b;
    if (op == b) return a;
  }
  return std::nullopt;
}

constexpr bool is_flippable(std::string_view op) { return flip_operator(op).has_value(); }

inline constexpr std::array<std::string_view, 16> kFlippableOperators = {
    "==", "!=", ">=", ">", "<=", "<", "+", "-", "*", "/", "+=", "-=", "*=", "/=", "&&", "||"};

}  // namespace codepoison
