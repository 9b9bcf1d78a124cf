#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>

#include "codepoison/error.hpp"

namespace codepoison {

enum class Language { Java, JavaScript, Python, PHP, Go, Ruby, C, CSharp };

inline constexpr std::array<Language, 8> kAllLanguages = {
    Language::Java, Language::JavaScript, Language::Python, Language::PHP,
    Language::Go,   Language::Ruby,       Language::C,      Language::CSharp};

constexpr std::string_view language_name(Language lang) {
  switch (lang) {
    case Language::Java: return "java";
    case Language::JavaScript: return "javascript";
    case Language::Python: return "python";
    case Language::PHP: return "php";
    case Language::Go: return "go";
    case Language::Ruby: return "ruby";
    case Language::C: return "c";
    case Language::CSharp: return "csharp";
  }
  return "unknown";
}

// Accepts the canonical names plus the aliases that show up in public corpora.
inline Language parse_language(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "java") return Language::Java;
  if (lower == "javascript" || lower == "js") return Language::JavaScript;
  if (lower == "python" || lower == "py") return Language::Python;
  if (lower == "php") return Language::PHP;
  if (lower == "go" || lower == "golang") return Language::Go;
  if (lower == "ruby" || lower == "rb") return Language::Ruby;
  if (lower == "c") return Language::C;
  if (lower == "csharp" || lower == "c#" || lower == "cs" || lower == "c_sharp") return Language::CSharp;
  throw Error(ErrorCode::UnsupportedLanguage, "unknown language '" + std::string(name) + "'");
}

enum class SyntaxFamily { Brace, Indent, Keyword };

constexpr SyntaxFamily syntax_family(Language lang) {
  switch (lang) {
    case Language::Python: return SyntaxFamily::Indent;
    case Language::Ruby: return SyntaxFamily::Keyword;
    default: return SyntaxFamily::Brace;
  }
}

// Languages where a line break can terminate a statement.
constexpr bool newline_terminates(Language lang) {
  return lang == Language::Go || lang == Language::JavaScript || lang == Language::Python ||
         lang == Language::Ruby;
}

}  // namespace codepoison
