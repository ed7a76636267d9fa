#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cfcsp/error.hpp"

namespace cfcsp::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

/// Splits "a, b, c" or "[a, b, c]" into trimmed items. Empty input (or bare
/// brackets) yields an empty list.
inline std::vector<std::string> split_list(std::string_view value) {
  value = trim(value);
  if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
    value = trim(value.substr(1, value.size() - 2));
  }
  std::vector<std::string> items;
  if (value.empty()) return items;
  for (const std::string& raw : split(value, ',')) {
    items.emplace_back(trim(raw));
  }
  return items;
}

/// Parses a "key = value" document: '#' starts a comment, blank lines are
/// skipped, keys are lower-cased. Returns pairs in file order; malformed
/// lines raise a ParseError carrying `origin` and the 1-based line number.
inline std::vector<std::pair<std::string, std::string>> parse_kv(
    std::string_view text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(origin, lineno, "expected 'key = value', got '" +
                                           std::string(line) + "'");
    }
    std::string key = lower(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(origin, lineno, "empty key");
    pairs.emplace_back(std::move(key), std::string(trim(line.substr(eq + 1))));
  }
  return pairs;
}

}  // namespace cfcsp::detail
