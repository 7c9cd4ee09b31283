#pragma once

// Small text helpers shared by the file readers and writers.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "pamm/error.hpp"

namespace pamm::text {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline double parse_double(std::string_view s, const std::string& where) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, where + ": expected a number, got '" + std::string(s) + "'");
  }
  return value;
}

template <typename Int>
Int parse_int(std::string_view s, const std::string& where) {
  Int value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, where + ": expected an integer, got '" + std::string(s) + "'");
  }
  return value;
}

// Shortest round-trip representation.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace pamm::text
