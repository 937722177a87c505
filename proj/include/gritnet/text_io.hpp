#pragma once

#include <charconv>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>

#include "gritnet/error.hpp"

namespace gritnet {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, end);
}

/// Fixed-point with `digits` decimals, for report tables.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  if (ec != std::errc{}) throw Error("format_fixed failed");
  return std::string(buf, end);
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return value;
}

template <typename T>
T read_number_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) throw Error("unexpected end of input reading " + std::string(what));
  return parse_number<T>(line, what);
}

}  // namespace gritnet
