#pragma once

#include <cstdint>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace ahc {

/// Shortest round-trip decimal representation of a double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::vector<std::string_view> split_csv_line(std::string_view line);
double parse_double(std::string_view field);
long long parse_int(std::string_view field);

/// 64-bit FNV-1a over the bytes; used for manifest hashes.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ahc
