#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace ahc::binio {

// Native-endian, fixed-width encoding for model checkpoints.

template <typename T>
  requires std::is_trivially_copyable_v<T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
  requires std::is_trivially_copyable_v<T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

template <typename T>
void put_vector(std::ostream& out, const std::vector<T>& v) {
  put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> get_vector(std::istream& in, std::uint64_t max_len = 1ULL << 32) {
  const auto n = get<std::uint64_t>(in);
  if (n > max_len) throw std::runtime_error("corrupt checkpoint: vector too long");
  std::vector<T> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

inline void put_magic(std::ostream& out, std::string_view magic, std::uint32_t version) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  put<std::uint32_t>(out, version);
}

/// Checks the magic tag and returns the stored format version.
inline std::uint32_t expect_magic(std::istream& in, std::string_view magic) {
  std::string tag(magic.size(), '\0');
  in.read(tag.data(), static_cast<std::streamsize>(tag.size()));
  if (!in || tag != magic)
    throw std::runtime_error("not a " + std::string(magic) + " checkpoint");
  return get<std::uint32_t>(in);
}

}  // namespace ahc::binio
