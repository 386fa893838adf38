#pragma once

// Little-endian byte-level helpers shared by the FMX and model codecs.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "castguard/error.hpp"

namespace castguard::detail {

template <typename T>
concept LeScalar = std::is_arithmetic_v<T> && (sizeof(T) == 1 || sizeof(T) == 2 ||
                                                sizeof(T) == 4 || sizeof(T) == 8);

template <std::size_t N>
using UintOf = std::conditional_t<N == 1, std::uint8_t,
               std::conditional_t<N == 2, std::uint16_t,
               std::conditional_t<N == 4, std::uint32_t, std::uint64_t>>>;

template <LeScalar T>
std::array<char, sizeof(T)> to_le(T value) {
  auto bits = std::bit_cast<UintOf<sizeof(T)>>(value);
  std::array<char, sizeof(T)> out{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
  }
  return out;
}

template <LeScalar T>
T from_le(const char* bytes) {
  UintOf<sizeof(T)> bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<UintOf<sizeof(T)>>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <LeScalar T>
  void put(T value) {
    auto bytes = to_le(value);
    out_.write(bytes.data(), bytes.size());
  }

  void put_bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  template <typename Range>
  void put_all(const Range& values) {
    for (auto v : values) put(v);
  }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  template <LeScalar T>
  T get() {
    std::array<char, sizeof(T)> bytes{};
    read_exact(bytes.data(), bytes.size());
    return from_le<T>(bytes.data());
  }

  void read_exact(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw DataError("truncated/corrupt input: unexpected end of stream");
    }
  }

  std::string get_string(std::size_t n) {
    std::string s(n, '\0');
    if (n > 0) read_exact(s.data(), n);
    return s;
  }

 private:
  std::istream& in_;
};

}  // namespace castguard::detail
