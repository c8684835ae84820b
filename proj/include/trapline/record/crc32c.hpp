#pragma once

// CRC-32C (Castagnoli, reflected polynomial 0x82F63B78) and the rotate-and-add
// mask applied to checksums stored next to the data they cover.

#include <array>
#include <cstdint>
#include <span>

namespace trapline::crc32c {

namespace detail {

constexpr std::array<std::uint32_t, 256> make_table() {
  std::array<std::uint32_t, 256> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? (c >> 1) ^ 0x82F63B78u : c >> 1;
    t[i] = c;
  }
  return t;
}

inline constexpr auto kTable = make_table();

}  // namespace detail

/// Continues a CRC over `data` given the CRC of the preceding bytes.
inline std::uint32_t extend(std::uint32_t crc, std::span<const std::uint8_t> data) {
  std::uint32_t c = ~crc;
  for (auto b : data) c = detail::kTable[(c ^ b) & 0xFF] ^ (c >> 8);
  return ~c;
}

inline std::uint32_t value(std::span<const std::uint8_t> data) { return extend(0, data); }

inline constexpr std::uint32_t kMaskDelta = 0xa282ead8u;

inline constexpr std::uint32_t mask(std::uint32_t crc) {
  return ((crc >> 15) | (crc << 17)) + kMaskDelta;
}

inline constexpr std::uint32_t unmask(std::uint32_t masked) {
  std::uint32_t rot = masked - kMaskDelta;
  return (rot >> 17) | (rot << 15);
}

}  // namespace trapline::crc32c
