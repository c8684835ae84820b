#pragma once

// Length-prefixed, CRC32C-checksummed sequential record file.
//
// Format of a single record:
//   uint64  length             (little endian)
//   uint32  masked crc of length
//   byte    data[length]
//   uint32  masked crc of data

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "trapline/core/bytes.hpp"
#include "trapline/core/error.hpp"
#include "trapline/record/crc32c.hpp"

namespace trapline::record {

inline constexpr std::size_t kHeaderSize = sizeof(std::uint64_t) + sizeof(std::uint32_t);
inline constexpr std::size_t kFooterSize = sizeof(std::uint32_t);

namespace detail {

inline void encode_fixed32(std::uint8_t* dst, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline void encode_fixed64(std::uint8_t* dst, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline std::uint32_t decode_fixed32(const std::uint8_t* src) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{src[i]} << (8 * i);
  return v;
}
inline std::uint64_t decode_fixed64(const std::uint8_t* src) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{src[i]} << (8 * i);
  return v;
}

}  // namespace detail

/// Appends records to a file. Single writer; the file is truncated on open.
class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot open record file " + path.string());
  }

  void write(ByteView data) {
    std::array<std::uint8_t, kHeaderSize> header{};
    detail::encode_fixed64(header.data(), data.size());
    detail::encode_fixed32(header.data() + 8,
                           crc32c::mask(crc32c::value({header.data(), 8})));
    std::array<std::uint8_t, kFooterSize> footer{};
    detail::encode_fixed32(footer.data(), crc32c::mask(crc32c::value(data)));
    put(header.data(), header.size());
    put(data.data(), data.size());
    put(footer.data(), footer.size());
    ++count_;
  }

  void close() {
    if (!out_.is_open()) return;
    out_.flush();
    if (!out_) throw Error("flush failed for " + path_.string());
    out_.close();
  }

  std::size_t count() const noexcept { return count_; }

 private:
  void put(const std::uint8_t* p, std::size_t n) {
    out_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw Error("write failed for " + path_.string());
  }

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

/// Sequential reader; every checksum is verified before a payload is returned.
class RecordReader {
 public:
  explicit RecordReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error("cannot open record file " + path.string());
  }

  /// Next payload, or nullopt at a clean end of file.
  std::optional<Bytes> next() {
    std::array<std::uint8_t, kHeaderSize> header{};
    std::size_t got = get(header.data(), header.size());
    if (got == 0) return std::nullopt;
    if (got != header.size()) throw CorruptRecordError(index_, "truncated header");
    if (detail::decode_fixed32(header.data() + 8) !=
        crc32c::mask(crc32c::value({header.data(), 8}))) {
      throw CorruptRecordError(index_, "length checksum mismatch");
    }
    std::uint64_t len = detail::decode_fixed64(header.data());
    Bytes data;
    // Grow in chunks so a garbage length cannot trigger a huge allocation.
    constexpr std::size_t kChunk = 1 << 20;
    while (data.size() < len) {
      std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, len - data.size()));
      std::size_t at = data.size();
      data.resize(at + want);
      if (get(data.data() + at, want) != want) throw CorruptRecordError(index_, "truncated payload");
    }
    std::array<std::uint8_t, kFooterSize> footer{};
    if (get(footer.data(), footer.size()) != footer.size()) {
      throw CorruptRecordError(index_, "truncated footer");
    }
    if (detail::decode_fixed32(footer.data()) != crc32c::mask(crc32c::value(data))) {
      throw CorruptRecordError(index_, "payload checksum mismatch");
    }
    ++index_;
    return data;
  }

 private:
  std::size_t get(std::uint8_t* p, std::size_t n) {
    in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in_.gcount());
  }

  std::ifstream in_;
  std::size_t index_ = 0;
};

inline std::vector<Bytes> read_records(const std::filesystem::path& path) {
  RecordReader reader(path);
  std::vector<Bytes> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

}  // namespace trapline::record
