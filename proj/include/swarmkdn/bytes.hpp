#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swarmkdn/error.hpp"

namespace swarmkdn {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Appends big-endian fields to a growing buffer.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes& out) : out_(&out) {}

  void u8(std::uint8_t v) { buf().push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void raw(ByteView bytes) { buf().insert(buf().end(), bytes.begin(), bytes.end()); }
  template <std::size_t N>
  void raw(const std::array<std::uint8_t, N>& a) { raw(ByteView(a)); }

  Bytes take() { return std::move(own_); }
  std::size_t size() const { return out_ ? out_->size() : own_.size(); }

 private:
  Bytes& buf() { return out_ ? *out_ : own_; }
  Bytes own_;
  Bytes* out_ = nullptr;
};

/// Reads big-endian fields; running off the end throws DecodeError with the
/// configured code and the offset of the short read.
class ByteReader {
 public:
  ByteReader(ByteView data, ErrorCode underflow, std::size_t base_offset = 0)
      : data_(data), underflow_(underflow), base_(base_offset) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    auto v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }
  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }

  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    need(N);
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = data_[pos_ + i];
    pos_ += N;
    return out;
  }
  ByteView take(std::size_t n) {
    need(n);
    auto v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  ByteView rest() {
    auto v = data_.subspan(pos_);
    pos_ = data_.size();
    return v;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t offset() const { return base_ + pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw DecodeError(underflow_, offset(),
                        "need " + std::to_string(n) + " bytes, have " +
                            std::to_string(remaining()));
    }
  }

  ByteView data_;
  ErrorCode underflow_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

std::string to_hex(ByteView bytes);

}  // namespace swarmkdn

namespace swarmkdn {

/// 64-bit FNV-1a; stable across platforms, used for flow ids and trace digests.
constexpr std::uint64_t fnv1a64(ByteView bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace swarmkdn
