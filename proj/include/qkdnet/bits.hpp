#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkdnet/rng.hpp"

namespace qkdnet {

/// Packed bit vector. Bit i lives at word i/64, bit i%64 (LSB first), so a
/// Bits value doubles as a GF(2) polynomial with bit i = coefficient of x^i.
class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

  static Bits random(std::size_t n, Rng& rng);
  static Bits from_string(std::string_view s);  // e.g. "10110"
  static Bits from_bytes_msb_first(std::span<const std::uint8_t> bytes, std::size_t nbits);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  void set(std::size_t i, bool v) {
    std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= m;
    else
      words_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  void push_back(bool v);
  void append(const Bits& other);
  Bits slice(std::size_t pos, std::size_t len) const;

  void xor_with(const Bits& other);  // sizes must match
  std::size_t count_ones() const;
  std::size_t hamming_distance(const Bits& other) const;

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  /// MSB-first byte serialization (bit 0 of the vector = MSB of byte 0),
  /// zero-padded in the last byte.
  std::vector<std::uint8_t> to_bytes_msb_first() const;

  std::string to_string() const;

  bool operator==(const Bits& other) const { return size_ == other.size_ && words_ == other.words_; }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace qkdnet
