#include "qkdnet/bits.hpp"

#include <bit>
#include <stdexcept>

namespace qkdnet {

Bits Bits::random(std::size_t n, Rng& rng) {
  Bits b(n);
  for (auto& w : b.words_) w = rng.next();
  if (n & 63) b.words_.back() &= (std::uint64_t{1} << (n & 63)) - 1;
  return b;
}

Bits Bits::from_string(std::string_view s) {
  Bits b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      b.set(i, true);
    else if (s[i] != '0')
      throw std::invalid_argument("Bits::from_string: expected '0'/'1'");
  }
  return b;
}

Bits Bits::from_bytes_msb_first(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  if (bytes.size() * 8 < nbits) throw std::invalid_argument("Bits::from_bytes_msb_first: short buffer");
  Bits b(nbits);
  for (std::size_t i = 0; i < nbits; ++i)
    b.set(i, (bytes[i / 8] >> (7 - (i % 8))) & 1);
  return b;
}

void Bits::push_back(bool v) {
  if ((size_ & 63) == 0) words_.push_back(0);
  if (v) words_.back() |= std::uint64_t{1} << (size_ & 63);
  ++size_;
}

void Bits::append(const Bits& other) {
  for (std::size_t i = 0; i < other.size_; ++i) push_back(other.get(i));
}

Bits Bits::slice(std::size_t pos, std::size_t len) const {
  if (pos + len > size_) throw std::out_of_range("Bits::slice");
  Bits out(len);
  for (std::size_t i = 0; i < len; ++i) out.set(i, get(pos + i));
  return out;
}

void Bits::xor_with(const Bits& other) {
  if (size_ != other.size_) throw std::invalid_argument("Bits::xor_with: size mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
}

std::size_t Bits::count_ones() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::size_t Bits::hamming_distance(const Bits& other) const {
  if (size_ != other.size_) throw std::invalid_argument("Bits::hamming_distance: size mismatch");
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i)
    c += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
  return c;
}

std::vector<std::uint8_t> Bits::to_bytes_msb_first() const {
  std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
  for (std::size_t i = 0; i < size_; ++i)
    if (get(i)) out[i / 8] |= std::uint8_t(1u << (7 - (i % 8)));
  return out;
}

std::string Bits::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

}  // namespace qkdnet
