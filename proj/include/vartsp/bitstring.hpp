#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace vartsp {

// Fixed-length binary word, most significant (first sampled) bit first.
// Bit i lives in word i / 64 at position 63 - i % 64, so comparing words
// orders equal-length strings lexicographically.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t length)
      : length_(length), words_((length + 63) / 64, 0) {}

  // Accepts only '0' and '1'; throws DataError otherwise.
  static BitString from_string(std::string_view text);
  // The low `length` bits of `value`, most significant first.
  static BitString from_index(std::uint64_t value, std::size_t length);

  std::size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }

  bool operator[](std::size_t i) const {
    return (words_[i >> 6] >> (63 - (i & 63))) & 1u;
  }
  void set(std::size_t i, bool value) {
    const std::uint64_t mask = std::uint64_t{1} << (63 - (i & 63));
    if (value) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (63 - (i & 63)); }

  // Value of `count` bits starting at `offset`, read most significant first.
  // count <= 64.
  std::uint64_t read_bits(std::size_t offset, std::size_t count) const;

  std::string to_string() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const BitString&, const BitString&) = default;
  friend std::strong_ordering operator<=>(const BitString& a,
                                          const BitString& b) {
    if (auto c = a.length_ <=> b.length_; c != 0) return c;
    return a.words_ <=> b.words_;
  }

 private:
  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

struct BitStringHash {
  std::size_t operator()(const BitString& b) const noexcept;
};

// Count of differing positions. Throws DomainError on a length mismatch.
std::size_t hamming(const BitString& a, const BitString& b);

}  // namespace vartsp
