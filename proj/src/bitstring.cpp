#include "vartsp/bitstring.hpp"

#include <bit>

#include "vartsp/error.hpp"

namespace vartsp {

BitString BitString::from_string(std::string_view text) {
  BitString b(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      b.set(i, true);
    } else if (text[i] != '0') {
      throw DataError("bit string may only contain '0' and '1': \"" +
                      std::string(text) + "\"");
    }
  }
  return b;
}

BitString BitString::from_index(std::uint64_t value, std::size_t length) {
  BitString b(length);
  for (std::size_t i = 0; i < length && i < 64; ++i) {
    b.set(length - 1 - i, (value >> i) & 1u);
  }
  return b;
}

std::uint64_t BitString::read_bits(std::size_t offset,
                                   std::size_t count) const {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    value = (value << 1) | static_cast<std::uint64_t>((*this)[offset + i]);
  }
  return value;
}

std::string BitString::to_string() const {
  std::string out(length_, '0');
  for (std::size_t i = 0; i < length_; ++i) {
    if ((*this)[i]) out[i] = '1';
  }
  return out;
}

std::size_t BitStringHash::operator()(const BitString& b) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ b.size();
  for (const std::uint64_t w : b.words()) {
    h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 31;
  }
  return static_cast<std::size_t>(h);
}

std::size_t hamming(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) {
    throw DomainError("hamming distance needs equal lengths (" +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  std::size_t count = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    count += static_cast<std::size_t>(std::popcount(a.words()[w] ^ b.words()[w]));
  }
  return count;
}

}  // namespace vartsp
