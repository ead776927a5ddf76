#include "vartsp/codec.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <vector>

#include "vartsp/error.hpp"

namespace vartsp {

namespace {

// Largest n whose n! fits comfortably in 64 bits.
constexpr std::size_t kMaxU64Factorial = 20;

void check_n(std::size_t n) {
  if (n < 3) {
    throw DomainError("codec needs at least 3 locations, got " +
                      std::to_string(n));
  }
}

void check_length(const BitString& b, std::size_t expected, const char* what) {
  if (b.size() != expected) {
    throw DomainError(std::string(what) + " codec expects " +
                      std::to_string(expected) + " bits, got " +
                      std::to_string(b.size()));
  }
}

std::uint64_t factorial_u64(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

Cycle rotate_to_zero(std::vector<int> perm) {
  const auto zero = std::find(perm.begin(), perm.end(), 0);
  std::rotate(perm.begin(), zero, perm.end());
  return Cycle(std::move(perm));
}

BitString big_to_bits(BigInt value, std::size_t length) {
  BitString b(length);
  for (std::size_t i = 0; i < length; ++i) {
    if (boost::multiprecision::bit_test(value, static_cast<unsigned>(i))) {
      b.set(length - 1 - i, true);
    }
  }
  return b;
}

}  // namespace

std::string to_string(CodecKind kind) {
  return kind == CodecKind::kFactorial ? "factorial" : "non_factorial";
}

CodecKind parse_codec_kind(const std::string& text) {
  if (text == "factorial") return CodecKind::kFactorial;
  if (text == "non_factorial" || text == "non-factorial" || text == "original") {
    return CodecKind::kNonFactorial;
  }
  throw ConfigError("unknown codec \"" + text +
                    "\" (expected non_factorial or factorial)");
}

BigInt factorial(std::size_t n) {
  BigInt f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

std::size_t ceil_log2(std::uint64_t i) {
  if (i <= 1) return 0;
  return static_cast<std::size_t>(std::bit_width(i - 1));
}

std::size_t bit_length(CodecKind kind, std::size_t n) {
  check_n(n);
  if (kind == CodecKind::kNonFactorial) {
    std::size_t total = 0;
    for (std::size_t i = 1; i < n; ++i) total += ceil_log2(i);
    return total;
  }
  // ceil(log2 m) equals the bit width of m - 1.
  const BigInt m = factorial(n) - 1;
  return static_cast<std::size_t>(boost::multiprecision::msb(m)) + 1;
}

std::uint64_t gray_to_index(std::uint64_t g) {
  for (unsigned shift = 1; shift < 64; shift <<= 1) g ^= g >> shift;
  return g;
}

BitString gray_to_binary(const BitString& gray) {
  BitString out(gray.size());
  bool acc = false;
  for (std::size_t i = 0; i < gray.size(); ++i) {
    acc ^= gray[i];
    out.set(i, acc);
  }
  return out;
}

BitString binary_to_gray(const BitString& binary) {
  BitString out(binary.size());
  bool prev = false;
  for (std::size_t i = 0; i < binary.size(); ++i) {
    out.set(i, binary[i] != prev);
    prev = binary[i];
  }
  return out;
}

std::uint64_t interpret(const BitString& bits, bool gray) {
  if (bits.size() > 64) {
    throw DomainError("interpret handles at most 64 bits; use interpret_big");
  }
  const std::uint64_t value = bits.read_bits(0, bits.size());
  return gray ? gray_to_index(value) : value;
}

BigInt interpret_big(const BitString& bits, bool gray) {
  const BitString plain = gray ? gray_to_binary(bits) : bits;
  BigInt value = 0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    value <<= 1;
    if (plain[i]) value |= 1;
  }
  return value;
}

Cycle decode_non_factorial(const BitString& b, std::size_t n, bool gray,
                           GrayScope scope) {
  check_n(n);
  check_length(b, bit_length(CodecKind::kNonFactorial, n), "non-factorial");
  const bool whole_word = gray && scope == GrayScope::kWholeWord;
  const BitString plain = whole_word ? gray_to_binary(b) : BitString();
  const BitString& src = whole_word ? plain : b;
  const bool chunk_gray = gray && !whole_word;

  std::vector<int> remaining(n - 1);
  std::iota(remaining.begin(), remaining.end(), 1);
  std::vector<int> order;
  order.reserve(n);
  order.push_back(0);
  std::size_t offset = 0;
  for (std::size_t i = n - 1; i > 1; --i) {
    const std::size_t width = ceil_log2(i);
    std::uint64_t j = src.read_bits(offset, width);
    if (chunk_gray) j = gray_to_index(j);
    offset += width;
    const std::size_t k = static_cast<std::size_t>(j % i);
    order.push_back(remaining[k]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(k));
  }
  order.push_back(remaining.front());
  return Cycle(std::move(order));
}

Cycle decode_factorial(const BitString& b, std::size_t n, bool gray) {
  check_n(n);
  check_length(b, bit_length(CodecKind::kFactorial, n), "factorial");
  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::vector<int> perm;
  perm.reserve(n);
  if (n <= kMaxU64Factorial) {
    std::uint64_t f = factorial_u64(n);
    std::uint64_t y = interpret(b, gray) % f;
    for (std::size_t i = 0; i < n; ++i) {
      f /= (n - i);
      const std::uint64_t k = y / f;
      perm.push_back(nodes[k]);
      nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(k));
      y -= k * f;
    }
  } else {
    BigInt f = factorial(n);
    BigInt y = interpret_big(b, gray) % f;
    for (std::size_t i = 0; i < n; ++i) {
      f /= (n - i);
      const BigInt k_big = y / f;
      const auto k = k_big.convert_to<std::size_t>();
      perm.push_back(nodes[k]);
      nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(k));
      y -= k_big * f;
    }
  }
  return rotate_to_zero(std::move(perm));
}

Cycle decode(const CodecSpec& spec, const BitString& b) {
  if (spec.kind == CodecKind::kFactorial) {
    return decode_factorial(b, spec.n, spec.gray);
  }
  return decode_non_factorial(b, spec.n, spec.gray, spec.gray_scope);
}

BitString encode_cycle(const Cycle& c, const CodecSpec& spec) {
  const std::size_t n = spec.n;
  check_n(n);
  if (c.size() != n) {
    throw DomainError("cycle has " + std::to_string(c.size()) +
                      " locations, codec expects " + std::to_string(n));
  }
  const std::size_t length = bit_length(spec);

  if (spec.kind == CodecKind::kFactorial) {
    std::vector<int> nodes(n);
    std::iota(nodes.begin(), nodes.end(), 0);
    BigInt rank = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = std::find(nodes.begin(), nodes.end(), c[i]);
      rank = rank * (n - i) + static_cast<unsigned>(it - nodes.begin());
      nodes.erase(it);
    }
    const BitString binary = big_to_bits(rank, length);
    return spec.gray ? binary_to_gray(binary) : binary;
  }

  std::vector<int> remaining(n - 1);
  std::iota(remaining.begin(), remaining.end(), 1);
  const bool chunk_gray = spec.gray && spec.gray_scope == GrayScope::kPerChunk;
  BitString out(length);
  std::size_t offset = 0;
  std::size_t pos = 1;
  for (std::size_t i = n - 1; i > 1; --i, ++pos) {
    const auto it = std::find(remaining.begin(), remaining.end(), c[pos]);
    std::uint64_t j = static_cast<std::uint64_t>(it - remaining.begin());
    remaining.erase(it);
    if (chunk_gray) j = index_to_gray(j);
    const std::size_t width = ceil_log2(i);
    for (std::size_t bit = 0; bit < width; ++bit) {
      out.set(offset + bit, (j >> (width - 1 - bit)) & 1u);
    }
    offset += width;
  }
  if (spec.gray && spec.gray_scope == GrayScope::kWholeWord) {
    return binary_to_gray(out);
  }
  return out;
}

}  // namespace vartsp
