#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <string>

#include "vartsp/bitstring.hpp"
#include "vartsp/tsp.hpp"

namespace vartsp {

using BigInt = boost::multiprecision::cpp_int;

// Penalty-free bit string -> cycle maps. Every bit string of the right length
// decodes to a valid cycle.
enum class CodecKind {
  kNonFactorial,  // chunked selection indices with modulo wrap
  kFactorial,     // Lehmer index modulo n!
};

// Where Gray decoding applies. The factorial codec always reads one word.
enum class GrayScope {
  kPerChunk,   // each selection-index chunk is its own Gray word
  kWholeWord,  // the entire string is one Gray word
};

struct CodecSpec {
  CodecKind kind = CodecKind::kNonFactorial;
  bool gray = false;
  std::size_t n = 0;
  GrayScope gray_scope = GrayScope::kPerChunk;

  friend bool operator==(const CodecSpec&, const CodecSpec&) = default;
};

std::string to_string(CodecKind kind);
CodecKind parse_codec_kind(const std::string& text);  // throws ConfigError

BigInt factorial(std::size_t n);

// ceil(log2(i)) for i >= 1.
std::size_t ceil_log2(std::uint64_t i);

// Non-factorial: sum_{i=1}^{n-1} ceil(log2 i). Factorial: ceil(log2 n!).
// Throws DomainError for n < 3.
std::size_t bit_length(CodecKind kind, std::size_t n);
inline std::size_t bit_length(const CodecSpec& spec) {
  return bit_length(spec.kind, spec.n);
}

// Reflected binary Gray code on integers.
inline std::uint64_t index_to_gray(std::uint64_t k) { return k ^ (k >> 1); }
std::uint64_t gray_to_index(std::uint64_t g);

// Prefix-XOR of a Gray-coded word gives its binary reading, and the inverse.
BitString gray_to_binary(const BitString& gray);
BitString binary_to_gray(const BitString& binary);

// Integer value of `bits` (at most 64 of them), binary or Gray reading.
std::uint64_t interpret(const BitString& bits, bool gray);
BigInt interpret_big(const BitString& bits, bool gray);

// Selection-index decode: for i = n-1 down to 2 read ceil(log2 i) bits as j,
// move remaining[j mod i] to the tour; the last remaining location closes it.
Cycle decode_non_factorial(const BitString& b, std::size_t n,
                           bool gray = false,
                           GrayScope scope = GrayScope::kPerChunk);

// Lehmer decode of x mod n! over locations 0..n-1, rotated to start at 0.
Cycle decode_factorial(const BitString& b, std::size_t n, bool gray = false);

// Throws DomainError on a length mismatch.
Cycle decode(const CodecSpec& spec, const BitString& b);

// A preimage of `c` under decode(spec, .): the minimal chunk value for the
// non-factorial codec and the exact Lehmer rank for the factorial one.
BitString encode_cycle(const Cycle& c, const CodecSpec& spec);

}  // namespace vartsp
