#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "vartsp/bitstring.hpp"
#include "vartsp/codec.hpp"
#include "vartsp/qsim.hpp"
#include "vartsp/tsp.hpp"

namespace vartsp {

// Bit string -> tour length memo with hit/miss counters. Readers share the
// table; insertion is exclusive.
class CostCache {
 public:
  std::optional<double> find(const BitString& b) const;
  void insert(const BitString& b, double value);
  std::size_t size() const;

  void record_hits(std::uint64_t k) { hits_ += k; }
  void record_misses(std::uint64_t k) { misses_ += k; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::uint64_t queries() const { return hits_ + misses_; }
  void reset();

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<BitString, double, BitStringHash> table_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

// Maps sampled bit strings to tour lengths through a codec. With caching off
// every query recomputes and counts as a miss.
class CostEvaluator {
 public:
  CostEvaluator(const TspInstance& inst, CodecSpec spec, bool caching = true);

  const TspInstance& instance() const { return *inst_; }
  const CodecSpec& codec() const { return spec_; }
  std::size_t bit_length() const { return bits_; }
  bool caching() const { return caching_; }

  // One query; throws DomainError on a length mismatch.
  double evaluate(const BitString& b);
  // `multiplicity` identical queries, accounted one by one.
  double evaluate(const BitString& b, std::uint64_t multiplicity);
  // Decode + tour length, bypassing the cache and its counters.
  double compute(const BitString& b) const;

  const CostCache& cache() const { return cache_; }
  CostCache& cache() { return cache_; }

 private:
  const TspInstance* inst_;
  CodecSpec spec_;
  std::size_t bits_;
  bool caching_;
  CostCache cache_;
};

// Fraction of lowest-distance shots kept in the average, 0 < S <= 1.
struct SliceConfig {
  double fraction = 1.0;
};

// max(1, floor(S * shots)).
std::size_t slice_count(double fraction, std::size_t shots);

// Mean of the lowest max(1, floor(S * N)) values of an ascending sequence.
// Throws DomainError on an empty input or S outside (0, 1].
double sliced_average(std::span<const double> sorted_ascending,
                      double fraction);

struct BatchCost {
  double sliced_average = 0.0;
  std::vector<double> distances;  // one per shot, ascending
  BitString best;                 // first string (in batch order) at the minimum
  double best_distance = 0.0;
};

// Expands counts to per-shot distances, sorts them and averages the slice.
// Throws DomainError on an empty batch.
BatchCost batch_average(const SampleBatch& batch, SliceConfig slice,
                        CostEvaluator& evaluator);

// (n-1)!/2, exact. Throws DomainError for n < 3.
BigInt distinct_cycles(std::size_t n);

struct CoverageReport {
  std::uint64_t queries = 0;
  BigInt distinct_cycles;
  double coverage = 0.0;  // queries / distinct cycles
};

CoverageReport coverage(std::uint64_t queries, std::size_t n);
inline CoverageReport coverage(const CostCache& cache, std::size_t n) {
  return coverage(cache.queries(), n);
}

}  // namespace vartsp
