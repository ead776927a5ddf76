#include "vartsp/cost.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "vartsp/error.hpp"

namespace vartsp {

std::optional<double> CostCache::find(const BitString& b) const {
  std::shared_lock lock(mutex_);
  const auto it = table_.find(b);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

void CostCache::insert(const BitString& b, double value) {
  std::unique_lock lock(mutex_);
  table_.try_emplace(b, value);
}

std::size_t CostCache::size() const {
  std::shared_lock lock(mutex_);
  return table_.size();
}

void CostCache::reset() {
  std::unique_lock lock(mutex_);
  table_.clear();
  hits_ = 0;
  misses_ = 0;
}

CostEvaluator::CostEvaluator(const TspInstance& inst, CodecSpec spec,
                             bool caching)
    : inst_(&inst), spec_(spec), bits_(0), caching_(caching) {
  if (spec_.n != inst.size()) {
    throw ConfigError("codec built for " + std::to_string(spec_.n) +
                      " locations, instance has " +
                      std::to_string(inst.size()));
  }
  bits_ = vartsp::bit_length(spec_);
}

double CostEvaluator::compute(const BitString& b) const {
  return tour_length(*inst_, decode(spec_, b));
}

double CostEvaluator::evaluate(const BitString& b) {
  return evaluate(b, 1);
}

double CostEvaluator::evaluate(const BitString& b, std::uint64_t multiplicity) {
  if (b.size() != bits_) {
    throw DomainError("expected a " + std::to_string(bits_) +
                      "-bit string, got " + std::to_string(b.size()));
  }
  if (multiplicity == 0) return compute(b);
  if (!caching_) {
    // Every shot is decoded afresh.
    double value = 0.0;
    for (std::uint64_t k = 0; k < multiplicity; ++k) value = compute(b);
    cache_.record_misses(multiplicity);
    return value;
  }
  if (const auto hit = cache_.find(b)) {
    cache_.record_hits(multiplicity);
    return *hit;
  }
  const double value = compute(b);
  cache_.insert(b, value);
  cache_.record_misses(1);
  cache_.record_hits(multiplicity - 1);
  return value;
}

std::size_t slice_count(double fraction, std::size_t shots) {
  const auto k = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(shots)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(shots, 1));
}

double sliced_average(std::span<const double> sorted_ascending,
                      double fraction) {
  if (sorted_ascending.empty()) throw DomainError("empty batch");
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw DomainError("slice fraction must lie in (0, 1]");
  }
  const std::size_t k = slice_count(fraction, sorted_ascending.size());
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += sorted_ascending[i];
  return total / static_cast<double>(k);
}

BatchCost batch_average(const SampleBatch& batch, SliceConfig slice,
                        CostEvaluator& evaluator) {
  if (batch.counts.empty() || batch.shots == 0) {
    throw DomainError("empty sample batch");
  }
  BatchCost out;
  out.distances.reserve(batch.shots);
  bool first = true;
  for (const auto& [bits, count] : batch.counts) {
    const double d = evaluator.evaluate(bits, count);
    out.distances.insert(out.distances.end(), count, d);
    if (first || d < out.best_distance) {
      out.best_distance = d;
      out.best = bits;
      first = false;
    }
  }
  std::sort(out.distances.begin(), out.distances.end());
  out.sliced_average = sliced_average(out.distances, slice.fraction);
  return out;
}

BigInt distinct_cycles(std::size_t n) {
  if (n < 3) {
    throw DomainError("distinct cycles need at least 3 locations, got " +
                      std::to_string(n));
  }
  return factorial(n - 1) / 2;
}

CoverageReport coverage(std::uint64_t queries, std::size_t n) {
  CoverageReport report;
  report.queries = queries;
  report.distinct_cycles = distinct_cycles(n);
  report.coverage = static_cast<double>(queries) /
                    report.distinct_cycles.convert_to<double>();
  return report;
}

}  // namespace vartsp
