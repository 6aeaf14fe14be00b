#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "hdglue/hypervector.hpp"
#include "hdglue/seed.hpp"

namespace hdglue {

// Non-negative fixed-point vote weight in integer millionths. Exact integer
// arithmetic keeps consensus accumulation associative and commutative.
class Weight {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Weight() = default;
  static Weight from_micros(std::int64_t micros);
  // Rounds to the nearest millionth; rejects non-finite or non-positive values.
  static Weight from_double(double value);
  static constexpr Weight one() noexcept { return Weight(kScale); }

  [[nodiscard]] constexpr std::int64_t micros() const noexcept { return micros_; }
  [[nodiscard]] constexpr double value() const noexcept {
    return static_cast<double>(micros_) / static_cast<double>(kScale);
  }

  friend constexpr auto operator<=>(const Weight&, const Weight&) = default;

 private:
  constexpr explicit Weight(std::int64_t micros) noexcept : micros_(micros) {}
  std::int64_t micros_ = 0;
};

// Rescales weights so they sum to their count (the fractional-vote reporting
// convention). Accumulation itself never normalizes: finalize is scale-free.
std::vector<double> normalize_weights(std::span<const Weight> weights);

// Per-bit signed tallies realizing weighted consensus summation. counters[i]
// is the exact sum of w_k * (2*b_k[i] - 1) over the current terms, so terms
// can be removed again and shards merged in any order.
class ConsensusAccumulator {
 public:
  ConsensusAccumulator() = default;
  ConsensusAccumulator(std::uint32_t dim, SeedContext tiebreak_ctx);

  // Rebuilds an accumulator from stored state; validates the counter bound.
  static ConsensusAccumulator restore(std::uint32_t dim, SeedContext tiebreak_ctx,
                                      std::int64_t total_weight_micros, std::uint64_t term_count,
                                      std::vector<std::int64_t> counters);

  void add(const Hypervector& v, Weight w = Weight::one());
  // Exact inverse of add(v, w). Throws kUnderflow if the totals would go
  // negative or a counter would exceed the remaining total weight.
  void sub(const Hypervector& v, Weight w = Weight::one());
  // Element-wise sum of another shard with the same dim and tiebreak context.
  void merge(const ConsensusAccumulator& other);

  // Bit i is 1 for a positive tally, 0 for negative, tiebreak[i] on exact zero.
  [[nodiscard]] Hypervector finalize() const;

  [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::span<const std::int64_t> counters() const noexcept { return counters_; }
  [[nodiscard]] std::int64_t total_weight_micros() const noexcept { return total_weight_; }
  [[nodiscard]] std::uint64_t term_count() const noexcept { return term_count_; }
  [[nodiscard]] const Hypervector& tiebreak() const noexcept { return tiebreak_; }
  [[nodiscard]] const SeedContext& tiebreak_context() const noexcept { return tiebreak_ctx_; }

  // Equal counters, totals and tiebreak context.
  friend bool operator==(const ConsensusAccumulator& a, const ConsensusAccumulator& b) {
    return a.dim_ == b.dim_ && a.total_weight_ == b.total_weight_ && a.term_count_ == b.term_count_ &&
           a.tiebreak_ctx_ == b.tiebreak_ctx_ && a.counters_ == b.counters_;
  }

 private:
  void check_term(const Hypervector& v, Weight w) const;

  std::uint32_t dim_ = 0;
  std::vector<std::int64_t> counters_;
  std::int64_t total_weight_ = 0;
  std::uint64_t term_count_ = 0;
  SeedContext tiebreak_ctx_;
  Hypervector tiebreak_;
};

ConsensusAccumulator merged(const ConsensusAccumulator& a, const ConsensusAccumulator& b);

}  // namespace hdglue
