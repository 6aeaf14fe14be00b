#include "hdglue/bundling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hdglue/error.hpp"

namespace hdglue {

Weight Weight::from_micros(std::int64_t micros) {
  if (micros <= 0) throw Error(ErrorKind::kInvalidWeight, "weight must be positive");
  return Weight(micros);
}

Weight Weight::from_double(double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorKind::kInvalidWeight, "weight must be finite and positive");
  }
  const double scaled = std::round(value * static_cast<double>(kScale));
  if (scaled < 1.0) throw Error(ErrorKind::kInvalidWeight, "weight below one millionth");
  if (scaled > 9.0e15) throw Error(ErrorKind::kInvalidWeight, "weight too large");
  return Weight(static_cast<std::int64_t>(scaled));
}

std::vector<double> normalize_weights(std::span<const Weight> weights) {
  std::vector<double> out;
  out.reserve(weights.size());
  long double total = 0;
  for (const Weight& w : weights) total += w.micros();
  if (total <= 0) return std::vector<double>(weights.size(), 0.0);
  const long double n = static_cast<long double>(weights.size());
  for (const Weight& w : weights) out.push_back(static_cast<double>(w.micros() * n / total));
  return out;
}

ConsensusAccumulator::ConsensusAccumulator(std::uint32_t dim, SeedContext tiebreak_ctx)
    : dim_(dim), counters_(dim, 0), tiebreak_ctx_(std::move(tiebreak_ctx)) {
  validate_dimension(dim);
  tiebreak_ = random_hypervector(tiebreak_ctx_, dim);
}

ConsensusAccumulator ConsensusAccumulator::restore(std::uint32_t dim, SeedContext tiebreak_ctx,
                                                   std::int64_t total_weight_micros,
                                                   std::uint64_t term_count,
                                                   std::vector<std::int64_t> counters) {
  if (counters.size() != dim) throw Error(ErrorKind::kFormat, "counter array length != dim");
  if (total_weight_micros < 0) throw Error(ErrorKind::kFormat, "negative total weight");
  ConsensusAccumulator acc(dim, std::move(tiebreak_ctx));
  for (std::int64_t c : counters) {
    if (c > total_weight_micros || c < -total_weight_micros) {
      throw Error(ErrorKind::kFormat, "counter exceeds total weight");
    }
  }
  acc.counters_ = std::move(counters);
  acc.total_weight_ = total_weight_micros;
  acc.term_count_ = term_count;
  return acc;
}

void ConsensusAccumulator::check_term(const Hypervector& v, Weight w) const {
  if (v.dim() != dim_) {
    throw Error(ErrorKind::kDimensionMismatch,
                "term dim " + std::to_string(v.dim()) + " vs accumulator " + std::to_string(dim_));
  }
  if (w.micros() <= 0) throw Error(ErrorKind::kInvalidWeight, "weight must be positive");
}

void ConsensusAccumulator::add(const Hypervector& v, Weight w) {
  check_term(v, w);
  std::int64_t new_total = 0;
  if (__builtin_add_overflow(total_weight_, w.micros(), &new_total)) {
    throw Error(ErrorKind::kInvalidWeight, "total weight overflow");
  }
  const std::int64_t step = w.micros();
  auto words = v.words();
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    const std::uint64_t word = words[wi];
    const std::size_t base = wi * 64;
    const std::size_t n = std::min<std::size_t>(64, dim_ - base);
    std::int64_t* c = counters_.data() + base;
    for (std::size_t b = 0; b < n; ++b) {
      const auto bit = static_cast<std::int64_t>((word >> b) & 1u);
      c[b] += (2 * bit - 1) * step;
    }
  }
  total_weight_ = new_total;
  ++term_count_;
}

void ConsensusAccumulator::sub(const Hypervector& v, Weight w) {
  check_term(v, w);
  if (term_count_ == 0 || total_weight_ < w.micros()) {
    throw Error(ErrorKind::kUnderflow, "subtracting more weight than was added");
  }
  const std::int64_t step = w.micros();
  const std::int64_t new_total = total_weight_ - step;
  auto words = v.words();
  bool violated = false;
  for (std::size_t i = 0; i < dim_; ++i) {
    const auto bit = static_cast<std::int64_t>((words[i >> 6] >> (i & 63)) & 1u);
    counters_[i] -= (2 * bit - 1) * step;
    if (counters_[i] > new_total || counters_[i] < -new_total) violated = true;
  }
  if (violated) {
    for (std::size_t i = 0; i < dim_; ++i) {
      const auto bit = static_cast<std::int64_t>((words[i >> 6] >> (i & 63)) & 1u);
      counters_[i] += (2 * bit - 1) * step;
    }
    throw Error(ErrorKind::kUnderflow, "term was not part of the accumulator");
  }
  total_weight_ = new_total;
  --term_count_;
}

void ConsensusAccumulator::merge(const ConsensusAccumulator& other) {
  if (other.dim_ != dim_) throw Error(ErrorKind::kDimensionMismatch, "merging different dims");
  if (!(other.tiebreak_ctx_ == tiebreak_ctx_)) {
    throw Error(ErrorKind::kDimensionMismatch, "merging accumulators with different tiebreaks");
  }
  std::int64_t new_total = 0;
  if (__builtin_add_overflow(total_weight_, other.total_weight_, &new_total)) {
    throw Error(ErrorKind::kInvalidWeight, "total weight overflow");
  }
  for (std::size_t i = 0; i < dim_; ++i) counters_[i] += other.counters_[i];
  total_weight_ = new_total;
  term_count_ += other.term_count_;
}

Hypervector ConsensusAccumulator::finalize() const {
  Hypervector out(dim_);
  auto dst = out.mutable_words();
  auto tie = tiebreak_.words();
  for (std::size_t wi = 0; wi < dst.size(); ++wi) {
    const std::size_t base = wi * 64;
    const std::size_t n = std::min<std::size_t>(64, dim_ - base);
    std::uint64_t pos = 0;
    std::uint64_t zero = 0;
    const std::int64_t* c = counters_.data() + base;
    for (std::size_t b = 0; b < n; ++b) {
      pos |= static_cast<std::uint64_t>(c[b] > 0) << b;
      zero |= static_cast<std::uint64_t>(c[b] == 0) << b;
    }
    dst[wi] = pos | (zero & tie[wi]);
  }
  return out;
}

ConsensusAccumulator merged(const ConsensusAccumulator& a, const ConsensusAccumulator& b) {
  ConsensusAccumulator out = a;
  out.merge(b);
  return out;
}

}  // namespace hdglue
