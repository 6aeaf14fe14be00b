#include "hdglue/encoding.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "hdglue/error.hpp"

namespace hdglue {

LevelTable LevelTable::build(std::uint32_t dim, std::uint32_t num_levels, std::uint64_t seed) {
  validate_dimension(dim);
  if (num_levels < 2 || num_levels > kMaxLevels) {
    throw Error(ErrorKind::kInvalidValue,
                "level count " + std::to_string(num_levels) + " outside [2, " + std::to_string(kMaxLevels) + "]");
  }
  const Hypervector low = random_hypervector(SeedContext(seed, "level-endpoint", 0), dim);
  const Hypervector high = random_hypervector(SeedContext(seed, "level-endpoint", 1), dim);

  std::vector<std::uint32_t> disagree;
  for (std::uint32_t i = 0; i < dim; ++i) {
    if (low.bit(i) != high.bit(i)) disagree.push_back(i);
  }
  const auto total = static_cast<std::uint64_t>(disagree.size());
  const std::uint64_t steps = num_levels - 1;
  if (steps > total) {
    throw Error(ErrorKind::kTooManyLevels, std::to_string(num_levels) + " levels but endpoints differ in only " +
                                               std::to_string(total) + " bits");
  }
  KeyedStream rng(SeedContext(seed, "level-order", 0));
  for (std::size_t i = disagree.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(disagree[i - 1], disagree[j]);
  }

  LevelTable table;
  table.dim_ = dim;
  table.levels_.reserve(num_levels);
  table.flips_.reserve(steps);
  table.levels_.push_back(low);
  for (std::uint64_t k = 0; k < steps; ++k) {
    const std::uint64_t begin = k * total / steps;
    const std::uint64_t end = (k + 1) * total / steps;
    Hypervector next = table.levels_.back();
    for (std::uint64_t s = begin; s < end; ++s) next.flip_bit(disagree[s]);
    table.flips_.push_back(static_cast<std::uint32_t>(end - begin));
    table.levels_.push_back(std::move(next));
  }
  return table;
}

std::uint32_t quantize_value(double x, std::uint32_t num_levels) {
  if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidValue, "non-finite embedding value");
  if (num_levels < 2) throw Error(ErrorKind::kInvalidValue, "need at least two levels");
  const double top = static_cast<double>(num_levels - 1);
  const double pos = (std::tanh(x) + 1.0) * 0.5 * top;
  double idx = std::floor(pos + 0.5);
  if (idx < 0.0) idx = 0.0;
  if (idx > top) idx = top;
  return static_cast<std::uint32_t>(idx);
}

PositionBasis PositionBasis::build(std::uint32_t dim, std::uint32_t length, std::uint64_t seed) {
  PositionBasis basis;
  basis.positions_.reserve(length);
  for (std::uint32_t i = 0; i < length; ++i) {
    basis.positions_.push_back(random_hypervector(SeedContext(seed, "position", i), dim));
  }
  return basis;
}

void validate(const EncoderConfig& config) {
  validate_dimension(config.dim);
  if (config.levels < 2 || config.levels > kMaxLevels) {
    throw Error(ErrorKind::kInvalidValue, "levels must lie in [2, " + std::to_string(kMaxLevels) + "]");
  }
  if (config.length == 0) throw Error(ErrorKind::kEmptyInput, "embedding length must be positive");
}

SeedContext encoder_tiebreak_context(std::uint64_t seed) { return SeedContext(seed, "tiebreak", 0); }

EmbeddingEncoder::EmbeddingEncoder(const EncoderConfig& config) : config_(config) {
  validate(config);
  levels_ = LevelTable::build(config.dim, config.levels, config.seed);
  basis_ = PositionBasis::build(config.dim, config.length, config.seed);
  tiebreak_ = random_hypervector(encoder_tiebreak_context(config.seed), config.dim);
}

template <typename T>
Hypervector EmbeddingEncoder::encode_impl(std::span<const T> values) const {
  if (values.empty()) throw Error(ErrorKind::kEmptyInput, "empty embedding");
  if (values.size() != config_.length) {
    throw Error(ErrorKind::kLengthMismatch, "embedding has " + std::to_string(values.size()) +
                                                " components, encoder expects " + std::to_string(config_.length));
  }
  std::vector<std::uint32_t> idx(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    idx[i] = quantize_value(static_cast<double>(values[i]), config_.levels);
  }
  return encode_levels(idx);
}

Hypervector EmbeddingEncoder::encode(std::span<const float> values) const { return encode_impl(values); }
Hypervector EmbeddingEncoder::encode(std::span<const double> values) const { return encode_impl(values); }

Hypervector EmbeddingEncoder::encode_levels(std::span<const std::uint32_t> level_indices) const {
  const std::size_t terms = level_indices.size();
  if (terms == 0) throw Error(ErrorKind::kEmptyInput, "empty embedding");
  if (terms != config_.length) throw Error(ErrorKind::kLengthMismatch, "level index count != embedding length");

  // Bit-sliced population counts: plane p holds bit p of each position's count
  // of ones. Equal-weight majority then reduces to a bit-sliced comparison with
  // floor(terms / 2).
  constexpr std::size_t kMaxPlanes = 32;
  const std::size_t planes = static_cast<std::size_t>(std::bit_width(terms));
  std::vector<const std::uint64_t*> level_words(terms);
  for (std::size_t i = 0; i < terms; ++i) {
    level_words[i] = levels_.level(level_indices[i]).words().data();
  }
  const std::uint64_t half = terms / 2;
  const bool even = (terms % 2) == 0;

  Hypervector out(config_.dim);
  auto dst = out.mutable_words();
  auto tie = tiebreak_.words();
  auto positions = basis_.positions();
  for (std::size_t wi = 0; wi < dst.size(); ++wi) {
    std::array<std::uint64_t, kMaxPlanes> plane{};
    for (std::size_t i = 0; i < terms; ++i) {
      std::uint64_t carry = level_words[i][wi] ^ positions[i].words()[wi];
      for (std::size_t p = 0; p < planes && carry != 0; ++p) {
        const std::uint64_t t = plane[p] & carry;
        plane[p] ^= carry;
        carry = t;
      }
    }
    std::uint64_t gt = 0;
    std::uint64_t eq = ~std::uint64_t{0};
    for (std::size_t p = planes; p-- > 0;) {
      const std::uint64_t kbit = ((half >> p) & 1u) ? ~std::uint64_t{0} : 0;
      gt |= eq & plane[p] & ~kbit;
      eq &= ~(plane[p] ^ kbit);
    }
    std::uint64_t word = gt;
    if (even) word |= eq & tie[wi];
    dst[wi] = word;
  }
  if (!dst.empty()) dst.back() &= tail_mask(config_.dim);
  return out;
}

Hypervector encode_set(std::span<const Hypervector> items) {
  if (items.empty()) throw Error(ErrorKind::kEmptyInput, "empty set");
  Hypervector acc = items.front();
  for (std::size_t i = 1; i < items.size(); ++i) acc = bind(acc, items[i]);
  return acc;
}

Hypervector encode_sequence(std::span<const Hypervector> items, const Permutation& pi) {
  if (items.empty()) throw Error(ErrorKind::kEmptyInput, "empty sequence");
  Hypervector acc = items.front();
  for (std::size_t k = 1; k < items.size(); ++k) {
    if (items[k].dim() != acc.dim()) throw Error(ErrorKind::kDimensionMismatch, "sequence items differ in dim");
    acc = bind(acc, pi.apply(items[k], static_cast<std::int64_t>(k)));
  }
  return acc;
}

Hypervector sequence_append(const Hypervector& sequence, std::size_t length, const Hypervector& item,
                            const Permutation& pi) {
  return bind(sequence, pi.apply(item, static_cast<std::int64_t>(length)));
}

Hypervector sequence_prepend(const Hypervector& sequence, const Hypervector& item, const Permutation& pi) {
  return bind(item, pi.apply(sequence, 1));
}

}  // namespace hdglue
