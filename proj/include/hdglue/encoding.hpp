#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hdglue/hypervector.hpp"

namespace hdglue {

inline constexpr std::uint32_t kDefaultLevels = 65;
inline constexpr std::uint32_t kMaxLevels = 1025;

// Chain of level hypervectors covering [-1, 1]. levels[0] and levels[B-1] are
// independent random endpoints; each step flips a disjoint slice of the bits
// where the endpoints disagree, so hamming(levels[i], levels[j]) is exactly the
// sum of the flip schedule between i and j.
class LevelTable {
 public:
  LevelTable() = default;

  // Endpoints from SeedContext(seed, "level-endpoint", 0 / 1); slice order from
  // SeedContext(seed, "level-order", 0).
  static LevelTable build(std::uint32_t dim, std::uint32_t num_levels, std::uint64_t seed);

  [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(levels_.size()); }
  [[nodiscard]] const Hypervector& level(std::size_t k) const { return levels_.at(k); }
  [[nodiscard]] std::span<const Hypervector> levels() const noexcept { return levels_; }
  // flip_schedule()[k] bits differ between levels k and k+1.
  [[nodiscard]] std::span<const std::uint32_t> flip_schedule() const noexcept { return flips_; }

 private:
  std::uint32_t dim_ = 0;
  std::vector<Hypervector> levels_;
  std::vector<std::uint32_t> flips_;
};

// Nearest uniform bin of tanh(x) over [-1, 1]: round(((tanh(x)+1)/2)*(B-1)),
// ties rounding up. Throws kInvalidValue for non-finite x.
std::uint32_t quantize_value(double x, std::uint32_t num_levels);

// positions[i] = random_hypervector(SeedContext(seed, "position", i)).
class PositionBasis {
 public:
  PositionBasis() = default;
  static PositionBasis build(std::uint32_t dim, std::uint32_t length, std::uint64_t seed);

  [[nodiscard]] std::uint32_t length() const noexcept { return static_cast<std::uint32_t>(positions_.size()); }
  [[nodiscard]] const Hypervector& position(std::size_t i) const { return positions_.at(i); }
  [[nodiscard]] std::span<const Hypervector> positions() const noexcept { return positions_; }

 private:
  std::vector<Hypervector> positions_;
};

struct EncoderConfig {
  std::uint64_t seed = 0;
  std::uint32_t dim = kDefaultDim;
  std::uint32_t levels = kDefaultLevels;
  std::uint32_t length = 0;  // embedding components

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Throws on any out-of-range field.
void validate(const EncoderConfig& config);

// Turns an embedding into a record hypervector: consensus over
// levels[quantize(e_i)] XOR positions[i], tiebreak from ("tiebreak", 0).
class EmbeddingEncoder {
 public:
  explicit EmbeddingEncoder(const EncoderConfig& config);

  [[nodiscard]] Hypervector encode(std::span<const float> values) const;
  [[nodiscard]] Hypervector encode(std::span<const double> values) const;
  // Encodes precomputed level indices, one per position.
  [[nodiscard]] Hypervector encode_levels(std::span<const std::uint32_t> level_indices) const;

  [[nodiscard]] const EncoderConfig& config() const noexcept { return config_; }
  [[nodiscard]] const LevelTable& level_table() const noexcept { return levels_; }
  [[nodiscard]] const PositionBasis& basis() const noexcept { return basis_; }
  [[nodiscard]] const Hypervector& tiebreak() const noexcept { return tiebreak_; }

 private:
  template <typename T>
  Hypervector encode_impl(std::span<const T> values) const;

  EncoderConfig config_;
  LevelTable levels_;
  PositionBasis basis_;
  Hypervector tiebreak_;
};

// SeedContext used for the encoder's tiebreak vector.
SeedContext encoder_tiebreak_context(std::uint64_t seed);

// XOR of all items; order-independent. Throws on empty input or mixed dims.
Hypervector encode_set(std::span<const Hypervector> items);

// items[0] ^ pi(items[1]) ^ pi^2(items[2]) ^ ...
Hypervector encode_sequence(std::span<const Hypervector> items, const Permutation& pi);
// seq(items..., item) from seq(items...) of the given length.
Hypervector sequence_append(const Hypervector& sequence, std::size_t length, const Hypervector& item,
                            const Permutation& pi);
// seq(item, items...) from seq(items...).
Hypervector sequence_prepend(const Hypervector& sequence, const Hypervector& item, const Permutation& pi);

}  // namespace hdglue
