#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hdglue/seed.hpp"

namespace hdglue {

inline constexpr std::uint32_t kMinDim = 64;
inline constexpr std::uint32_t kDefaultMaxDim = 1u << 20;
inline constexpr std::uint32_t kDefaultDim = 10000;

// Throws kInvalidDimension unless kMinDim <= dim <= max_dim.
void validate_dimension(std::uint32_t dim, std::uint32_t max_dim = kDefaultMaxDim);

constexpr std::size_t words_for(std::uint32_t dim) noexcept { return (dim + 63u) / 64u; }

// Packed binary hypervector. Storage bits past dim() are always zero.
class Hypervector {
 public:
  Hypervector() = default;
  explicit Hypervector(std::uint32_t dim) : dim_(dim), words_(words_for(dim), 0) {}

  // Takes ownership of packed words; throws kFormat if the count is wrong or
  // tail bits are set.
  static Hypervector from_words(std::uint32_t dim, std::vector<std::uint64_t> words);

  [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }
  [[nodiscard]] bool empty() const noexcept { return dim_ == 0; }
  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }

  [[nodiscard]] bool bit(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set_bit(std::size_t i, bool value) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  void flip_bit(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  [[nodiscard]] std::size_t popcount() const noexcept;
  [[nodiscard]] bool tail_clean() const noexcept;

  // Mutable word access for kernels that build vectors in place; callers must
  // keep the tail clean.
  std::span<std::uint64_t> mutable_words() noexcept { return words_; }

  friend bool operator==(const Hypervector&, const Hypervector&) = default;

 private:
  std::uint32_t dim_ = 0;
  std::vector<std::uint64_t> words_;
};

[[nodiscard]] std::uint64_t tail_mask(std::uint32_t dim) noexcept;

// Each bit an unbiased coin flip determined only by ctx.
Hypervector random_hypervector(const SeedContext& ctx, std::uint32_t dim,
                               std::uint32_t max_dim = kDefaultMaxDim);

Hypervector bind(const Hypervector& a, const Hypervector& b);
Hypervector complement(const Hypervector& a);
std::size_t hamming(const Hypervector& a, const Hypervector& b);
// 1 - hamming/dim.
double similarity(const Hypervector& a, const Hypervector& b);

inline Hypervector operator^(const Hypervector& a, const Hypervector& b) { return bind(a, b); }

// Fixed full-length permutation of bit positions: bit i of the input lands at
// table()[i] of the output.
class Permutation {
 public:
  Permutation() = default;
  // Fisher-Yates table seeded from SeedContext(seed, "permutation", 0).
  Permutation(std::uint64_t seed, std::uint32_t dim);
  static Permutation from_context(const SeedContext& ctx, std::uint32_t dim);

  [[nodiscard]] std::uint32_t dim() const noexcept { return static_cast<std::uint32_t>(table_.size()); }
  [[nodiscard]] std::span<const std::uint32_t> table() const noexcept { return table_; }

  // Applies the permutation `power` times (negative powers invert). Uses the
  // cycle decomposition so cost is independent of |power|.
  [[nodiscard]] Hypervector apply(const Hypervector& v, std::int64_t power) const;

  // Reference path: applies the table (or its inverse) |power| times.
  [[nodiscard]] Hypervector apply_iterated(const Hypervector& v, std::int64_t power) const;

 private:
  void build_cycles();

  std::vector<std::uint32_t> table_;
  std::vector<std::uint32_t> cycle_elems_;    // i, table[i], table[table[i]], ...
  std::vector<std::uint32_t> cycle_offsets_;  // start of each cycle, plus end sentinel
};

inline Hypervector permute(const Hypervector& v, std::int64_t power, const Permutation& pi) {
  return pi.apply(v, power);
}

}  // namespace hdglue
