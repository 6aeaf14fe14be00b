#pragma once

// Counter-mode keyed randomness. Every random quantity in the library is a
// pure function of (master_seed, namespace, index, counter), so vectors can be
// regenerated on demand in any order instead of being stored.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace hdglue {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

struct SeedContext {
  std::uint64_t master_seed = 0;
  std::string name_space;
  std::uint64_t index = 0;

  SeedContext() = default;
  SeedContext(std::uint64_t seed, std::string ns, std::uint64_t idx)
      : master_seed(seed), name_space(std::move(ns)), index(idx) {}

  // 64-bit key identifying the stream; the only thing generators consume.
  [[nodiscard]] std::uint64_t key() const noexcept {
    std::uint64_t k = mix64(master_seed + kGolden);
    k = mix64(k ^ fnv1a64(name_space));
    k = mix64(k ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
    return k;
  }

  friend bool operator==(const SeedContext&, const SeedContext&) = default;
};

// Word `block` of the stream identified by `key`.
constexpr std::uint64_t keyed_word(std::uint64_t key, std::uint64_t block) noexcept {
  return mix64(key + (block + 1) * kGolden);
}

// Sequential view over a keyed stream, for consumers that need an arbitrary
// number of draws (shuffles, Gaussian samples).
class KeyedStream {
 public:
  explicit KeyedStream(const SeedContext& ctx) noexcept : key_(ctx.key()) {}
  explicit KeyedStream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept { return keyed_word(key_, counter_++); }

  // Uniform integer in [0, bound) without modulo bias (Lemire).
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hdglue
