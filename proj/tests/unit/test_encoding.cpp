#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "hdglue/bundling.hpp"
#include "hdglue/encoding.hpp"

using namespace hdglue;
using testing::rand_hv;

namespace {

// Nearest bin centre by exhaustive search; ties go to the upper bin.
std::uint32_t nearest_bin_oracle(double x, std::uint32_t levels) {
  const double t = std::tanh(x);
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::uint32_t k = 0; k < levels; ++k) {
    const double centre = -1.0 + 2.0 * k / (levels - 1);
    const double d = std::abs(t - centre);
    if (d <= best_d + 1e-12) {
      best = k;
      best_d = std::min(best_d, d);
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("encoding") {
  TEST_CASE("two levels are the two endpoints") {
    const LevelTable t = LevelTable::build(10000, 2, 8);
    CHECK(t.level(0) == random_hypervector(SeedContext(8, "level-endpoint", 0), 10000));
    CHECK(t.level(1) == random_hypervector(SeedContext(8, "level-endpoint", 1), 10000));
    REQUIRE(t.flip_schedule().size() == 1);
    CHECK(t.flip_schedule()[0] == hamming(t.level(0), t.level(1)));
  }

  TEST_CASE("flip slices partition the endpoint disagreement evenly") {
    const LevelTable t = LevelTable::build(10000, 65, 3);
    const std::size_t total = hamming(t.level(0), t.level(64));
    CHECK(total > 4800);
    CHECK(total < 5200);
    std::size_t sum = 0;
    for (std::uint32_t f : t.flip_schedule()) {
      CHECK((f == total / 64 || f == (total + 63) / 64));
      sum += f;
    }
    CHECK(sum == total);
  }

  TEST_CASE("pairwise level distances are exact partial sums") {
    for (std::uint32_t b : {2u, 17u, 65u}) {
      const LevelTable t = LevelTable::build(4000, b, 12);
      for (std::uint32_t i = 0; i < b; ++i) {
        std::size_t partial = 0;
        for (std::uint32_t j = i; j < b; ++j) {
          if (j > i) partial += t.flip_schedule()[j - 1];
          CHECK(hamming(t.level(i), t.level(j)) == partial);
          if (j + 1 < b) CHECK(hamming(t.level(i), t.level(j)) < hamming(t.level(i), t.level(j + 1)));
        }
      }
    }
  }

  TEST_CASE("level table errors") {
    CHECK_ERROR_KIND(LevelTable::build(10000, 1, 0), ErrorKind::kInvalidValue);
    CHECK_ERROR_KIND(LevelTable::build(64, 1025, 0), ErrorKind::kTooManyLevels);
  }

  TEST_CASE("quantization examples") {
    CHECK(quantize_value(0.0, 65) == 32);
    CHECK(quantize_value(1000.0, 65) == 64);
    CHECK(quantize_value(-1000.0, 65) == 0);
    CHECK(quantize_value(std::atanh(-0.5), 5) == 1);
    CHECK(quantize_value(std::atanh(0.5), 3) == 2);
    CHECK_ERROR_KIND(quantize_value(std::numeric_limits<double>::infinity(), 65), ErrorKind::kInvalidValue);
    CHECK_ERROR_KIND(quantize_value(std::nan(""), 65), ErrorKind::kInvalidValue);
  }

  TEST_CASE("quantization agrees with nearest-bin-centre search") {
    KeyedStream rng(SeedContext(2, "q", 0));
    for (std::uint32_t b : {2u, 5u, 17u, 65u, 1025u}) {
      for (int i = 0; i < 2000; ++i) {
        const double x = rng.normal() * 2.0;
        CHECK(quantize_value(x, b) == nearest_bin_oracle(x, b));
      }
    }
  }

  TEST_CASE("position basis") {
    const PositionBasis p = PositionBasis::build(10000, 16, 4);
    REQUIRE(p.length() == 16);
    for (std::uint32_t i = 0; i < 16; ++i) {
      CHECK(p.position(i) == random_hypervector(SeedContext(4, "position", i), 10000));
      for (std::uint32_t j = i + 1; j < 16; ++j) {
        CHECK(similarity(p.position(i), p.position(j)) > 0.45);
        CHECK(similarity(p.position(i), p.position(j)) < 0.55);
      }
    }
  }

  TEST_CASE("single component encodes to level xor position") {
    const EmbeddingEncoder enc(EncoderConfig{5, 10000, 65, 1});
    const std::vector<float> e{0.0f};
    CHECK(enc.encode(std::span<const float>(e)) == (enc.level_table().level(32) ^ enc.basis().position(0)));
  }

  TEST_CASE("encoder matches a generic consensus accumulator") {
    KeyedStream rng(SeedContext(3, "enc", 0));
    for (std::uint32_t d : {2u, 7u, 32u, 64u}) {
      const EncoderConfig cfg{9, 3000, 33, d};
      const EmbeddingEncoder enc(cfg);
      for (int t = 0; t < 5; ++t) {
        const auto e = testing::random_embedding(rng, d);
        ConsensusAccumulator acc(cfg.dim, encoder_tiebreak_context(cfg.seed));
        for (std::uint32_t i = 0; i < d; ++i) {
          acc.add(enc.level_table().level(quantize_value(e[i], cfg.levels)) ^ enc.basis().position(i));
        }
        CHECK(enc.encode(std::span<const float>(e)) == acc.finalize());
        std::vector<double> wide(e.begin(), e.end());
        CHECK(enc.encode(std::span<const double>(wide)) == acc.finalize());
      }
    }
  }

  TEST_CASE("encoding is deterministic and validates input") {
    const EmbeddingEncoder enc(EncoderConfig{1, 10000, 65, 4});
    const std::vector<float> e{0.1f, -0.5f, 2.0f, 0.0f};
    CHECK(enc.encode(std::span<const float>(e)) == EmbeddingEncoder(EncoderConfig{1, 10000, 65, 4}).encode(std::span<const float>(e)));
    const std::vector<float> short_e{0.1f};
    CHECK_ERROR_KIND(enc.encode(std::span<const float>(short_e)), ErrorKind::kLengthMismatch);
    CHECK_ERROR_KIND(enc.encode(std::span<const float>()), ErrorKind::kEmptyInput);
    const std::vector<float> bad{0.1f, std::numeric_limits<float>::infinity(), 0.0f, 0.0f};
    CHECK_ERROR_KIND(enc.encode(std::span<const float>(bad)), ErrorKind::kInvalidValue);
    CHECK_ERROR_KIND(validate(EncoderConfig{1, 10000, 1, 4}), ErrorKind::kInvalidValue);
    CHECK_ERROR_KIND(validate(EncoderConfig{1, 10000, 65, 0}), ErrorKind::kEmptyInput);
    CHECK_ERROR_KIND(validate(EncoderConfig{1, 10, 65, 4}), ErrorKind::kInvalidDimension);
  }

  TEST_CASE("probing a component recovers its level") {
    const EncoderConfig cfg{6, 10000, 65, 32};
    const EmbeddingEncoder enc(cfg);
    KeyedStream rng(SeedContext(6, "probe", 0));
    int ok = 0;
    int total = 0;
    for (int t = 0; t < 100; ++t) {
      const auto e = testing::random_embedding(rng, 32);
      const Hypervector h = enc.encode(std::span<const float>(e));
      for (std::uint32_t i = 0; i < 32; ++i) {
        const Hypervector probed = h ^ enc.basis().position(i);
        const std::uint32_t q = quantize_value(e[i], 65);
        const std::size_t own = hamming(probed, enc.level_table().level(q));
        bool nearer = true;
        for (std::uint32_t k = 0; k < 65; ++k) {
          if ((k > q ? k - q : q - k) >= 4 && hamming(probed, enc.level_table().level(k)) <= own) nearer = false;
        }
        ok += nearer;
        ++total;
      }
    }
    MESSAGE("recovered " << ok << " of " << total);
    CHECK(ok >= 0.98 * total);
  }

  TEST_CASE("one changed component out of 256 barely moves the encoding") {
    const EmbeddingEncoder enc(EncoderConfig{7, 10000, 65, 256});
    KeyedStream rng(SeedContext(7, "near", 0));
    for (int t = 0; t < 20; ++t) {
      auto e = testing::random_embedding(rng, 256);
      const Hypervector a = enc.encode(std::span<const float>(e));
      e[rng.uniform_below(256)] = static_cast<float>(rng.normal() * 3.0);
      CHECK(similarity(a, enc.encode(std::span<const float>(e))) > 0.9);
    }
  }

  TEST_CASE("same bin means the same encoding; swapped values change it") {
    const EmbeddingEncoder enc(EncoderConfig{8, 10000, 65, 16});
    KeyedStream rng(SeedContext(8, "swap", 0));
    auto e = testing::random_embedding(rng, 16);
    const Hypervector a = enc.encode(std::span<const float>(e));
    auto nudged = e;
    nudged[3] = static_cast<float>(std::atanh(std::tanh(static_cast<double>(e[3])) + 1e-6));
    if (quantize_value(nudged[3], 65) == quantize_value(e[3], 65)) {
      CHECK(enc.encode(std::span<const float>(nudged)) == a);
    }
    e[0] = 2.0f;
    e[1] = -2.0f;
    const Hypervector b = enc.encode(std::span<const float>(e));
    std::swap(e[0], e[1]);
    CHECK(similarity(b, enc.encode(std::span<const float>(e))) < 0.99);
  }

  TEST_CASE("set encoding") {
    const Hypervector x = rand_hv(1);
    const Hypervector y = rand_hv(2);
    const Hypervector z = rand_hv(3);
    const std::vector<Hypervector> one{x};
    CHECK(encode_set(one) == x);
    const std::vector<Hypervector> xy{x, y};
    CHECK((encode_set(xy) ^ y) == x);
    const std::vector<Hypervector> fwd{x, y, z};
    const std::vector<Hypervector> rev{z, y, x};
    CHECK(encode_set(fwd) == encode_set(rev));
    CHECK_ERROR_KIND(encode_set(std::vector<Hypervector>{}), ErrorKind::kEmptyInput);
    CHECK_ERROR_KIND(encode_set(std::vector<Hypervector>{x, rand_hv(4, 9000)}), ErrorKind::kDimensionMismatch);
  }

  TEST_CASE("sequence encoding") {
    const Permutation pi(5, 10000);
    const Hypervector a = rand_hv(1);
    const Hypervector b = rand_hv(2);
    const Hypervector c = rand_hv(3);
    const Hypervector d = rand_hv(4);
    const Hypervector e = rand_hv(5);
    CHECK(encode_sequence(std::vector<Hypervector>{a}, pi) == a);
    CHECK(encode_sequence(std::vector<Hypervector>{a, b}, pi) == (a ^ pi.apply(b, 1)));
    const Hypervector abcd = encode_sequence(std::vector<Hypervector>{a, b, c, d}, pi);
    CHECK(abcd == (a ^ pi.apply(b, 1) ^ pi.apply(c, 2) ^ pi.apply(d, 3)));
    CHECK(sequence_append(abcd, 4, e, pi) == encode_sequence(std::vector<Hypervector>{a, b, c, d, e}, pi));
    CHECK(sequence_prepend(abcd, e, pi) == encode_sequence(std::vector<Hypervector>{e, a, b, c, d}, pi));
    const Hypervector abdc = encode_sequence(std::vector<Hypervector>{a, b, d, c}, pi);
    CHECK(similarity(abcd, abdc) > 0.45);
    CHECK(similarity(abcd, abdc) < 0.55);
    CHECK_ERROR_KIND(encode_sequence(std::vector<Hypervector>{}, pi), ErrorKind::kEmptyInput);
  }
}
