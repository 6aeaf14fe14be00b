#pragma once

#include <cstdint>
#include <vector>

#include "hdglue/hypervector.hpp"
#include "hdglue/error.hpp"
#include "hdglue/seed.hpp"

namespace testing {

inline hdglue::Hypervector rand_hv(std::uint64_t i, std::uint32_t dim = 10000, std::uint64_t seed = 99) {
  return hdglue::random_hypervector(hdglue::SeedContext(seed, "test", i), dim);
}

inline hdglue::Hypervector zeros(std::uint32_t dim) { return hdglue::Hypervector(dim); }

// Reference bit-by-bit Hamming distance.
inline std::size_t naive_hamming(const hdglue::Hypervector& a, const hdglue::Hypervector& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) n += a.bit(i) != b.bit(i);
  return n;
}

inline std::vector<float> random_embedding(hdglue::KeyedStream& rng, std::uint32_t d, double scale = 1.0) {
  std::vector<float> v(d);
  for (auto& x : v) x = static_cast<float>(rng.normal() * scale);
  return v;
}

}  // namespace testing

#define CHECK_ERROR_KIND(expr, expected_kind)                   \
  do {                                                          \
    bool thrown_ = false;                                       \
    try {                                                       \
      (void)(expr);                                             \
    } catch (const hdglue::Error& e_) {                         \
      thrown_ = true;                                           \
      CHECK_MESSAGE(e_.kind() == (expected_kind), e_.what());   \
    }                                                           \
    CHECK_MESSAGE(thrown_, "expected an hdglue::Error");        \
  } while (0)
