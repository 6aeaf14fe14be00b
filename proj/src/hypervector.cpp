#include "hdglue/hypervector.hpp"

#include <bit>
#include <numeric>
#include <string>

#include "hdglue/error.hpp"

namespace hdglue {

namespace {

void require_same_dim(const Hypervector& a, const Hypervector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
}

}  // namespace

void validate_dimension(std::uint32_t dim, std::uint32_t max_dim) {
  if (dim < kMinDim || dim > max_dim) {
    throw Error(ErrorKind::kInvalidDimension,
                "dim " + std::to_string(dim) + " outside [" + std::to_string(kMinDim) + ", " +
                    std::to_string(max_dim) + "]");
  }
}

std::uint64_t tail_mask(std::uint32_t dim) noexcept {
  const std::uint32_t rem = dim & 63u;
  return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
}

Hypervector Hypervector::from_words(std::uint32_t dim, std::vector<std::uint64_t> words) {
  if (words.size() != words_for(dim)) {
    throw Error(ErrorKind::kFormat, "word count does not match dim " + std::to_string(dim));
  }
  Hypervector v;
  v.dim_ = dim;
  v.words_ = std::move(words);
  if (!v.tail_clean()) throw Error(ErrorKind::kFormat, "tail bits set past dim");
  return v;
}

std::size_t Hypervector::popcount() const noexcept {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool Hypervector::tail_clean() const noexcept {
  if (words_.empty()) return true;
  return (words_.back() & ~tail_mask(dim_)) == 0;
}

Hypervector random_hypervector(const SeedContext& ctx, std::uint32_t dim, std::uint32_t max_dim) {
  validate_dimension(dim, max_dim);
  Hypervector v(dim);
  const std::uint64_t key = ctx.key();
  auto words = v.mutable_words();
  for (std::size_t b = 0; b < words.size(); ++b) words[b] = keyed_word(key, b);
  words.back() &= tail_mask(dim);
  return v;
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b);
  Hypervector out(a.dim());
  auto dst = out.mutable_words();
  auto x = a.words();
  auto y = b.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = x[i] ^ y[i];
  return out;
}

Hypervector complement(const Hypervector& a) {
  Hypervector out(a.dim());
  auto dst = out.mutable_words();
  auto src = a.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = ~src[i];
  if (!dst.empty()) dst.back() &= tail_mask(a.dim());
  return out;
}

std::size_t hamming(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b);
  auto x = a.words();
  auto y = b.words();
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += static_cast<std::size_t>(std::popcount(x[i] ^ y[i]));
  return n;
}

double similarity(const Hypervector& a, const Hypervector& b) {
  const std::size_t h = hamming(a, b);
  if (a.dim() == 0) return 1.0;
  return 1.0 - static_cast<double>(h) / static_cast<double>(a.dim());
}

Permutation::Permutation(std::uint64_t seed, std::uint32_t dim)
    : Permutation(from_context(SeedContext(seed, "permutation", 0), dim)) {}

Permutation Permutation::from_context(const SeedContext& ctx, std::uint32_t dim) {
  validate_dimension(dim);
  Permutation p;
  p.table_.resize(dim);
  std::iota(p.table_.begin(), p.table_.end(), 0u);
  KeyedStream rng(ctx);
  for (std::uint32_t i = dim - 1; i > 0; --i) {
    const auto j = static_cast<std::uint32_t>(rng.uniform_below(std::uint64_t{i} + 1));
    std::swap(p.table_[i], p.table_[j]);
  }
  p.build_cycles();
  return p;
}

void Permutation::build_cycles() {
  const std::size_t n = table_.size();
  std::vector<bool> seen(n, false);
  cycle_elems_.clear();
  cycle_offsets_.clear();
  cycle_elems_.reserve(n);
  for (std::uint32_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    cycle_offsets_.push_back(static_cast<std::uint32_t>(cycle_elems_.size()));
    std::uint32_t cur = start;
    while (!seen[cur]) {
      seen[cur] = true;
      cycle_elems_.push_back(cur);
      cur = table_[cur];
    }
  }
  cycle_offsets_.push_back(static_cast<std::uint32_t>(cycle_elems_.size()));
}

Hypervector Permutation::apply(const Hypervector& v, std::int64_t power) const {
  if (v.dim() != dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "permutation built for a different dim");
  }
  if (power == 0) return v;
  Hypervector out(v.dim());
  for (std::size_t c = 0; c + 1 < cycle_offsets_.size(); ++c) {
    const std::uint32_t begin = cycle_offsets_[c];
    const auto len = static_cast<std::int64_t>(cycle_offsets_[c + 1] - begin);
    std::int64_t shift = power % len;
    if (shift < 0) shift += len;
    auto j = static_cast<std::uint32_t>(shift);
    for (std::uint32_t k = 0; k < static_cast<std::uint32_t>(len); ++k) {
      if (v.bit(cycle_elems_[begin + k])) out.set_bit(cycle_elems_[begin + j], true);
      if (++j == len) j = 0;
    }
  }
  return out;
}

Hypervector Permutation::apply_iterated(const Hypervector& v, std::int64_t power) const {
  if (v.dim() != dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "permutation built for a different dim");
  }
  Hypervector cur = v;
  const std::int64_t steps = power < 0 ? -power : power;
  for (std::int64_t s = 0; s < steps; ++s) {
    Hypervector next(v.dim());
    for (std::uint32_t i = 0; i < dim(); ++i) {
      if (power > 0) {
        if (cur.bit(i)) next.set_bit(table_[i], true);
      } else {
        if (cur.bit(table_[i])) next.set_bit(i, true);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace hdglue
