#include "hdglue/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>

#include "hdglue/error.hpp"
#include "hdglue/seed.hpp"

namespace hdglue {

namespace {

std::uint64_t fold(std::uint64_t h, std::uint64_t v) { return mix64(h ^ (v + kGolden + (h << 6) + (h >> 2))); }

std::uint64_t fold_double(std::uint64_t h, double v) { return fold(h, std::bit_cast<std::uint64_t>(v)); }

}  // namespace

double SyntheticNetworkSpec::noise_for(std::size_t class_pos) const {
  const double mult = specialization.empty() ? 1.0 : specialization.at(class_pos);
  return noise_scale * mult;
}

std::uint64_t SyntheticNetworkSpec::digest() const {
  std::uint64_t h = fold(0, fnv1a64(name));
  h = fold(h, d);
  h = fold(h, seed);
  h = fold_double(h, noise_scale);
  for (Label c : classes) h = fold(h, c);
  for (const auto& m : class_means) {
    for (float v : m) h = fold(h, std::bit_cast<std::uint32_t>(v));
  }
  for (double s : specialization) h = fold_double(h, s);
  return h;
}

SyntheticNetworkSpec default_network_spec(std::vector<Label> classes, std::uint32_t d, double noise,
                                          std::uint64_t seed, double magnitude) {
  if (classes.empty()) throw Error(ErrorKind::kEmptyInput, "synthetic spec needs classes");
  if (d == 0) throw Error(ErrorKind::kInvalidValue, "embedding length must be positive");
  SyntheticNetworkSpec spec;
  spec.classes = std::move(classes);
  spec.d = d;
  spec.noise_scale = noise;
  spec.seed = seed;
  for (Label c : spec.classes) {
    KeyedStream rng(SeedContext(seed, "synthetic-mean", c));
    std::vector<float> mean(d);
    for (float& m : mean) m = static_cast<float>((rng.next_u64() & 1u) ? magnitude : -magnitude);
    spec.class_means.push_back(std::move(mean));
  }
  return spec;
}

SyntheticNetworkSpec two_cluster_spec(std::uint32_t d, double noise, std::uint64_t seed) {
  SyntheticNetworkSpec spec;
  spec.name = "two-cluster";
  spec.classes = {0, 1};
  spec.d = d;
  spec.noise_scale = noise;
  spec.seed = seed;
  spec.class_means = {std::vector<float>(d, 2.0f), std::vector<float>(d, -2.0f)};
  return spec;
}

SyntheticNetworkSpec specialist_spec(std::vector<Label> classes, std::span<const Label> specialty,
                                     std::uint32_t d, double sharp_noise, double other_noise, std::uint64_t seed,
                                     double magnitude) {
  SyntheticNetworkSpec spec = default_network_spec(std::move(classes), d, 1.0, seed, magnitude);
  spec.specialization.clear();
  for (Label c : spec.classes) {
    const bool sharp = std::find(specialty.begin(), specialty.end(), c) != specialty.end();
    spec.specialization.push_back(sharp ? sharp_noise : other_noise);
  }
  return spec;
}

std::vector<float> sample_embedding(const SyntheticNetworkSpec& spec, std::size_t class_pos, std::uint64_t index) {
  const auto& mean = spec.class_means.at(class_pos);
  const double sigma = spec.noise_for(class_pos);
  KeyedStream rng(SeedContext(spec.seed, "synthetic-sample", fold(spec.classes.at(class_pos), index)));
  std::vector<float> out(spec.d);
  for (std::uint32_t i = 0; i < spec.d; ++i) {
    out[i] = static_cast<float>(static_cast<double>(mean[i]) + sigma * rng.normal());
  }
  return out;
}

EmbeddingDataset sample_dataset(const SyntheticNetworkSpec& spec, std::uint64_t first_index,
                                std::uint32_t n_per_class) {
  if (spec.classes.empty()) throw Error(ErrorKind::kEmptyInput, "synthetic spec has no classes");
  if (spec.class_means.size() != spec.classes.size()) {
    throw Error(ErrorKind::kLengthMismatch, "one mean per class required");
  }
  std::vector<float> values;
  std::vector<Label> labels;
  values.reserve(static_cast<std::size_t>(n_per_class) * spec.classes.size() * spec.d);
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    for (std::uint32_t k = 0; k < n_per_class; ++k) {
      const auto row = sample_embedding(spec, c, first_index + k);
      values.insert(values.end(), row.begin(), row.end());
      labels.push_back(spec.classes[c]);
    }
  }
  const std::string provenance = "synthetic:" + spec.name + ":" + std::to_string(spec.digest());
  return EmbeddingDataset(spec.d, std::move(values), std::move(labels), provenance);
}

SyntheticSplit gen_synthetic(const SyntheticNetworkSpec& spec, std::uint32_t n_train_per_class,
                             std::uint32_t n_test_per_class) {
  if (n_train_per_class == 0) throw Error(ErrorKind::kInvalidValue, "n_per_class must be at least 1");
  return {sample_dataset(spec, 0, n_train_per_class), sample_dataset(spec, kTestIndexOffset, n_test_per_class)};
}

CentroidResult nearest_centroid_oracle(const EmbeddingDataset& train, const EmbeddingDataset& test) {
  if (train.empty()) throw Error(ErrorKind::kEmptyInput, "oracle needs training data");
  if (!test.empty() && test.dim() != train.dim()) throw Error(ErrorKind::kLengthMismatch, "train/test d differ");
  const std::uint32_t d = train.dim();
  std::map<Label, std::pair<std::vector<double>, std::size_t>> sums;
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto& [sum, count] = sums[train.label(i)];
    sum.resize(d, 0.0);
    auto row = train.row(i);
    for (std::uint32_t k = 0; k < d; ++k) sum[k] += row[k];
    ++count;
  }
  CentroidResult result;
  result.predictions.reserve(test.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    auto row = test.row(i);
    double best = 0.0;
    Label best_label = 0;
    bool first = true;
    for (const auto& [label, entry] : sums) {
      const auto& [sum, count] = entry;
      double dist = 0.0;
      for (std::uint32_t k = 0; k < d; ++k) {
        const double diff = row[k] - sum[k] / static_cast<double>(count);
        dist += diff * diff;
      }
      if (first || dist < best) {
        best = dist;
        best_label = label;
        first = false;
      }
    }
    result.predictions.push_back(best_label);
    if (best_label == test.label(i)) ++correct;
  }
  result.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  return result;
}

}  // namespace hdglue
