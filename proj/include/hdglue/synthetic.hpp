#pragma once

// Synthetic stand-ins for trained networks: each "network" emits class-
// conditional Gaussian embeddings. Rows are ordered class-major with a fixed
// per-class count, so datasets drawn from different networks over the same
// class list are row-aligned (row i is the same underlying input).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdglue/dataset.hpp"

namespace hdglue {

struct SyntheticNetworkSpec {
  std::string name;
  std::vector<Label> classes;
  std::uint32_t d = 32;
  std::vector<std::vector<float>> class_means;  // parallel to classes
  double noise_scale = 1.0;
  std::vector<double> specialization;  // per-class noise multiplier; empty means all 1
  std::uint64_t seed = 0;

  [[nodiscard]] double noise_for(std::size_t class_pos) const;
  // Stable digest of every field, used as dataset provenance.
  [[nodiscard]] std::uint64_t digest() const;
};

inline constexpr double kDefaultMeanMagnitude = 0.9;

// Each class mean has a seeded random sign times `magnitude` on every coordinate.
SyntheticNetworkSpec default_network_spec(std::vector<Label> classes, std::uint32_t d, double noise,
                                          std::uint64_t seed, double magnitude = kDefaultMeanMagnitude);

// Two classes with means +2 and -2 on every component.
SyntheticNetworkSpec two_cluster_spec(std::uint32_t d, double noise, std::uint64_t seed);

// Default means; noise `sharp_noise` on the specialty classes, `other_noise`
// on the rest.
SyntheticNetworkSpec specialist_spec(std::vector<Label> classes, std::span<const Label> specialty,
                                     std::uint32_t d, double sharp_noise, double other_noise, std::uint64_t seed,
                                     double magnitude = kDefaultMeanMagnitude);

// One embedding for sample `index` of classes[class_pos]; a pure function of
// (spec, class_pos, index).
std::vector<float> sample_embedding(const SyntheticNetworkSpec& spec, std::size_t class_pos, std::uint64_t index);

// n_per_class samples per class, indices [first_index, first_index + n).
EmbeddingDataset sample_dataset(const SyntheticNetworkSpec& spec, std::uint64_t first_index,
                                std::uint32_t n_per_class);

inline constexpr std::uint64_t kTestIndexOffset = std::uint64_t{1} << 40;

struct SyntheticSplit {
  EmbeddingDataset train;
  EmbeddingDataset test;
};

// Train rows use indices [0, n_train); test rows start at kTestIndexOffset.
SyntheticSplit gen_synthetic(const SyntheticNetworkSpec& spec, std::uint32_t n_train_per_class,
                             std::uint32_t n_test_per_class);

struct CentroidResult {
  double accuracy = 0.0;
  std::vector<Label> predictions;
};

// Euclidean nearest class mean in raw embedding space; ties to the smaller label.
CentroidResult nearest_centroid_oracle(const EmbeddingDataset& train, const EmbeddingDataset& test);

}  // namespace hdglue
