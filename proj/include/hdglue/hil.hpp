#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "hdglue/bundling.hpp"
#include "hdglue/dataset.hpp"
#include "hdglue/encoding.hpp"
#include "hdglue/hypervector.hpp"

namespace hdglue {

// Class ID vectors shared by every model built from the same (seed, dim):
// id(label) = random_hypervector(SeedContext(seed, "class", label)).
class ClassRegistry {
 public:
  ClassRegistry() = default;
  ClassRegistry(std::uint64_t seed, std::uint32_t dim) : seed_(seed), dim_(dim) {}

  [[nodiscard]] Hypervector id(Label label) const;
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }

  friend bool operator==(const ClassRegistry&, const ClassRegistry&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint32_t dim_ = 0;
};

using ModelConfig = EncoderConfig;

struct ClassScore {
  Label label = 0;
  double similarity = 0.0;
};

struct Prediction {
  Label label = 0;
  std::vector<ClassScore> scores;  // ascending label order

  // Top-1 minus top-2 similarity; 0 with fewer than two classes.
  [[nodiscard]] double margin() const;
};

// Argmax over scores, ties going to the smallest label.
Label argmax_label(std::span<const ClassScore> scores);

// Index and similarity of the candidate nearest to record ^ key.
struct ProbeResult {
  std::size_t index = 0;
  double similarity = 0.0;
};
ProbeResult probe(const Hypervector& record, const Hypervector& key, std::span<const Hypervector> candidates);

// Hyperdimensional inference layer for one network. Each class accumulates the
// encodings of its training examples; the classification vector is the
// consensus of (class ID ^ class bundle) over trained classes.
class HilModel {
 public:
  struct ClassState {
    ConsensusAccumulator memory;
    Hypervector bundle;
    Hypervector id;
    std::uint64_t examples = 0;
  };

  explicit HilModel(const ModelConfig& config);
  HilModel(const ModelConfig& config, std::shared_ptr<const EmbeddingEncoder> encoder);

  static HilModel train(const EmbeddingDataset& examples, const ModelConfig& config);

  // Adds examples; bit-identical to training on the union from scratch.
  void update(const EmbeddingDataset& examples);
  // Adds pre-encoded examples, grouped by label.
  void update_encoded(std::span<const std::pair<Label, Hypervector>> encoded);

  [[nodiscard]] Hypervector encode(std::span<const float> embedding) const;

  // Probes the classification vector: argmax_c similarity(cv ^ Q, id_c).
  [[nodiscard]] Prediction predict(std::span<const float> embedding) const;
  [[nodiscard]] Prediction predict_encoded(const Hypervector& query) const;
  // Diagnostic: argmax_c similarity(Q, bundle_c).
  [[nodiscard]] Prediction predict_direct(std::span<const float> embedding) const;

  [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }
  [[nodiscard]] const EmbeddingEncoder& encoder() const noexcept { return *encoder_; }
  [[nodiscard]] std::shared_ptr<const EmbeddingEncoder> shared_encoder() const noexcept { return encoder_; }
  [[nodiscard]] ClassRegistry registry() const noexcept { return ClassRegistry(config_.seed, config_.dim); }
  [[nodiscard]] bool trained() const noexcept { return !classes_.empty(); }
  [[nodiscard]] std::vector<Label> labels() const;
  [[nodiscard]] const std::map<Label, ClassState>& classes() const noexcept { return classes_; }
  [[nodiscard]] const ConsensusAccumulator& fusion() const noexcept { return fusion_; }
  [[nodiscard]] const Hypervector& classification_vector() const noexcept { return classification_; }
  [[nodiscard]] std::uint64_t example_count() const noexcept;

  // Rebuilds a model from stored per-class accumulators (deserialization).
  static HilModel restore(const ModelConfig& config, std::map<Label, ConsensusAccumulator> memories,
                          const std::map<Label, std::uint64_t>& counts);

  // Same config, class accumulators and fusion counters.
  friend bool operator==(const HilModel& a, const HilModel& b);

 private:
  void refresh(std::span<const Label> touched);

  ModelConfig config_;
  std::shared_ptr<const EmbeddingEncoder> encoder_;
  std::map<Label, ClassState> classes_;
  ConsensusAccumulator fusion_;
  Hypervector classification_;
};

// SeedContexts for the class-memory and fusion tiebreaks of a HIL.
SeedContext class_memory_tiebreak_context(std::uint64_t seed);
SeedContext hil_fusion_tiebreak_context(std::uint64_t seed);

}  // namespace hdglue
