#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdglue/glue.hpp"
#include "hdglue/hil.hpp"

namespace hdglue {

struct FleetOptions {
  std::uint32_t max_rounds = 8;
  bool use_residual_memory = false;
  double memory_threshold = 0.95;  // similarity needed for a memory hit

  friend bool operator==(const FleetOptions&, const FleetOptions&) = default;
};

// Round weight = coverage * accuracy, rounded to millionths.
Weight round_weight(double coverage, double accuracy);

struct FleetRound {
  std::shared_ptr<const HilModel> hil;
  Weight weight = Weight::one();
  std::uint64_t subset_size = 0;     // training examples this round saw
  std::uint64_t subset_correct = 0;  // of those, classified right by this round alone
  std::uint64_t training_size = 0;

  [[nodiscard]] double coverage() const;
  [[nodiscard]] double accuracy() const;
};

// One attempted round. Rejected rounds lowered the fleet's training accuracy.
struct FleetStep {
  std::uint32_t round = 0;
  std::uint64_t subset_size = 0;
  std::uint64_t fleet_correct = 0;  // training examples right after this round
  bool accepted = false;

  friend bool operator==(const FleetStep&, const FleetStep&) = default;
};

struct MemoryEntry {
  Hypervector encoding;
  Label label = 0;
};

struct FleetPrediction {
  Label label = 0;
  std::vector<ClassScore> scores;
  std::string provenance;  // "memory" or "round:<k>"
};

class ErrorFleet {
 public:
  // Round 1 trains on everything; each later round trains on the examples the
  // current fleet still gets wrong. Stops at max_rounds, when nothing is
  // misclassified, or when the misclassified set stops shrinking.
  static ErrorFleet correct(const EmbeddingDataset& training, const ModelConfig& config,
                            const FleetOptions& options = {});

  // Memory hit first; otherwise argmax_c sum_r w_r * margin_r * S_r(c), where
  // S_r(c) = similarity(cv_r ^ Q, id_c). Falls back to sum_r w_r * S_r(c) when
  // every margin is zero.
  [[nodiscard]] FleetPrediction predict(std::span<const float> embedding) const;
  [[nodiscard]] FleetPrediction predict_encoded(const Hypervector& query) const;

  // Rounds glued as members with their round weights.
  [[nodiscard]] GlueModel combined() const;
  // Round weights rescaled to sum to the round count.
  [[nodiscard]] std::vector<double> normalized_weights() const;

  [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }
  [[nodiscard]] const FleetOptions& options() const noexcept { return options_; }
  [[nodiscard]] const std::vector<FleetRound>& rounds() const noexcept { return rounds_; }
  [[nodiscard]] const std::vector<MemoryEntry>& memory() const noexcept { return memory_; }
  [[nodiscard]] const std::vector<FleetStep>& trace() const noexcept { return trace_; }
  [[nodiscard]] std::vector<Label> labels() const;

  static ErrorFleet restore(const ModelConfig& config, const FleetOptions& options, std::vector<FleetRound> rounds,
                            std::vector<MemoryEntry> memory, std::vector<FleetStep> trace);

 private:
  ErrorFleet(const ModelConfig& config, const FleetOptions& options);
  void refresh_ids();
  [[nodiscard]] FleetPrediction vote(const Hypervector& query) const;
  [[nodiscard]] const MemoryEntry* recall(const Hypervector& query) const;

  ModelConfig config_;
  FleetOptions options_;
  std::shared_ptr<const EmbeddingEncoder> encoder_;
  std::vector<FleetRound> rounds_;
  std::vector<MemoryEntry> memory_;
  std::vector<FleetStep> trace_;
  std::vector<std::pair<Label, Hypervector>> ids_;
};

}  // namespace hdglue
