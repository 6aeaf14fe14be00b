#pragma once

// Multi-network synthetic experiments shared by the CLI and the test suites.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hdglue/glue.hpp"
#include "hdglue/synthetic.hpp"

namespace hdglue {

struct AccuracyReport {
  double overall = 0.0;
  std::map<Label, double> per_class;
  std::vector<Label> predictions;
};

// Accuracy of `predictions` against the labels of `data`.
AccuracyReport score_predictions(const EmbeddingDataset& data, std::vector<Label> predictions);

AccuracyReport evaluate_hil(const HilModel& model, const EmbeddingDataset& test);

// tests[k] holds the embeddings member slot slots[k] sees; rows are aligned
// and labels are read from tests.front().
AccuracyReport evaluate_glue(const GlueModel& glue, std::span<const MemberSlot> slots,
                             std::span<const EmbeddingDataset* const> tests,
                             std::optional<std::span<const MemberSlot>> available = std::nullopt);

// `networks` specialists over `classes` labels; network k is sharp on the
// labels {k*per, ..., k*per + per - 1} with per = classes / networks.
struct SpecialistSetup {
  std::uint32_t networks = 5;
  std::uint32_t classes = 10;
  std::uint32_t d = 32;
  double sharp_noise = 0.5;
  double other_noise = 4.0;
  double magnitude = 1.2;
  std::uint32_t n_train = 100;
  std::uint32_t n_test = 100;
};

struct SpecialistData {
  std::vector<SyntheticNetworkSpec> specs;
  std::vector<SyntheticSplit> splits;
};

// Network k uses seed SeedContext(seed, "network", k).key().
SpecialistData make_specialist_data(std::uint64_t seed, const SpecialistSetup& setup);

struct GlueRun {
  std::vector<std::shared_ptr<const HilModel>> members;
  GlueModel glue;
  std::vector<MemberSlot> slots;
  std::vector<AccuracyReport> member_reports;
  AccuracyReport glue_report;

  [[nodiscard]] double member_mean() const;
  [[nodiscard]] double member_max() const;
};

// Trains one HIL per network at (seed, dim, levels), glues them with equal
// weights and evaluates everything on the aligned test splits.
GlueRun run_glue_experiment(const SpecialistData& data, std::uint64_t seed, std::uint32_t dim,
                            std::uint32_t levels = kDefaultLevels);

}  // namespace hdglue
