#include "hdglue/fleet.hpp"

#include <cmath>
#include <set>

#include "hdglue/error.hpp"

namespace hdglue {

Weight round_weight(double coverage, double accuracy) {
  if (!(coverage >= 0.0 && coverage <= 1.0) || !(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw Error(ErrorKind::kInvalidWeight, "coverage and accuracy must lie in [0, 1]");
  }
  return Weight::from_micros(std::llround(coverage * accuracy * static_cast<double>(Weight::kScale)));
}

double FleetRound::coverage() const {
  return training_size == 0 ? 0.0 : static_cast<double>(subset_size) / static_cast<double>(training_size);
}

double FleetRound::accuracy() const {
  return subset_size == 0 ? 0.0 : static_cast<double>(subset_correct) / static_cast<double>(subset_size);
}

ErrorFleet::ErrorFleet(const ModelConfig& config, const FleetOptions& options)
    : config_(config), options_(options), encoder_(std::make_shared<const EmbeddingEncoder>(config)) {
  if (options_.max_rounds == 0) throw Error(ErrorKind::kInvalidValue, "max_rounds must be at least 1");
  if (!(options_.memory_threshold > 0.5 && options_.memory_threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidValue, "memory threshold must lie in (0.5, 1]");
  }
}

void ErrorFleet::refresh_ids() {
  ids_.clear();
  const ClassRegistry reg(config_.seed, config_.dim);
  for (Label l : labels()) ids_.emplace_back(l, reg.id(l));
}

std::vector<Label> ErrorFleet::labels() const {
  std::set<Label> all;
  for (const FleetRound& r : rounds_) {
    for (Label l : r.hil->labels()) all.insert(l);
  }
  return {all.begin(), all.end()};
}

ErrorFleet ErrorFleet::correct(const EmbeddingDataset& training, const ModelConfig& config,
                               const FleetOptions& options) {
  if (training.empty()) throw Error(ErrorKind::kEmptyInput, "no training examples");
  if (training.dim() != config.length) {
    throw Error(ErrorKind::kLengthMismatch, "embedding length " + std::to_string(training.dim()) + " vs config " +
                                               std::to_string(config.length));
  }
  ErrorFleet fleet(config, options);
  const std::size_t n = training.size();
  std::vector<Hypervector> encoded;
  encoded.reserve(n);
  for (std::size_t i = 0; i < n; ++i) encoded.push_back(fleet.encoder_->encode(training.row(i)));

  auto misclassified = [&](const ErrorFleet& f) {
    std::vector<std::size_t> wrong;
    for (std::size_t i = 0; i < n; ++i) {
      if (f.predict_encoded(encoded[i]).label != training.label(i)) wrong.push_back(i);
    }
    return wrong;
  };

  std::vector<std::size_t> subset(n);
  for (std::size_t i = 0; i < n; ++i) subset[i] = i;
  std::vector<std::size_t> wrong;
  for (std::uint32_t k = 1; k <= options.max_rounds && !subset.empty(); ++k) {
    auto hil = std::make_shared<HilModel>(config, fleet.encoder_);
    std::vector<std::pair<Label, Hypervector>> batch;
    batch.reserve(subset.size());
    for (std::size_t i : subset) batch.emplace_back(training.label(i), encoded[i]);
    hil->update_encoded(batch);

    std::uint64_t own_correct = 0;
    for (std::size_t i : subset) {
      if (hil->predict_encoded(encoded[i]).label == training.label(i)) ++own_correct;
    }
    FleetRound round{hil, Weight::one(), subset.size(), own_correct, n};
    const Weight w = round_weight(round.coverage(), round.accuracy());
    FleetStep step{k, subset.size(), 0, false};
    if (w.micros() <= 0) {
      fleet.trace_.push_back(step);
      break;
    }
    round.weight = w;

    ErrorFleet trial = fleet;
    trial.rounds_.push_back(std::move(round));
    trial.refresh_ids();
    std::vector<std::size_t> trial_wrong = misclassified(trial);
    step.fleet_correct = n - trial_wrong.size();
    const bool first = fleet.rounds_.empty();
    if (!first && trial_wrong.size() > wrong.size()) {
      fleet.trace_.push_back(step);
      break;
    }
    step.accepted = true;
    const bool shrank = first || trial_wrong.size() < wrong.size();
    fleet.rounds_ = std::move(trial.rounds_);
    fleet.ids_ = std::move(trial.ids_);
    fleet.trace_.push_back(step);
    wrong = std::move(trial_wrong);
    if (!shrank) break;
    subset = wrong;
  }

  if (options.use_residual_memory) {
    // Stored entries always recall themselves; other examples that now hit a
    // wrong entry are stored too until nothing changes.
    std::vector<bool> stored(n, false);
    while (!wrong.empty()) {
      bool grew = false;
      for (std::size_t i : wrong) {
        if (!stored[i]) {
          fleet.memory_.push_back({encoded[i], training.label(i)});
          stored[i] = true;
          grew = true;
        }
      }
      if (!grew) break;
      wrong = misclassified(fleet);
    }
  }
  return fleet;
}

const MemoryEntry* ErrorFleet::recall(const Hypervector& query) const {
  const MemoryEntry* best = nullptr;
  double best_sim = -1.0;
  for (const MemoryEntry& e : memory_) {
    const double s = similarity(query, e.encoding);
    if (s > best_sim) {
      best_sim = s;
      best = &e;
    }
  }
  return best_sim >= options_.memory_threshold ? best : nullptr;
}

FleetPrediction ErrorFleet::vote(const Hypervector& query) const {
  FleetPrediction out;
  out.scores.reserve(ids_.size());
  for (const auto& [label, id] : ids_) out.scores.push_back({label, 0.0});
  std::vector<std::vector<double>> per_round(rounds_.size(), std::vector<double>(ids_.size()));
  std::vector<double> margins(rounds_.size());
  bool any_margin = false;
  for (std::size_t r = 0; r < rounds_.size(); ++r) {
    const Hypervector probed = bind(rounds_[r].hil->classification_vector(), query);
    Prediction p;
    p.scores.reserve(ids_.size());
    for (std::size_t c = 0; c < ids_.size(); ++c) {
      per_round[r][c] = similarity(probed, ids_[c].second);
      p.scores.push_back({ids_[c].first, per_round[r][c]});
    }
    margins[r] = p.margin();
    if (margins[r] > 0.0) any_margin = true;
  }
  std::vector<double> factor(rounds_.size());
  for (std::size_t r = 0; r < rounds_.size(); ++r) {
    factor[r] = rounds_[r].weight.value() * (any_margin ? margins[r] : 1.0);
    for (std::size_t c = 0; c < ids_.size(); ++c) out.scores[c].similarity += factor[r] * per_round[r][c];
  }
  out.label = argmax_label(out.scores);
  std::size_t winner = 0;
  while (ids_[winner].first != out.label) ++winner;
  std::size_t decider = 0;
  for (std::size_t r = 1; r < rounds_.size(); ++r) {
    if (factor[r] * per_round[r][winner] > factor[decider] * per_round[decider][winner]) decider = r;
  }
  out.provenance = "round:" + std::to_string(decider + 1);
  return out;
}

FleetPrediction ErrorFleet::predict_encoded(const Hypervector& query) const {
  if (rounds_.empty()) throw Error(ErrorKind::kUntrained, "fleet has no rounds");
  if (const MemoryEntry* hit = recall(query)) {
    FleetPrediction out;
    out.label = hit->label;
    for (const auto& [label, id] : ids_) out.scores.push_back({label, label == hit->label ? 1.0 : 0.0});
    out.provenance = "memory";
    return out;
  }
  return vote(query);
}

FleetPrediction ErrorFleet::predict(std::span<const float> embedding) const {
  return predict_encoded(encoder_->encode(embedding));
}

GlueModel ErrorFleet::combined() const {
  if (rounds_.empty()) throw Error(ErrorKind::kUntrained, "fleet has no rounds");
  GlueModel g(config_.seed, config_.dim);
  for (const FleetRound& r : rounds_) g.add_model(r.hil, r.weight);
  return g;
}

std::vector<double> ErrorFleet::normalized_weights() const {
  std::vector<Weight> w;
  w.reserve(rounds_.size());
  for (const FleetRound& r : rounds_) w.push_back(r.weight);
  return normalize_weights(w);
}

ErrorFleet ErrorFleet::restore(const ModelConfig& config, const FleetOptions& options, std::vector<FleetRound> rounds,
                               std::vector<MemoryEntry> memory, std::vector<FleetStep> trace) {
  ErrorFleet f(config, options);
  for (const FleetRound& r : rounds) {
    if (!r.hil || !(r.hil->config() == config)) throw Error(ErrorKind::kFormat, "fleet round config differs");
    if (r.weight.micros() <= 0) throw Error(ErrorKind::kInvalidWeight, "fleet round weight must be positive");
  }
  for (const MemoryEntry& e : memory) {
    if (e.encoding.dim() != config.dim) throw Error(ErrorKind::kDimensionMismatch, "memory entry dim differs");
  }
  f.rounds_ = std::move(rounds);
  f.memory_ = std::move(memory);
  f.trace_ = std::move(trace);
  f.refresh_ids();
  return f;
}

}  // namespace hdglue
