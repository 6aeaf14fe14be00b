#include "hdglue/hil.hpp"

#include <algorithm>
#include <string>

#include "hdglue/error.hpp"

namespace hdglue {

Hypervector ClassRegistry::id(Label label) const {
  return random_hypervector(SeedContext(seed_, "class", label), dim_);
}

double Prediction::margin() const {
  if (scores.size() < 2) return 0.0;
  double best = -1.0;
  double second = -1.0;
  for (const ClassScore& s : scores) {
    if (s.similarity > best) {
      second = best;
      best = s.similarity;
    } else if (s.similarity > second) {
      second = s.similarity;
    }
  }
  return best - second;
}

Label argmax_label(std::span<const ClassScore> scores) {
  if (scores.empty()) throw Error(ErrorKind::kUntrained, "no classes to choose from");
  const ClassScore* best = &scores.front();
  for (const ClassScore& s : scores) {
    if (s.similarity > best->similarity || (s.similarity == best->similarity && s.label < best->label)) {
      best = &s;
    }
  }
  return best->label;
}

ProbeResult probe(const Hypervector& record, const Hypervector& key, std::span<const Hypervector> candidates) {
  if (candidates.empty()) throw Error(ErrorKind::kEmptyInput, "no probe candidates");
  const Hypervector unbound = bind(record, key);
  ProbeResult best{0, -1.0};
  std::size_t best_dist = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t d = hamming(unbound, candidates[i]);
    if (d < best_dist) {
      best_dist = d;
      best.index = i;
    }
  }
  best.similarity = 1.0 - static_cast<double>(best_dist) / static_cast<double>(record.dim());
  return best;
}

SeedContext class_memory_tiebreak_context(std::uint64_t seed) { return SeedContext(seed, "tiebreak", 1); }
SeedContext hil_fusion_tiebreak_context(std::uint64_t seed) { return SeedContext(seed, "tiebreak", 2); }

HilModel::HilModel(const ModelConfig& config)
    : HilModel(config, std::make_shared<const EmbeddingEncoder>(config)) {}

HilModel::HilModel(const ModelConfig& config, std::shared_ptr<const EmbeddingEncoder> encoder)
    : config_(config), encoder_(std::move(encoder)) {
  validate(config_);
  if (!encoder_ || !(encoder_->config() == config_)) {
    throw Error(ErrorKind::kInvalidValue, "encoder does not match model config");
  }
  fusion_ = ConsensusAccumulator(config_.dim, hil_fusion_tiebreak_context(config_.seed));
}

HilModel HilModel::train(const EmbeddingDataset& examples, const ModelConfig& config) {
  if (examples.empty()) throw Error(ErrorKind::kEmptyInput, "no training examples");
  HilModel model(config);
  model.update(examples);
  return model;
}

Hypervector HilModel::encode(std::span<const float> embedding) const { return encoder_->encode(embedding); }

void HilModel::update(const EmbeddingDataset& examples) {
  if (examples.empty()) return;
  if (examples.dim() != config_.length) {
    throw Error(ErrorKind::kLengthMismatch, "examples have d=" + std::to_string(examples.dim()) +
                                                ", model expects " + std::to_string(config_.length));
  }
  std::vector<std::pair<Label, Hypervector>> encoded;
  encoded.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    encoded.emplace_back(examples.label(i), encoder_->encode(examples.row(i)));
  }
  update_encoded(encoded);
}

void HilModel::update_encoded(std::span<const std::pair<Label, Hypervector>> encoded) {
  if (encoded.empty()) return;
  for (const auto& [label, hv] : encoded) {
    if (hv.dim() != config_.dim) throw Error(ErrorKind::kDimensionMismatch, "encoded example dim mismatch");
  }
  std::vector<Label> touched;
  for (const auto& [label, hv] : encoded) {
    auto it = classes_.find(label);
    if (it == classes_.end()) {
      ClassState state{ConsensusAccumulator(config_.dim, class_memory_tiebreak_context(config_.seed)),
                       Hypervector(), registry().id(label), 0};
      it = classes_.emplace(label, std::move(state)).first;
    }
    it->second.memory.add(hv);
    it->second.examples += 1;
    touched.push_back(label);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  refresh(touched);
}

void HilModel::refresh(std::span<const Label> touched) {
  for (Label label : touched) {
    ClassState& state = classes_.at(label);
    if (!state.bundle.empty()) fusion_.sub(bind(state.id, state.bundle));
    state.bundle = state.memory.finalize();
    fusion_.add(bind(state.id, state.bundle));
  }
  classification_ = fusion_.finalize();
}

Prediction HilModel::predict(std::span<const float> embedding) const {
  if (!trained()) throw Error(ErrorKind::kUntrained, "model has no classes");
  return predict_encoded(encoder_->encode(embedding));
}

Prediction HilModel::predict_encoded(const Hypervector& query) const {
  if (!trained()) throw Error(ErrorKind::kUntrained, "model has no classes");
  const Hypervector probe_result = bind(classification_, query);
  Prediction p;
  p.scores.reserve(classes_.size());
  for (const auto& [label, state] : classes_) p.scores.push_back({label, similarity(probe_result, state.id)});
  p.label = argmax_label(p.scores);
  return p;
}

Prediction HilModel::predict_direct(std::span<const float> embedding) const {
  if (!trained()) throw Error(ErrorKind::kUntrained, "model has no classes");
  const Hypervector query = encoder_->encode(embedding);
  Prediction p;
  p.scores.reserve(classes_.size());
  for (const auto& [label, state] : classes_) p.scores.push_back({label, similarity(query, state.bundle)});
  p.label = argmax_label(p.scores);
  return p;
}

std::vector<Label> HilModel::labels() const {
  std::vector<Label> out;
  out.reserve(classes_.size());
  for (const auto& [label, state] : classes_) out.push_back(label);
  return out;
}

std::uint64_t HilModel::example_count() const noexcept {
  std::uint64_t n = 0;
  for (const auto& [label, state] : classes_) n += state.examples;
  return n;
}

HilModel HilModel::restore(const ModelConfig& config, std::map<Label, ConsensusAccumulator> memories,
                           const std::map<Label, std::uint64_t>& counts) {
  HilModel model(config);
  std::vector<Label> touched;
  for (auto& [label, acc] : memories) {
    if (acc.dim() != config.dim || !(acc.tiebreak_context() == class_memory_tiebreak_context(config.seed))) {
      throw Error(ErrorKind::kFormat, "class memory does not match model config");
    }
    const auto count_it = counts.find(label);
    ClassState state{std::move(acc), Hypervector(), model.registry().id(label),
                     count_it == counts.end() ? 0 : count_it->second};
    model.classes_.emplace(label, std::move(state));
    touched.push_back(label);
  }
  model.refresh(touched);
  return model;
}

bool operator==(const HilModel& a, const HilModel& b) {
  if (!(a.config_ == b.config_) || a.classes_.size() != b.classes_.size()) return false;
  if (!(a.fusion_ == b.fusion_) || a.classification_ != b.classification_) return false;
  for (auto ia = a.classes_.begin(), ib = b.classes_.begin(); ia != a.classes_.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!(ia->second.memory == ib->second.memory) || ia->second.examples != ib->second.examples) return false;
    if (ia->second.bundle != ib->second.bundle) return false;
  }
  return true;
}

}  // namespace hdglue
