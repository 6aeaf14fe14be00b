#include "hdglue/glue.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "hdglue/error.hpp"

namespace hdglue {

SeedContext glue_fusion_tiebreak_context(std::uint64_t seed) { return SeedContext(seed, "tiebreak", 3); }
SeedContext fold_tiebreak_context(std::uint64_t seed) { return SeedContext(seed, "tiebreak", 4); }

Hypervector model_id(std::uint64_t seed, std::uint32_t dim, MemberSlot slot) {
  return random_hypervector(SeedContext(seed, "model", slot), dim);
}

const Hypervector& GlueMember::classification_vector() const {
  return hil ? hil->classification_vector() : folded->vector;
}

const EmbeddingEncoder& GlueMember::encoder() const { return hil ? hil->encoder() : *folded->encoder; }

std::vector<Label> GlueMember::labels() const { return hil ? hil->labels() : folded->labels; }

GlueModel::GlueModel(std::uint64_t seed, std::uint32_t dim)
    : seed_(seed), dim_(dim), fusion_(dim, glue_fusion_tiebreak_context(seed)) {}

GlueModel GlueModel::build(std::span<const std::pair<std::shared_ptr<const HilModel>, Weight>> models,
                           std::uint64_t seed) {
  if (models.empty()) throw Error(ErrorKind::kEmptyInput, "glue needs at least one model");
  if (!models.front().first) throw Error(ErrorKind::kInvalidValue, "null model");
  GlueModel g(seed, models.front().first->config().dim);
  for (const auto& [hil, weight] : models) g.add_model(hil, weight);
  return g;
}

void GlueModel::check_compatible(const HilModel& hil) const {
  if (hil.config().dim != dim_) {
    throw Error(ErrorKind::kDimensionMismatch, "member dim " + std::to_string(hil.config().dim) +
                                                   " vs glue " + std::to_string(dim_));
  }
  if (hil.config().seed != seed_) {
    throw Error(ErrorKind::kRegistryMismatch, "member was trained with a different class registry seed");
  }
  if (!hil.trained()) throw Error(ErrorKind::kUntrained, "cannot glue an untrained model");
}

MemberSlot GlueModel::add_model(std::shared_ptr<const HilModel> hil, Weight weight) {
  if (!hil) throw Error(ErrorKind::kInvalidValue, "null model");
  check_compatible(*hil);
  if (weight.micros() <= 0) throw Error(ErrorKind::kInvalidWeight, "member weight must be positive");
  GlueMember m;
  m.slot = next_slot_;
  m.model_id = model_id(seed_, dim_, m.slot);
  m.weight = weight;
  m.hil = std::move(hil);
  m.query_slot = m.slot;
  fusion_.add(m.term(), m.weight);
  members_.push_back(std::move(m));
  ++next_slot_;
  refresh();
  return members_.back().slot;
}

GlueMember& GlueModel::mutable_member(MemberSlot slot) {
  for (GlueMember& m : members_) {
    if (m.slot == slot) return m;
  }
  throw Error(ErrorKind::kUnknownMember, "no member m" + std::to_string(slot));
}

const GlueMember& GlueModel::member(MemberSlot slot) const {
  for (const GlueMember& m : members_) {
    if (m.slot == slot) return m;
  }
  throw Error(ErrorKind::kUnknownMember, "no member m" + std::to_string(slot));
}

std::vector<MemberSlot> GlueModel::active_slots() const {
  std::vector<MemberSlot> out;
  for (const GlueMember& m : members_) {
    if (m.active) out.push_back(m.slot);
  }
  return out;
}

void GlueModel::remove_model(MemberSlot slot) {
  GlueMember& m = mutable_member(slot);
  if (!m.active) throw Error(ErrorKind::kUnknownMember, "member m" + std::to_string(slot) + " is not active");
  if (active_slots().size() == 1) throw Error(ErrorKind::kInvalidValue, "cannot remove the sole active member");
  fusion_.sub(m.term(), m.weight);
  m.active = false;
  refresh();
}

void GlueModel::restore_model(MemberSlot slot) {
  GlueMember& m = mutable_member(slot);
  if (m.active) throw Error(ErrorKind::kInvalidValue, "member m" + std::to_string(slot) + " is already active");
  fusion_.add(m.term(), m.weight);
  m.active = true;
  refresh();
}

void GlueModel::replace_model(MemberSlot slot, std::shared_ptr<const HilModel> hil) {
  if (!hil) throw Error(ErrorKind::kInvalidValue, "null model");
  check_compatible(*hil);
  GlueMember& m = mutable_member(slot);
  if (!m.hil) throw Error(ErrorKind::kInvalidValue, "cannot replace a folded member");
  if (m.active) {
    fusion_.sub(m.term(), m.weight);
    m.hil = std::move(hil);
    fusion_.add(m.term(), m.weight);
    refresh();
  } else {
    m.hil = std::move(hil);
  }
}

void GlueModel::set_weight(MemberSlot slot, Weight weight) {
  if (weight.micros() <= 0) throw Error(ErrorKind::kInvalidWeight, "member weight must be positive");
  GlueMember& m = mutable_member(slot);
  if (m.active) {
    fusion_.sub(m.term(), m.weight);
    fusion_.add(m.term(), weight);
  }
  m.weight = weight;
  refresh();
}

MemberSlot GlueModel::compress(std::span<const MemberSlot> slots, Weight weight) {
  std::set<MemberSlot> unique(slots.begin(), slots.end());
  if (unique.size() < 2) throw Error(ErrorKind::kInvalidValue, "compress needs at least two distinct members");
  if (weight.micros() <= 0) throw Error(ErrorKind::kInvalidWeight, "folded weight must be positive");
  const GlueMember* designated = nullptr;
  for (MemberSlot s : unique) {
    const GlueMember& m = member(s);
    if (!m.active) throw Error(ErrorKind::kUnknownMember, "member m" + std::to_string(s) + " is not active");
    if (!designated || m.weight > designated->weight) designated = &m;
  }

  FoldedModel folded{ConsensusAccumulator(dim_, fold_tiebreak_context(seed_)), Hypervector(),
                     designated->hil ? designated->hil->shared_encoder() : designated->folded->encoder,
                     {}, {}};
  std::set<Label> labels;
  for (MemberSlot s : unique) {
    const GlueMember& m = member(s);
    folded.accumulator.add(m.classification_vector(), m.weight);
    for (Label l : m.labels()) labels.insert(l);
    folded.folded_slots.push_back(s);
  }
  folded.vector = folded.accumulator.finalize();
  folded.labels.assign(labels.begin(), labels.end());
  const MemberSlot query_slot = designated->query_slot;

  for (MemberSlot s : unique) fusion_.sub(member(s).term(), member(s).weight);
  std::erase_if(members_, [&unique](const GlueMember& m) { return unique.contains(m.slot); });

  GlueMember m;
  m.slot = next_slot_++;
  m.model_id = model_id(seed_, dim_, m.slot);
  m.weight = weight;
  m.folded = std::move(folded);
  m.query_slot = query_slot;
  fusion_.add(m.term(), m.weight);
  members_.push_back(std::move(m));
  refresh();
  return members_.back().slot;
}

GluePrediction GlueModel::predict(const MemberEmbeddings& embeddings,
                                  std::optional<std::span<const MemberSlot>> available) const {
  std::vector<MemberSlot> voters;
  if (available) {
    voters.assign(available->begin(), available->end());
    for (MemberSlot s : voters) {
      if (!member(s).active) throw Error(ErrorKind::kUnknownMember, "member m" + std::to_string(s) + " is not active");
    }
  } else {
    voters = active_slots();
  }
  if (voters.empty()) throw Error(ErrorKind::kEmptyInput, "no available members");

  std::set<Label> label_set;
  for (MemberSlot s : voters) {
    for (Label l : member(s).labels()) label_set.insert(l);
  }
  const ClassRegistry reg = registry();
  std::vector<std::pair<Label, Hypervector>> ids;
  ids.reserve(label_set.size());
  for (Label l : label_set) ids.emplace_back(l, reg.id(l));

  GluePrediction out;
  out.scores.reserve(ids.size());
  for (const auto& [label, id] : ids) out.scores.push_back({label, 0.0});
  for (MemberSlot s : voters) {
    const GlueMember& m = member(s);
    const auto it = embeddings.find(m.query_slot);
    if (it == embeddings.end()) {
      throw Error(ErrorKind::kMissingEmbedding, "no embedding for member m" + std::to_string(m.query_slot));
    }
    const Hypervector query = m.encoder().encode(it->second);
    const Hypervector unbound = bind(bind(glue_, m.model_id), query);
    MemberScores ms{m.slot, m.weight, {}};
    ms.scores.reserve(ids.size());
    for (std::size_t c = 0; c < ids.size(); ++c) {
      const double sim = similarity(unbound, ids[c].second);
      ms.scores.push_back({ids[c].first, sim});
      out.scores[c].similarity += m.weight.value() * sim;
    }
    out.per_member.push_back(std::move(ms));
  }
  out.label = argmax_label(out.scores);
  return out;
}

GlueModel GlueModel::restore(std::uint64_t seed, std::uint32_t dim, std::vector<GlueMember> members,
                             MemberSlot next_slot) {
  GlueModel g(seed, dim);
  for (GlueMember& m : members) {
    if (m.slot >= next_slot) throw Error(ErrorKind::kFormat, "member slot beyond next slot");
    if (m.hil) {
      g.check_compatible(*m.hil);
    } else if (m.folded) {
      m.folded->vector = m.folded->accumulator.finalize();
    } else {
      throw Error(ErrorKind::kFormat, "member without a model");
    }
    m.model_id = model_id(seed, dim, m.slot);
    if (m.active) g.fusion_.add(m.term(), m.weight);
    g.members_.push_back(std::move(m));
  }
  g.next_slot_ = next_slot;
  g.refresh();
  return g;
}

}  // namespace hdglue
