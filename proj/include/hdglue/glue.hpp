#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hdglue/bundling.hpp"
#include "hdglue/hil.hpp"

namespace hdglue {

using MemberSlot = std::uint32_t;

// Several members' classification vectors folded by weighted consensus into
// one synthetic member. Queries go through the designated (highest-weight)
// original's encoder, reading that original's embedding.
struct FoldedModel {
  ConsensusAccumulator accumulator;
  Hypervector vector;
  std::shared_ptr<const EmbeddingEncoder> encoder;
  std::vector<Label> labels;
  std::vector<MemberSlot> folded_slots;
};

struct GlueMember {
  MemberSlot slot = 0;  // model ID = random_hypervector(SeedContext(seed, "model", slot))
  Hypervector model_id;
  Weight weight = Weight::one();
  bool active = true;
  std::shared_ptr<const HilModel> hil;  // null for folded members
  std::optional<FoldedModel> folded;
  MemberSlot query_slot = 0;  // whose embedding this member encodes at predict time

  [[nodiscard]] const Hypervector& classification_vector() const;
  [[nodiscard]] const EmbeddingEncoder& encoder() const;
  [[nodiscard]] std::vector<Label> labels() const;
  [[nodiscard]] Hypervector term() const { return bind(model_id, classification_vector()); }
};

struct MemberScores {
  MemberSlot slot = 0;
  Weight weight = Weight::one();
  std::vector<ClassScore> scores;
};

struct GluePrediction {
  Label label = 0;
  std::vector<ClassScore> scores;       // weighted sums, ascending label
  std::vector<MemberScores> per_member;  // unweighted per-member similarities
};

using MemberEmbeddings = std::map<MemberSlot, std::span<const float>>;

SeedContext glue_fusion_tiebreak_context(std::uint64_t seed);
SeedContext fold_tiebreak_context(std::uint64_t seed);
Hypervector model_id(std::uint64_t seed, std::uint32_t dim, MemberSlot slot);

// Consensus of (model ID ^ member classification vector) terms with member
// weights. Every member must share the class registry (seed, dim).
class GlueModel {
 public:
  GlueModel() = default;
  GlueModel(std::uint64_t seed, std::uint32_t dim);

  static GlueModel build(std::span<const std::pair<std::shared_ptr<const HilModel>, Weight>> models,
                         std::uint64_t seed);

  // Appends a member with the next free slot and returns the slot.
  MemberSlot add_model(std::shared_ptr<const HilModel> hil, Weight weight = Weight::one());
  // Subtracts the member's term and flags it inactive. Throws kUnknownMember
  // for unknown/inactive slots, kInvalidValue when removing the last active member.
  void remove_model(MemberSlot slot);
  // Re-adds a previously removed member with its stored weight.
  void restore_model(MemberSlot slot);
  // Swaps an active member's model (e.g. after online updates), keeping slot and weight.
  void replace_model(MemberSlot slot, std::shared_ptr<const HilModel> hil);
  void set_weight(MemberSlot slot, Weight weight);
  // Folds >= 2 active members into one synthetic member with `weight`;
  // returns its slot. The originals are dropped.
  MemberSlot compress(std::span<const MemberSlot> slots, Weight weight);

  // For each available member m: S_m(c) = similarity(glue ^ id_m ^ Q_m, class_c);
  // score(c) = sum_m weight_m * S_m(c) over the union of the available
  // members' classes. `available` defaults to every active member.
  [[nodiscard]] GluePrediction predict(const MemberEmbeddings& embeddings,
                                       std::optional<std::span<const MemberSlot>> available = std::nullopt) const;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }
  [[nodiscard]] ClassRegistry registry() const noexcept { return ClassRegistry(seed_, dim_); }
  [[nodiscard]] const std::vector<GlueMember>& members() const noexcept { return members_; }
  [[nodiscard]] const GlueMember& member(MemberSlot slot) const;
  [[nodiscard]] std::vector<MemberSlot> active_slots() const;
  [[nodiscard]] const ConsensusAccumulator& fusion() const noexcept { return fusion_; }
  [[nodiscard]] const Hypervector& glue_vector() const noexcept { return glue_; }
  [[nodiscard]] MemberSlot next_slot() const noexcept { return next_slot_; }

  // Deserialization hook: members are re-added in order, rebuilding counters.
  static GlueModel restore(std::uint64_t seed, std::uint32_t dim, std::vector<GlueMember> members,
                           MemberSlot next_slot);

 private:
  GlueMember& mutable_member(MemberSlot slot);
  void check_compatible(const HilModel& hil) const;
  void refresh() { glue_ = fusion_.finalize(); }

  std::uint64_t seed_ = 0;
  std::uint32_t dim_ = 0;
  std::vector<GlueMember> members_;
  ConsensusAccumulator fusion_;
  Hypervector glue_;
  MemberSlot next_slot_ = 0;
};

}  // namespace hdglue
