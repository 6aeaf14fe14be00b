#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "hdglue/experiment.hpp"
#include "hdglue/glue.hpp"

using namespace hdglue;

namespace {

struct Fixture {
  SpecialistData data;
  GlueRun run;
  std::vector<const EmbeddingDataset*> tests;

  explicit Fixture(std::uint64_t seed, std::uint32_t dim = 10000) {
    SpecialistSetup setup;
    setup.n_test = 40;
    data = make_specialist_data(seed, setup);
    run = run_glue_experiment(data, seed, dim);
    for (const auto& s : data.splits) tests.push_back(&s.test);
  }

  MemberEmbeddings row(std::size_t i) const {
    MemberEmbeddings e;
    for (std::size_t k = 0; k < run.slots.size(); ++k) e[run.slots[k]] = tests[k]->row(i);
    return e;
  }
};

const Fixture& fixture() {
  static const Fixture f(1);
  return f;
}

bool same_counters(const ConsensusAccumulator& a, const ConsensusAccumulator& b) { return a == b; }

}  // namespace

TEST_SUITE("glue") {
  TEST_CASE("model IDs are seeded per slot") {
    CHECK(model_id(3, 10000, 2) == random_hypervector(SeedContext(3, "model", 2), 10000));
    const auto& f = fixture();
    GlueModel g(1, 10000);
    g.add_model(f.run.members[0]);
    g.add_model(f.run.members[0]);
    CHECK(g.member(0).model_id == model_id(1, 10000, 0));
    CHECK(g.member(1).model_id == model_id(1, 10000, 1));
  }

  TEST_CASE("single member glue reproduces its HIL") {
    const auto& f = fixture();
    GlueModel g(1, 10000);
    const MemberSlot s = g.add_model(f.run.members[2]);
    CHECK(g.glue_vector() == (g.member(s).model_id ^ f.run.members[2]->classification_vector()));
    for (std::size_t i = 0; i < f.tests[2]->size(); ++i) {
      MemberEmbeddings e{{s, f.tests[2]->row(i)}};
      CHECK(g.predict(e).label == f.run.members[2]->predict(f.tests[2]->row(i)).label);
    }
  }

  TEST_CASE("identical terms collapse to the term") {
    const auto& f = fixture();
    GlueModel one(1, 10000);
    one.add_model(f.run.members[1]);
    GlueModel heavy(1, 10000);
    heavy.add_model(f.run.members[1], Weight::from_double(3.0));
    CHECK(heavy.glue_vector() == one.glue_vector());
    ConsensusAccumulator acc(10000, glue_fusion_tiebreak_context(1));
    for (int k = 0; k < 3; ++k) acc.add(one.member(0).term());
    CHECK(acc.finalize() == one.glue_vector());
    for (std::size_t i = 0; i < f.tests[1]->size(); ++i) {
      const auto row = f.tests[1]->row(i);
      CHECK(heavy.predict({{0, row}}).label == one.predict({{0, row}}).label);
    }
  }

  TEST_CASE("a model glued three times under distinct IDs") {
    const auto& f = fixture();
    GlueModel one(1, 10000);
    one.add_model(f.run.members[1]);
    GlueModel three(1, 10000);
    for (int k = 0; k < 3; ++k) three.add_model(f.run.members[1]);
    std::size_t agree = 0;
    const std::size_t n = f.tests[1]->size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = f.tests[1]->row(i);
      agree += three.predict({{0, row}, {1, row}, {2, row}}).label == one.predict({{0, row}}).label;
    }
    MESSAGE("label agreement " << static_cast<double>(agree) / n);
    CHECK(agree >= 0.7 * n);
  }

  TEST_CASE("glue beats its members on specialist data") {
    const auto& f = fixture();
    MESSAGE("glue " << f.run.glue_report.overall << " max " << f.run.member_max() << " mean " << f.run.member_mean());
    CHECK(f.run.glue_report.overall >= f.run.member_mean() + 0.02);
  }

  TEST_CASE("growing the glue one member at a time") {
    const auto& f = fixture();
    GlueModel g(1, 10000);
    std::vector<MemberSlot> slots;
    std::vector<const EmbeddingDataset*> tests;
    double prev = 0.0;
    for (std::size_t k = 0; k < f.run.members.size(); ++k) {
      slots.push_back(g.add_model(f.run.members[k]));
      tests.push_back(f.tests[k]);
      const AccuracyReport r = evaluate_glue(g, slots, tests);
      MESSAGE((k + 1) << " members: " << r.overall);
      if (k >= 2) CHECK(r.overall >= prev - 0.01);
      prev = r.overall;
    }
  }

  TEST_CASE("a member bringing new classes is heard") {
    const auto& f = fixture();
    auto own_classes = [&](std::size_t k, const EmbeddingDataset& d) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.label(i) / 2 == k) rows.push_back(i);
      }
      return d.subset(rows);
    };
    GlueModel g(1, 10000);
    std::vector<MemberSlot> slots;
    std::vector<const EmbeddingDataset*> tests;
    for (std::size_t k = 0; k < 5; ++k) {
      const EmbeddingDataset train = own_classes(k, f.data.splits[k].train);
      slots.push_back(g.add_model(std::make_shared<const HilModel>(HilModel::train(train, ModelConfig{1, 10000, 65, 32}))));
      tests.push_back(f.tests[k]);
    }
    const EmbeddingDataset newest = own_classes(4, *f.tests[4]);
    const double alone = evaluate_hil(*g.member(4).hil, newest).overall;
    const AccuracyReport glued = evaluate_glue(g, slots, tests);
    const double on_new = (glued.per_class.at(8) + glued.per_class.at(9)) / 2.0;
    MESSAGE("new classes glued " << on_new << ", standalone " << alone);
    CHECK(on_new >= 0.6 * alone);
  }

  TEST_CASE("remove and re-add restore counters exactly") {
    const auto& f = fixture();
    GlueModel g = f.run.glue;
    const ConsensusAccumulator before = g.fusion();
    g.remove_model(3);
    CHECK_FALSE(g.member(3).active);
    CHECK(g.fusion().term_count() == 4);
    g.restore_model(3);
    CHECK(same_counters(g.fusion(), before));
    CHECK(g.glue_vector() == f.run.glue.glue_vector());
    const MemberSlot extra = g.add_model(f.run.members[0], Weight::from_double(0.4));
    g.remove_model(extra);
    CHECK(same_counters(g.fusion(), before));
  }

  TEST_CASE("membership errors") {
    const auto& f = fixture();
    GlueModel g(1, 10000);
    g.add_model(f.run.members[0]);
    CHECK_ERROR_KIND(g.remove_model(0), ErrorKind::kInvalidValue);
    CHECK_ERROR_KIND(g.remove_model(9), ErrorKind::kUnknownMember);
    CHECK_ERROR_KIND(g.restore_model(0), ErrorKind::kInvalidValue);
    GlueModel other(2, 10000);
    CHECK_ERROR_KIND(other.add_model(f.run.members[0]), ErrorKind::kRegistryMismatch);
    GlueModel small(1, 8000);
    CHECK_ERROR_KIND(small.add_model(f.run.members[0]), ErrorKind::kDimensionMismatch);
    CHECK_ERROR_KIND(GlueModel::build({}, 1), ErrorKind::kEmptyInput);
    const auto row = f.tests[0]->row(0);
    CHECK_ERROR_KIND(f.run.glue.predict({{0, row}}), ErrorKind::kMissingEmbedding);
    const std::vector<MemberSlot> none;
    CHECK_ERROR_KIND(f.run.glue.predict(f.row(0), std::span<const MemberSlot>(none)), ErrorKind::kEmptyInput);
  }

  TEST_CASE("scaling all weights changes nothing") {
    const auto& f = fixture();
    GlueModel scaled = f.run.glue;
    for (MemberSlot s : scaled.active_slots()) scaled.set_weight(s, Weight::from_double(2.5));
    CHECK(scaled.glue_vector() == f.run.glue.glue_vector());
    for (std::size_t i = 0; i < 50; ++i) CHECK(scaled.predict(f.row(i)).label == f.run.glue.predict(f.row(i)).label);
  }

  TEST_CASE("one available member agrees with its standalone HIL") {
    const auto& f = fixture();
    const std::vector<MemberSlot> only{3};
    std::size_t agree = 0;
    const std::size_t n = f.tests[3]->size();
    for (std::size_t i = 0; i < n; ++i) {
      agree += f.run.glue.predict(f.row(i), std::span<const MemberSlot>(only)).label ==
               f.run.members[3]->predict(f.tests[3]->row(i)).label;
    }
    MESSAGE("agreement " << static_cast<double>(agree) / n);
    CHECK(agree >= 0.25 * n);
  }

  TEST_CASE("a confident specialist outvotes wrong members") {
    const auto& f = fixture();
    std::size_t cases = 0;
    std::size_t won = 0;
    for (std::size_t i = 0; i < f.tests[0]->size(); ++i) {
      const Label gold = f.tests[0]->label(i);
      const std::size_t owner = gold / 2;
      if (f.run.member_reports[owner].predictions[i] != gold) continue;
      std::size_t wrong = 0;
      for (std::size_t k = 0; k < f.run.slots.size(); ++k) wrong += f.run.member_reports[k].predictions[i] != gold;
      if (wrong < 4) continue;
      ++cases;
      won += f.run.glue_report.predictions[i] == gold;
    }
    MESSAGE(won << " of " << cases);
    REQUIRE(cases > 0);
    CHECK(won >= 0.2 * cases);
  }

  TEST_CASE("compress folds members into one") {
    const auto& f = fixture();
    GlueModel dup(1, 10000);
    dup.add_model(f.run.members[4]);
    dup.add_model(f.run.members[4]);
    GlueModel single(1, 10000);
    single.add_model(f.run.members[4]);
    const std::vector<MemberSlot> both{0, 1};
    const MemberSlot folded = dup.compress(both, Weight::one());
    CHECK(dup.active_slots() == std::vector<MemberSlot>{folded});
    for (std::size_t i = 0; i < 30; ++i) {
      const auto row = f.tests[4]->row(i);
      CHECK(dup.predict({{0, row}}).label == single.predict({{0, row}}).label);
    }
    GlueModel g = f.run.glue;
    const std::vector<MemberSlot> fold{1, 2, 3};
    g.set_weight(2, Weight::from_double(2.0));
    const MemberSlot s = g.compress(fold, Weight::one());
    CHECK(g.active_slots().size() == 3);
    CHECK(g.member(s).query_slot == 2);
    MemberEmbeddings e{{0, f.tests[0]->row(0)}, {2, f.tests[2]->row(0)}, {4, f.tests[4]->row(0)}};
    CHECK_NOTHROW(g.predict(e));
    CHECK_ERROR_KIND(g.compress(std::vector<MemberSlot>{0}, Weight::one()), ErrorKind::kInvalidValue);
    CHECK_ERROR_KIND(g.compress(std::vector<MemberSlot>{0, 1}, Weight::one()), ErrorKind::kUnknownMember);
  }

  TEST_CASE("dropping a weak generalist hurts less than dropping a specialist") {
    const auto& f = fixture();
    const std::vector<Label> ten{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const SyntheticSplit weak = gen_synthetic(default_network_spec(ten, 32, 6.0, 77, 1.2), 100, 40);
    auto weak_hil = std::make_shared<const HilModel>(HilModel::train(weak.train, ModelConfig{1, 10000, 65, 32}));
    GlueModel g = f.run.glue;
    const MemberSlot w = g.add_model(weak_hil);
    std::vector<MemberSlot> slots = f.run.slots;
    slots.push_back(w);
    std::vector<const EmbeddingDataset*> tests = f.tests;
    tests.push_back(&weak.test);
    const double weak_alone = evaluate_hil(*weak_hil, weak.test).overall;
    std::size_t strongest = 0;
    for (std::size_t k = 0; k < f.run.slots.size(); ++k) {
      if (f.run.member_reports[k].overall > f.run.member_reports[strongest].overall) strongest = k;
    }
    auto without = [&](MemberSlot drop) {
      std::vector<MemberSlot> avail;
      for (MemberSlot s : slots) {
        if (s != drop) avail.push_back(s);
      }
      return evaluate_glue(g, slots, tests, std::span<const MemberSlot>(avail)).overall;
    };
    const double full = evaluate_glue(g, slots, tests).overall;
    MESSAGE("weak alone " << weak_alone << ", full " << full << ", without weak " << without(w)
                          << ", without strongest " << without(f.run.slots[strongest]));
    CHECK(std::abs(full - without(w)) < std::abs(full - without(f.run.slots[strongest])));
  }
}
