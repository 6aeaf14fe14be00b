#include "doctest.h"
#include "helpers.hpp"
#include "hdglue/experiment.hpp"
#include "hdglue/fleet.hpp"

using namespace hdglue;

namespace {

const std::vector<Label> kTen{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

SyntheticSplit ten_class(std::uint64_t seed) {
  return gen_synthetic(default_network_spec(kTen, 32, 1.0, SeedContext(seed, "network", 0).key()), 100, 100);
}

double fleet_accuracy(const ErrorFleet& f, const EmbeddingDataset& d) {
  std::vector<Label> preds;
  for (std::size_t i = 0; i < d.size(); ++i) preds.push_back(f.predict(d.row(i)).label);
  return score_predictions(d, preds).overall;
}

}  // namespace

TEST_SUITE("fleet") {
  TEST_CASE("round weights follow coverage times accuracy") {
    CHECK(round_weight(1.0, 0.76).micros() == 760'000);
    CHECK(round_weight(0.24, 0.70).micros() == 168'000);
    FleetRound a;
    a.subset_size = 1000;
    a.subset_correct = 760;
    a.training_size = 1000;
    FleetRound b;
    b.subset_size = 240;
    b.subset_correct = 168;
    b.training_size = 1000;
    CHECK(a.coverage() == doctest::Approx(1.0));
    CHECK(a.accuracy() == doctest::Approx(0.76));
    CHECK(b.coverage() == doctest::Approx(0.24));
    CHECK(b.accuracy() == doctest::Approx(0.70));
    CHECK(round_weight(b.coverage(), b.accuracy()).micros() == 168'000);
    CHECK_ERROR_KIND(round_weight(1.5, 0.5), ErrorKind::kInvalidWeight);
  }

  TEST_CASE("a perfectly classified set gives one round of weight one") {
    const SyntheticSplit s = gen_synthetic(two_cluster_spec(32, 0.2, 3), 50, 1);
    const ErrorFleet f = ErrorFleet::correct(s.train, ModelConfig{3, 10000, 65, 32}, FleetOptions{8, true, 0.95});
    REQUIRE(f.rounds().size() == 1);
    CHECK(f.rounds()[0].weight == Weight::one());
    CHECK(f.memory().empty());
  }

  TEST_CASE("single-round fleet predicts like its HIL") {
    const SyntheticSplit s = ten_class(2);
    const ErrorFleet f = ErrorFleet::correct(s.train, ModelConfig{2, 10000, 65, 32}, FleetOptions{1, false, 0.95});
    REQUIRE(f.rounds().size() == 1);
    const HilModel base = HilModel::train(s.train, ModelConfig{2, 10000, 65, 32});
    CHECK(*f.rounds()[0].hil == base);
    for (std::size_t i = 0; i < s.test.size(); ++i) {
      CHECK(f.predict(s.test.row(i)).label == base.predict(s.test.row(i)).label);
      CHECK(f.predict(s.test.row(i)).provenance == "round:1");
    }
  }

  TEST_CASE("training accuracy never decreases across accepted rounds") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const SyntheticSplit s = ten_class(seed);
      const ErrorFleet f = ErrorFleet::correct(s.train, ModelConfig{seed, 10000, 65, 32});
      std::uint64_t prev = 0;
      for (const FleetStep& step : f.trace()) {
        if (!step.accepted) continue;
        CHECK(step.fleet_correct >= prev);
        prev = step.fleet_correct;
      }
      std::size_t accepted = 0;
      for (const FleetStep& step : f.trace()) accepted += step.accepted;
      CHECK(accepted == f.rounds().size());
      CHECK(f.rounds()[0].coverage() == 1.0);
      for (const FleetRound& r : f.rounds()) {
        CHECK(r.weight.micros() == round_weight(r.coverage(), r.accuracy()).micros());
      }
    }
  }

  TEST_CASE("residual memory reaches perfect training accuracy") {
    const SyntheticSplit s = ten_class(1);
    const HilModel base = HilModel::train(s.train, ModelConfig{1, 10000, 65, 32});
    const double base_acc = evaluate_hil(base, s.train).overall;
    MESSAGE("base training accuracy " << base_acc);
    const ErrorFleet f = ErrorFleet::correct(s.train, ModelConfig{1, 10000, 65, 32}, FleetOptions{8, true, 0.95});
    CHECK(fleet_accuracy(f, s.train) == 1.0);
    CHECK_FALSE(f.memory().empty());
    const MemoryEntry& m = f.memory().front();
    const FleetPrediction p = f.predict_encoded(m.encoding);
    CHECK(p.label == m.label);
    CHECK(p.provenance == "memory");
    CHECK(fleet_accuracy(f, s.test) >= evaluate_hil(base, s.test).overall - 0.01);
  }

  TEST_CASE("combined glue carries the round weights") {
    const SyntheticSplit s = ten_class(3);
    const ErrorFleet f = ErrorFleet::correct(s.train, ModelConfig{3, 10000, 65, 32});
    const GlueModel g = f.combined();
    REQUIRE(g.active_slots().size() == f.rounds().size());
    for (std::size_t r = 0; r < f.rounds().size(); ++r) CHECK(g.member(static_cast<MemberSlot>(r)).weight == f.rounds()[r].weight);
    double total = 0.0;
    for (double w : f.normalized_weights()) total += w;
    CHECK(total == doctest::Approx(static_cast<double>(f.rounds().size())));
  }

  TEST_CASE("errors") {
    CHECK_ERROR_KIND(ErrorFleet::correct(EmbeddingDataset(32, {}, {}), ModelConfig{1, 10000, 65, 32}),
                     ErrorKind::kEmptyInput);
    const SyntheticSplit s = ten_class(1);
    CHECK_ERROR_KIND(ErrorFleet::correct(s.train, ModelConfig{1, 10000, 65, 32}, FleetOptions{0, false, 0.95}),
                     ErrorKind::kInvalidValue);
  }
}
