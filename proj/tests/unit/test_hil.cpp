#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "hdglue/experiment.hpp"
#include "hdglue/hil.hpp"
#include "hdglue/synthetic.hpp"

using namespace hdglue;
using testing::rand_hv;

namespace {

const ModelConfig kCfg{11, 10000, 65, 32};

SyntheticSplit two_class(std::uint64_t seed, std::uint32_t n_test = 200) {
  return gen_synthetic(two_cluster_spec(32, 1.0, seed), 100, n_test);
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  KeyedStream rng(SeedContext(seed, "order", 0));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_below(i + 1)]);
  return order;
}

}  // namespace

TEST_SUITE("hil") {
  TEST_CASE("class IDs come from the shared registry") {
    const ClassRegistry r(11, 10000);
    CHECK(r.id(3) == random_hypervector(SeedContext(11, "class", 3), 10000));
    CHECK(r.id(3) == ClassRegistry(11, 10000).id(3));
    CHECK(similarity(r.id(3), r.id(4)) < 0.55);
  }

  TEST_CASE("one class, one example") {
    const EmbeddingDataset one(32, std::vector<float>(32, 0.25f), {7});
    const HilModel m = HilModel::train(one, kCfg);
    CHECK(m.classification_vector() == (m.registry().id(7) ^ m.encode(one.row(0))));
    CHECK(m.classes().at(7).bundle == m.encode(one.row(0)));
    CHECK(m.predict(one.row(0)).label == 7);
    KeyedStream rng(SeedContext(1, "q", 0));
    for (int i = 0; i < 5; ++i) {
      const auto q = testing::random_embedding(rng, 32);
      CHECK(m.predict(q).label == 7);
      CHECK(m.predict_direct(q).label == 7);
    }
  }

  TEST_CASE("two-class Gaussian task") {
    const SyntheticSplit s = two_class(21);
    const HilModel m = HilModel::train(s.train, kCfg);
    const double acc = evaluate_hil(m, s.test).overall;
    const double oracle = nearest_centroid_oracle(s.train, s.test).accuracy;
    CHECK(oracle >= 0.99);
    CHECK(acc >= 0.95);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < s.test.size(); ++i) {
      agree += m.predict(s.test.row(i)).label == m.predict_direct(s.test.row(i)).label;
    }
    CHECK(agree >= 0.9 * s.test.size());
    std::size_t confident = 0;
    for (std::size_t i = 0; i < s.train.size(); ++i) {
      const Prediction p = m.predict(s.train.row(i));
      confident += p.label == s.train.label(i) && p.margin() > 0.0;
    }
    CHECK(confident >= 0.99 * s.train.size());
  }

  TEST_CASE("training order does not matter") {
    const SyntheticSplit s = gen_synthetic(default_network_spec({0, 1, 2, 3}, 32, 1.0, 5), 30, 1);
    const HilModel a = HilModel::train(s.train, kCfg);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto order = shuffled(s.train.size(), seed);
      const HilModel b = HilModel::train(s.train.subset(order), kCfg);
      CHECK(b == a);
      CHECK(b.classification_vector() == a.classification_vector());
    }
  }

  TEST_CASE("updates equal batch training on the union") {
    const SyntheticSplit s = gen_synthetic(default_network_spec({0, 1, 2, 3, 4}, 32, 1.0, 6), 40, 1);
    const HilModel batch = HilModel::train(s.train, kCfg);
    for (std::uint64_t seed : {4u, 5u, 6u}) {
      const auto order = shuffled(s.train.size(), seed);
      const std::size_t cut1 = 1 + seed * 17;
      const std::size_t cut2 = cut1 + 50;
      HilModel m = HilModel::train(s.train.subset(std::span(order).first(cut1)), kCfg);
      m.update(s.train.subset(std::span(order).subspan(cut1, cut2 - cut1)));
      m.update(s.train.subset(std::span(order).subspan(cut2)));
      CHECK(m == batch);
      CHECK(m.classification_vector() == batch.classification_vector());
    }
  }

  TEST_CASE("empty update is a no-op; a new label adds one fusion term") {
    const SyntheticSplit s = gen_synthetic(default_network_spec({0, 1, 2}, 32, 1.0, 7), 50, 50);
    HilModel m = HilModel::train(s.train, kCfg);
    const HilModel before = m;
    m.update(EmbeddingDataset(32, {}, {}));
    CHECK(m == before);
    CHECK(m.fusion().term_count() == 3);
    const SyntheticSplit extra = gen_synthetic(default_network_spec({0, 1, 2, 3}, 32, 1.0, 7), 50, 50);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < extra.train.size(); ++i) {
      if (extra.train.label(i) == 3) rows.push_back(i);
    }
    m.update(extra.train.subset(rows));
    CHECK(m.fusion().term_count() == 4);
    CHECK(m.labels() == std::vector<Label>{0, 1, 2, 3});
  }

  TEST_CASE("a new class costs old classes little") {
    const std::vector<Label> five{0, 1, 2, 3, 4};
    const SyntheticSplit s = gen_synthetic(default_network_spec({0, 1, 2, 3, 4, 5}, 32, 1.0, 12), 100, 100);
    std::vector<std::size_t> old_rows;
    std::vector<std::size_t> new_rows;
    for (std::size_t i = 0; i < s.train.size(); ++i) (s.train.label(i) == 5 ? new_rows : old_rows).push_back(i);
    std::vector<std::size_t> old_test;
    for (std::size_t i = 0; i < s.test.size(); ++i) {
      if (s.test.label(i) != 5) old_test.push_back(i);
    }
    const EmbeddingDataset test_old = s.test.subset(old_test);
    HilModel m = HilModel::train(s.train.subset(old_rows), kCfg);
    const double before = evaluate_hil(m, test_old).overall;
    m.update(s.train.subset(new_rows));
    const double after = evaluate_hil(m, test_old).overall;
    MESSAGE("old classes " << before << " -> " << after);
    CHECK(after >= before - 0.05);
  }

  TEST_CASE("a stored class bundle is recognised as its class") {
    const SyntheticSplit s = gen_synthetic(default_network_spec({0, 1, 2, 3, 4, 5}, 32, 1.0, 8), 50, 1);
    const HilModel m = HilModel::train(s.train, ModelConfig{8, 4000, 65, 32});
    for (const auto& [label, state] : m.classes()) CHECK(m.predict_encoded(state.bundle).label == label);
  }

  TEST_CASE("unrelated queries score near one half") {
    const SyntheticSplit s = gen_synthetic(default_network_spec({0, 1, 2, 3}, 32, 1.0, 9), 50, 1);
    const HilModel m = HilModel::train(s.train, kCfg);
    for (std::uint64_t t = 0; t < 20; ++t) {
      const Prediction p = m.predict_encoded(rand_hv(t));
      for (const ClassScore& c : p.scores) {
        CHECK(c.similarity > 0.45);
        CHECK(c.similarity < 0.55);
      }
    }
  }

  TEST_CASE("errors") {
    const HilModel empty(kCfg);
    const std::vector<float> q(32, 0.0f);
    CHECK_ERROR_KIND(empty.predict(q), ErrorKind::kUntrained);
    CHECK_ERROR_KIND(empty.predict_direct(q), ErrorKind::kUntrained);
    CHECK_ERROR_KIND(HilModel::train(EmbeddingDataset(32, {}, {}), kCfg), ErrorKind::kEmptyInput);
    const EmbeddingDataset wrong(4, std::vector<float>(4, 0.0f), {0});
    CHECK_ERROR_KIND(HilModel::train(wrong, kCfg), ErrorKind::kLengthMismatch);
  }

  TEST_CASE("argmax ties go to the smallest label") {
    const std::vector<ClassScore> s{{4, 0.7}, {2, 0.7}, {9, 0.1}};
    CHECK(argmax_label(s) == 2);
    CHECK_ERROR_KIND(argmax_label(std::vector<ClassScore>{}), ErrorKind::kUntrained);
    Prediction p;
    p.scores = {{0, 0.6}, {1, 0.55}};
    CHECK(p.margin() == doctest::Approx(0.05));
  }

  TEST_CASE("record probing") {
    const std::vector<Hypervector> fields{rand_hv(10), rand_hv(11), rand_hv(12)};
    const std::vector<Hypervector> data{rand_hv(20), rand_hv(21), rand_hv(22)};
    ConsensusAccumulator acc(10000, SeedContext(1, "tiebreak", 9));
    for (std::size_t i = 0; i < 3; ++i) acc.add(data[i] ^ fields[i]);
    const Hypervector record = acc.finalize();
    for (std::size_t i = 0; i < 3; ++i) CHECK(probe(record, data[i], fields).index == i);
    const Hypervector single = data[0] ^ fields[0];
    CHECK(probe(single, data[0], fields).index == 0);
    CHECK(probe(single, data[0], fields).similarity == 1.0);
    CHECK_ERROR_KIND(probe(record, data[0], std::vector<Hypervector>{}), ErrorKind::kEmptyInput);
  }

  TEST_CASE("changing the master seed barely changes accuracy") {
    const SyntheticSplit s = two_class(30, 500);
    const double a = evaluate_hil(HilModel::train(s.train, ModelConfig{1, 10000, 65, 32}), s.test).overall;
    const double b = evaluate_hil(HilModel::train(s.train, ModelConfig{2, 10000, 65, 32}), s.test).overall;
    MESSAGE("seed 1: " << a << ", seed 2: " << b);
    CHECK(std::abs(a - b) < 0.02);
  }
}
