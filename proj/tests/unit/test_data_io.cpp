#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "hdglue/bytes.hpp"
#include "hdglue/experiment.hpp"
#include "hdglue/model_io.hpp"

using namespace hdglue;
namespace fs = std::filesystem;

namespace {

const std::vector<Label> kTen{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / "hdglue_unit_io";
  fs::create_directories(p);
  return p;
}

double oracle_on(const SyntheticSplit& s, const std::vector<Label>& which) {
  const CentroidResult r = nearest_centroid_oracle(s.train, s.test);
  std::size_t n = 0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    if (std::find(which.begin(), which.end(), s.test.label(i)) == which.end()) continue;
    ++n;
    ok += r.predictions[i] == s.test.label(i);
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace

TEST_SUITE("data_io") {
  TEST_CASE("hand-written CSV") {
    const EmbeddingDataset d = parse_csv_dataset("label,e0,e1,e2\n3,0.5,-1.25,2\n0,1e-3,0,7.5\n");
    REQUIRE(d.size() == 2);
    CHECK(d.dim() == 3);
    CHECK(d.label(0) == 3);
    CHECK(d.label(1) == 0);
    CHECK(d.row(0)[1] == -1.25f);
    CHECK(d.row(1)[0] == 1e-3f);
    CHECK(d.classes() == std::vector<Label>{0, 3});
  }

  TEST_CASE("CSV errors name the row") {
    try {
      (void)parse_csv_dataset("label,e0,e1\n1,0,0\n2,inf,0\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidValue);
      CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
    CHECK_ERROR_KIND(parse_csv_dataset("lbl,e0\n1,0\n"), ErrorKind::kFormat);
    CHECK_ERROR_KIND(parse_csv_dataset("label,e0,e1\n1,0\n"), ErrorKind::kLengthMismatch);
    CHECK_ERROR_KIND(parse_csv_dataset("label,e0\nx,0\n"), ErrorKind::kFormat);
    CHECK_ERROR_KIND(parse_csv_dataset(""), ErrorKind::kFormat);
  }

  TEST_CASE("CSV and binary round-trips") {
    const SyntheticSplit s = gen_synthetic(default_network_spec({1, 4, 6}, 8, 1.0, 3), 5, 1);
    CHECK(parse_csv_dataset(to_csv(s.train)) == s.train);
    const auto bytes = to_hdge_bytes(s.train);
    CHECK(parse_hdge_bytes(bytes) == s.train);
    CHECK(to_hdge_bytes(parse_hdge_bytes(bytes)) == bytes);
    CHECK(bytes.size() == 4 + 2 + 4 + 4 + s.train.size() * (8 * 4 + 4));
    const fs::path dir = temp_dir();
    save_dataset(s.train, dir / "a.csv");
    save_dataset(s.train, dir / "a.hdge");
    CHECK(load_dataset(dir / "a.csv") == s.train);
    CHECK(load_dataset(dir / "a.hdge") == s.train);
    CHECK(format_for_path("x.csv") == DatasetFormat::kCsv);
    CHECK(format_for_path("x.bin") == DatasetFormat::kBinary);
  }

  TEST_CASE("binary format errors") {
    const EmbeddingDataset d(2, {1.0f, 2.0f}, {0});
    auto bytes = to_hdge_bytes(d);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_ERROR_KIND(parse_hdge_bytes(bad), ErrorKind::kFormat);
    bad = bytes;
    bad[4] = 2;
    CHECK_ERROR_KIND(parse_hdge_bytes(bad), ErrorKind::kFormat);
    bad = bytes;
    bad.pop_back();
    CHECK_ERROR_KIND(parse_hdge_bytes(bad), ErrorKind::kFormat);
    CHECK_ERROR_KIND(load_dataset(temp_dir() / "missing.hdge"), ErrorKind::kIo);
  }

  TEST_CASE("dataset validation") {
    CHECK_ERROR_KIND(EmbeddingDataset(2, {1.0f}, {0}), ErrorKind::kLengthMismatch);
    CHECK_ERROR_KIND(EmbeddingDataset(1, {std::numeric_limits<float>::quiet_NaN()}, {0}), ErrorKind::kInvalidValue);
  }

  TEST_CASE("synthetic generation") {
    const auto spec = default_network_spec(kTen, 32, 0.0, 4);
    const SyntheticSplit zero = gen_synthetic(spec, 3, 3);
    for (std::size_t i = 0; i < zero.train.size(); ++i) {
      const auto row = zero.train.row(i);
      const auto& mean = spec.class_means[zero.train.label(i)];
      CHECK(std::equal(row.begin(), row.end(), mean.begin()));
    }
    CHECK(gen_synthetic(spec, 3, 3).train == zero.train);
    const auto noisy = default_network_spec(kTen, 32, 1.0, 4);
    CHECK(to_hdge_bytes(gen_synthetic(noisy, 20, 5).test) == to_hdge_bytes(gen_synthetic(noisy, 20, 5).test));
    CHECK(noisy.digest() == default_network_spec(kTen, 32, 1.0, 4).digest());
    CHECK(noisy.digest() != default_network_spec(kTen, 32, 1.0, 5).digest());
    CHECK(sample_embedding(noisy, 2, 7) == sample_embedding(noisy, 2, 7));
  }

  TEST_CASE("synthetic oracle bands") {
    const SyntheticSplit d = gen_synthetic(default_network_spec(kTen, 32, 1.0, 8), 100, 100);
    CHECK(nearest_centroid_oracle(d.train, d.test).accuracy >= 0.95);
    const std::vector<Label> specialty{2, 3};
    const SyntheticSplit s = gen_synthetic(specialist_spec(kTen, specialty, 32, 0.5, 3.0, 8), 100, 200);
    const double sharp = oracle_on(s, specialty);
    const double other = oracle_on(s, {0, 1, 4, 5, 6, 7, 8, 9});
    MESSAGE("specialty " << sharp << ", others " << other);
    CHECK(sharp >= 0.9);
    CHECK(other <= 0.6);
    const SyntheticSplit two = gen_synthetic(two_cluster_spec(32, 1.0, 8), 100, 500);
    CHECK(nearest_centroid_oracle(two.train, two.test).accuracy >= 0.99);
    const EmbeddingDataset single(2, {1.0f, 1.0f, 2.0f, 2.0f}, {5, 5});
    const EmbeddingDataset q(2, {-9.0f, 4.0f}, {0});
    CHECK(nearest_centroid_oracle(single, q).predictions == std::vector<Label>{5});
  }

  TEST_CASE("HDGM round-trips for every model kind") {
    SpecialistSetup setup;
    setup.n_train = 20;
    setup.n_test = 10;
    const SpecialistData data = make_specialist_data(3, setup);
    const GlueRun run = run_glue_experiment(data, 3, 4000);
    const HilModel& hil = *run.members[0];

    const auto hil_bytes = serialize(hil);
    CHECK(peek_kind(hil_bytes) == ModelKind::kHil);
    const HilModel hil_back = parse_hil(hil_bytes);
    CHECK(hil_back == hil);
    CHECK(serialize(hil_back) == hil_bytes);
    for (std::size_t i = 0; i < data.splits[0].test.size(); ++i) {
      const auto row = data.splits[0].test.row(i);
      CHECK(hil_back.predict(row).label == hil.predict(row).label);
    }

    GlueModel glue = run.glue;
    glue.remove_model(4);
    const std::vector<MemberSlot> fold{1, 2};
    glue.compress(fold, Weight::from_double(0.5));
    const auto glue_bytes = serialize(glue);
    const GlueModel glue_back = parse_glue(glue_bytes);
    CHECK(serialize(glue_back) == glue_bytes);
    CHECK(glue_back.glue_vector() == glue.glue_vector());
    CHECK(glue_back.fusion() == glue.fusion());

    const ErrorFleet fleet =
        ErrorFleet::correct(data.splits[0].train, ModelConfig{3, 4000, 65, 32}, FleetOptions{4, true, 0.95});
    const auto fleet_bytes = serialize(fleet);
    const ErrorFleet fleet_back = parse_fleet(fleet_bytes);
    CHECK(serialize(fleet_back) == fleet_bytes);
    for (std::size_t i = 0; i < data.splits[0].test.size(); ++i) {
      const auto row = data.splits[0].test.row(i);
      CHECK(fleet_back.predict(row).label == fleet.predict(row).label);
    }

    const fs::path dir = temp_dir();
    save_model(glue, dir / "g.hdgm");
    CHECK(read_file_bytes(dir / "g.hdgm") == glue_bytes);
    CHECK(std::holds_alternative<GlueModel>(load_model(dir / "g.hdgm")));
  }

  TEST_CASE("HDGM corruption is rejected") {
    const SyntheticSplit s = gen_synthetic(two_cluster_spec(8, 1.0, 1), 5, 1);
    const auto bytes = serialize(HilModel::train(s.train, ModelConfig{1, 1000, 9, 8}));
    auto bad = bytes;
    bad[1] = 'X';
    CHECK_ERROR_KIND(parse_hil(bad), ErrorKind::kFormat);
    bad = bytes;
    bad[4] = 9;
    CHECK_ERROR_KIND(parse_hil(bad), ErrorKind::kFormat);
    bad = bytes;
    bad.resize(bad.size() - 3);
    CHECK_ERROR_KIND(parse_hil(bad), ErrorKind::kFormat);
    bad = bytes;
    bad.push_back(0);
    CHECK_ERROR_KIND(parse_hil(bad), ErrorKind::kFormat);
    CHECK_ERROR_KIND(parse_glue(bytes), ErrorKind::kFormat);
  }

  TEST_CASE("byte helpers are little-endian") {
    ByteWriter w;
    w.u16(0x0102);
    w.u32(0x03040506);
    w.i64(-2);
    const auto b = w.take();
    CHECK(b[0] == 0x02);
    CHECK(b[2] == 0x06);
    ByteReader r(b);
    CHECK(r.u16() == 0x0102);
    CHECK(r.u32() == 0x03040506);
    CHECK(r.i64() == -2);
    CHECK(r.done());
    CHECK_ERROR_KIND(r.u8(), ErrorKind::kFormat);
  }
}
