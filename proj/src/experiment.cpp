#include "hdglue/experiment.hpp"

#include <algorithm>
#include <numeric>

#include "hdglue/error.hpp"

namespace hdglue {

AccuracyReport score_predictions(const EmbeddingDataset& data, std::vector<Label> predictions) {
  if (predictions.size() != data.size()) throw Error(ErrorKind::kLengthMismatch, "one prediction per row required");
  AccuracyReport r;
  std::map<Label, std::pair<std::size_t, std::size_t>> tally;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& [ok, n] = tally[data.label(i)];
    ++n;
    if (predictions[i] == data.label(i)) {
      ++ok;
      ++correct;
    }
  }
  for (const auto& [label, t] : tally) r.per_class[label] = static_cast<double>(t.first) / static_cast<double>(t.second);
  r.overall = data.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
  r.predictions = std::move(predictions);
  return r;
}

AccuracyReport evaluate_hil(const HilModel& model, const EmbeddingDataset& test) {
  std::vector<Label> preds;
  preds.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) preds.push_back(model.predict(test.row(i)).label);
  return score_predictions(test, std::move(preds));
}

AccuracyReport evaluate_glue(const GlueModel& glue, std::span<const MemberSlot> slots,
                             std::span<const EmbeddingDataset* const> tests,
                             std::optional<std::span<const MemberSlot>> available) {
  if (slots.size() != tests.size() || tests.empty()) {
    throw Error(ErrorKind::kLengthMismatch, "one test set per member slot required");
  }
  const std::size_t n = tests.front()->size();
  for (const EmbeddingDataset* t : tests) {
    if (t->size() != n) throw Error(ErrorKind::kLengthMismatch, "member test sets are not row-aligned");
  }
  std::vector<Label> preds;
  preds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    MemberEmbeddings e;
    for (std::size_t k = 0; k < slots.size(); ++k) e[slots[k]] = tests[k]->row(i);
    preds.push_back(glue.predict(e, available).label);
  }
  return score_predictions(*tests.front(), std::move(preds));
}

SpecialistData make_specialist_data(std::uint64_t seed, const SpecialistSetup& setup) {
  if (setup.networks == 0 || setup.classes < setup.networks) {
    throw Error(ErrorKind::kInvalidValue, "need at least one class per network");
  }
  std::vector<Label> classes(setup.classes);
  std::iota(classes.begin(), classes.end(), Label{0});
  const std::uint32_t per = setup.classes / setup.networks;
  SpecialistData out;
  for (std::uint32_t k = 0; k < setup.networks; ++k) {
    std::vector<Label> specialty;
    for (std::uint32_t j = 0; j < per; ++j) specialty.push_back(k * per + j);
    auto spec = specialist_spec(classes, specialty, setup.d, setup.sharp_noise, setup.other_noise,
                                SeedContext(seed, "network", k).key(), setup.magnitude);
    spec.name = "s" + std::to_string(k);
    out.splits.push_back(gen_synthetic(spec, setup.n_train, setup.n_test));
    out.specs.push_back(std::move(spec));
  }
  return out;
}

double GlueRun::member_mean() const {
  double s = 0.0;
  for (const AccuracyReport& r : member_reports) s += r.overall;
  return member_reports.empty() ? 0.0 : s / static_cast<double>(member_reports.size());
}

double GlueRun::member_max() const {
  double m = 0.0;
  for (const AccuracyReport& r : member_reports) m = std::max(m, r.overall);
  return m;
}

GlueRun run_glue_experiment(const SpecialistData& data, std::uint64_t seed, std::uint32_t dim, std::uint32_t levels) {
  GlueRun run;
  run.glue = GlueModel(seed, dim);
  std::vector<const EmbeddingDataset*> tests;
  for (const SyntheticSplit& split : data.splits) {
    auto hil = std::make_shared<const HilModel>(
        HilModel::train(split.train, ModelConfig{seed, dim, levels, split.train.dim()}));
    run.member_reports.push_back(evaluate_hil(*hil, split.test));
    run.slots.push_back(run.glue.add_model(hil));
    run.members.push_back(std::move(hil));
    tests.push_back(&split.test);
  }
  run.glue_report = evaluate_glue(run.glue, run.slots, tests);
  return run;
}

}  // namespace hdglue
