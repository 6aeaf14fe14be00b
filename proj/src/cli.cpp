#include "hdglue/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hdglue/bytes.hpp"
#include "hdglue/error.hpp"
#include "hdglue/experiment.hpp"
#include "hdglue/fleet.hpp"
#include "hdglue/model_io.hpp"
#include "hdglue/online.hpp"
#include "json.hpp"

namespace hdglue {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::uint32_t dim = kDefaultDim;
  std::uint32_t levels = kDefaultLevels;
  std::string out;
  std::vector<std::string> argv;
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

json run_config(const GlobalOptions& g, const std::string& command, json params) {
  return {{"command", command},
          {"version", HDGLUE_VERSION},
          {"seed", g.seed},
          {"dim", g.dim},
          {"levels", g.levels},
          {"argv", g.argv},
          {"params", std::move(params)}};
}

json per_class_json(const std::map<Label, double>& per_class) {
  json j = json::object();
  for (const auto& [label, acc] : per_class) j[std::to_string(label)] = acc;
  return j;
}

json metrics(json config, const AccuracyReport& report, std::optional<json> per_member, Clock::time_point start) {
  json m = {{"config", std::move(config)},
            {"per_class_accuracy", per_class_json(report.per_class)},
            {"overall_accuracy", report.overall}};
  if (per_member) m["per_member_scores"] = std::move(*per_member);
  m["wall_time_ms"] = elapsed_ms(start);
  return m;
}

void emit(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::string dataset_ext(const std::string& format) { return format == "csv" ? ".csv" : ".hdge"; }

MemberSlot parse_member(const std::string& text) {
  std::string digits = text;
  if (!digits.empty() && (digits.front() == 'm' || digits.front() == 'M')) digits.erase(0, 1);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::kUnknownMember, "bad member name \"" + text + "\" (expected m<slot>)");
  }
  return static_cast<MemberSlot>(std::stoul(digits));
}

// ---- gen-synth ----

struct GenSynthOptions {
  std::string preset = "specialists";
  std::string spec_path;
  std::uint32_t n_train = 100;
  std::uint32_t n_test = 100;
  std::string format = "binary";
};

std::vector<SyntheticNetworkSpec> preset_specs(const std::string& preset, std::uint64_t seed) {
  std::vector<Label> ten(10);
  std::iota(ten.begin(), ten.end(), Label{0});
  std::vector<SyntheticNetworkSpec> specs;
  if (preset == "default") {
    specs.push_back(default_network_spec(ten, 32, 1.0, SeedContext(seed, "network", 0).key()));
    specs.back().name = "default";
  } else if (preset == "two-class") {
    specs.push_back(two_cluster_spec(32, 1.0, SeedContext(seed, "network", 0).key()));
  } else if (preset == "specialists") {
    SpecialistData data = make_specialist_data(seed, SpecialistSetup{});
    specs = std::move(data.specs);
  } else {
    throw Error(ErrorKind::kInvalidValue, "unknown preset " + preset);
  }
  return specs;
}

std::vector<SyntheticNetworkSpec> specs_from_file(const std::string& path, std::uint64_t seed, GenSynthOptions& o) {
  const auto bytes = read_file_bytes(path);
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, path + ": " + e.what());
  }
  std::vector<SyntheticNetworkSpec> specs;
  try {
    o.n_train = doc.value("n_train", o.n_train);
    o.n_test = doc.value("n_test", o.n_test);
    const json& nets = doc.at("networks");
    for (std::size_t k = 0; k < nets.size(); ++k) {
      const json& n = nets[k];
      const auto classes = n.at("classes").get<std::vector<Label>>();
      const auto d = n.value("d", 32u);
      const auto net_seed = n.value("seed", SeedContext(seed, "network", k).key());
      const auto magnitude = n.value("magnitude", kDefaultMeanMagnitude);
      SyntheticNetworkSpec spec;
      if (n.contains("specialty")) {
        spec = specialist_spec(classes, n.at("specialty").get<std::vector<Label>>(), d, n.value("sharp_noise", 0.5),
                               n.value("other_noise", 3.0), net_seed, magnitude);
      } else {
        spec = default_network_spec(classes, d, n.value("noise", 1.0), net_seed, magnitude);
      }
      spec.name = n.value("name", "net" + std::to_string(k));
      specs.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, path + ": " + e.what());
  }
  if (specs.empty()) throw Error(ErrorKind::kEmptyInput, path + ": no networks");
  return specs;
}

int cmd_gen_synth(const GlobalOptions& g, GenSynthOptions o, std::ostream& out) {
  if (g.out.empty()) throw Error(ErrorKind::kIo, "gen-synth needs --out <directory>");
  const auto specs = o.spec_path.empty() ? preset_specs(o.preset, g.seed) : specs_from_file(o.spec_path, g.seed, o);
  fs::create_directories(g.out);
  json manifest = {{"config", run_config(g, "gen-synth",
                                         {{"preset", o.spec_path.empty() ? o.preset : ""},
                                          {"spec", o.spec_path},
                                          {"n_train", o.n_train},
                                          {"n_test", o.n_test},
                                          {"format", o.format}})},
                   {"networks", json::array()}};
  for (const auto& spec : specs) {
    const SyntheticSplit split = gen_synthetic(spec, o.n_train, o.n_test);
    const fs::path train = fs::path(g.out) / (spec.name + ".train" + dataset_ext(o.format));
    const fs::path test = fs::path(g.out) / (spec.name + ".test" + dataset_ext(o.format));
    save_dataset(split.train, train);
    save_dataset(split.test, test);
    const CentroidResult oracle = nearest_centroid_oracle(split.train, split.test);
    manifest["networks"].push_back({{"name", spec.name},
                                    {"train", train.filename().string()},
                                    {"test", test.filename().string()},
                                    {"classes", spec.classes},
                                    {"d", spec.d},
                                    {"digest", spec.digest()},
                                    {"oracle_accuracy", oracle.accuracy}});
    out << spec.name << ": " << split.train.size() << " train, " << split.test.size() << " test, oracle "
        << oracle.accuracy << "\n";
  }
  write_file_atomic(fs::path(g.out) / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

// ---- train / eval ----

struct TrainOptions {
  std::string data;
  std::string metrics;
};

int cmd_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& out) {
  if (g.out.empty()) throw Error(ErrorKind::kIo, "train needs --out <model.hdgm>");
  const auto start = Clock::now();
  const EmbeddingDataset data = load_dataset(o.data);
  const HilModel model = HilModel::train(data, ModelConfig{g.seed, g.dim, g.levels, data.dim()});
  save_model(model, g.out);
  const AccuracyReport report = evaluate_hil(model, data);
  out << "trained " << model.labels().size() << " classes on " << data.size() << " examples; training accuracy "
      << report.overall << "\n";
  if (!o.metrics.empty()) {
    emit(metrics(run_config(g, "train", {{"data", o.data}, {"model", g.out}, {"d", data.dim()}}), report,
                 std::nullopt, start),
         o.metrics, out);
  }
  return 0;
}

struct EvalOptions {
  std::string model;
  std::vector<std::string> data;
  std::vector<std::string> drop;
};

std::vector<MemberSlot> available_after_drop(const GlueModel& glue, const std::vector<std::string>& drop) {
  std::set<MemberSlot> dropped;
  for (const std::string& d : drop) {
    const MemberSlot s = parse_member(d);
    if (!glue.member(s).active) throw Error(ErrorKind::kUnknownMember, "member m" + std::to_string(s) + " is not active");
    dropped.insert(s);
  }
  std::vector<MemberSlot> available;
  for (MemberSlot s : glue.active_slots()) {
    if (!dropped.contains(s)) available.push_back(s);
  }
  if (available.empty()) throw Error(ErrorKind::kEmptyInput, "every member was dropped");
  return available;
}

int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out) {
  const auto start = Clock::now();
  AnyModel model = load_model(o.model);
  std::vector<EmbeddingDataset> data;
  for (const std::string& p : o.data) data.push_back(load_dataset(p));
  if (data.empty()) throw Error(ErrorKind::kEmptyInput, "eval needs --data");
  json params = {{"model", o.model}, {"data", o.data}, {"drop", o.drop}};
  AccuracyReport report;
  std::optional<json> per_member;
  if (auto* hil = std::get_if<HilModel>(&model)) {
    params["kind"] = "hil";
    report = evaluate_hil(*hil, data.front());
  } else if (auto* fleet = std::get_if<ErrorFleet>(&model)) {
    params["kind"] = "fleet";
    std::vector<Label> preds;
    for (std::size_t i = 0; i < data.front().size(); ++i) preds.push_back(fleet->predict(data.front().row(i)).label);
    report = score_predictions(data.front(), std::move(preds));
  } else if (auto* glue = std::get_if<GlueModel>(&model)) {
    params["kind"] = "glue";
    const std::vector<MemberSlot> slots = glue->active_slots();
    if (data.size() != slots.size()) {
      throw Error(ErrorKind::kMissingEmbedding, std::to_string(slots.size()) + " active members need as many --data files, got " +
                                                    std::to_string(data.size()));
    }
    std::vector<const EmbeddingDataset*> tests;
    for (const auto& d : data) tests.push_back(&d);
    const auto available = available_after_drop(*glue, o.drop);
    report = evaluate_glue(*glue, slots, tests, std::span<const MemberSlot>(available));
    per_member = json::array();
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const GlueMember& m = glue->member(slots[k]);
      const bool avail = std::find(available.begin(), available.end(), m.slot) != available.end();
      json entry = {{"member", "m" + std::to_string(m.slot)}, {"weight", m.weight.value()}, {"available", avail}};
      if (m.hil) entry["standalone_accuracy"] = evaluate_hil(*m.hil, data[k]).overall;
      per_member->push_back(entry);
    }
  } else {
    throw Error(ErrorKind::kInvalidValue, "session snapshots are evaluated by online-sim --resume");
  }
  emit(metrics(run_config(g, "eval", params), report, per_member, start), g.out, out);
  return 0;
}

// ---- glue ----

struct GlueOptions {
  std::vector<std::string> models;
  std::vector<double> weights;
  std::vector<std::string> tests;
  std::vector<std::string> drop;
  std::string save;
};

int cmd_glue(const GlobalOptions& g, const GlueOptions& o, std::ostream& out) {
  const auto start = Clock::now();
  if (o.models.empty()) throw Error(ErrorKind::kEmptyInput, "glue needs at least one --model");
  if (!o.weights.empty() && o.weights.size() != o.models.size()) {
    throw Error(ErrorKind::kLengthMismatch, "--weights needs one value per --model");
  }
  std::vector<std::shared_ptr<const HilModel>> hils;
  for (const std::string& p : o.models) {
    AnyModel m = load_model(p);
    auto* hil = std::get_if<HilModel>(&m);
    if (!hil) throw Error(ErrorKind::kInvalidValue, p + " does not hold a HIL model");
    hils.push_back(std::make_shared<const HilModel>(std::move(*hil)));
  }
  const std::uint64_t seed = hils.front()->config().seed;
  GlueModel glue(seed, hils.front()->config().dim);
  std::vector<MemberSlot> slots;
  for (std::size_t k = 0; k < hils.size(); ++k) {
    const Weight w = o.weights.empty() ? Weight::one() : Weight::from_double(o.weights[k]);
    slots.push_back(glue.add_model(hils[k], w));
  }
  if (!o.save.empty()) save_model(glue, o.save);
  json params = {{"models", o.models}, {"weights", o.weights}, {"tests", o.tests}, {"drop", o.drop},
                 {"glue_seed", seed}, {"glue_dim", glue.dim()}};
  if (o.tests.empty()) {
    out << "glued " << hils.size() << " models\n";
    return 0;
  }
  if (o.tests.size() != o.models.size()) throw Error(ErrorKind::kLengthMismatch, "--test needs one file per --model");
  std::vector<EmbeddingDataset> data;
  for (const std::string& p : o.tests) data.push_back(load_dataset(p));
  std::vector<const EmbeddingDataset*> tests;
  for (const auto& d : data) tests.push_back(&d);
  const auto available = available_after_drop(glue, o.drop);
  const AccuracyReport report = evaluate_glue(glue, slots, tests, std::span<const MemberSlot>(available));
  json per_member = json::array();
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const bool avail = std::find(available.begin(), available.end(), slots[k]) != available.end();
    per_member.push_back({{"member", "m" + std::to_string(slots[k])},
                          {"model", o.models[k]},
                          {"weight", glue.member(slots[k]).weight.value()},
                          {"available", avail},
                          {"standalone_accuracy", evaluate_hil(*hils[k], data[k]).overall}});
  }
  if (!g.out.empty()) out << "glue accuracy " << report.overall << " using " << available.size() << " of "
                          << slots.size() << " members\n";
  emit(metrics(run_config(g, "glue", params), report, per_member, start), g.out, out);
  return 0;
}

// ---- correct ----

struct CorrectOptions {
  std::string data;
  std::string test;
  bool memory = false;
  std::uint32_t max_rounds = 8;
  double threshold = 0.95;
  std::string save;
};

int cmd_correct(const GlobalOptions& g, const CorrectOptions& o, std::ostream& out) {
  const auto start = Clock::now();
  const EmbeddingDataset train = load_dataset(o.data);
  FleetOptions fo;
  fo.max_rounds = o.max_rounds;
  fo.use_residual_memory = o.memory;
  fo.memory_threshold = o.threshold;
  const ErrorFleet fleet = ErrorFleet::correct(train, ModelConfig{g.seed, g.dim, g.levels, train.dim()}, fo);
  if (!o.save.empty()) save_model(fleet, o.save);

  auto run = [&](const EmbeddingDataset& d) {
    std::vector<Label> preds;
    for (std::size_t i = 0; i < d.size(); ++i) preds.push_back(fleet.predict(d.row(i)).label);
    return score_predictions(d, std::move(preds));
  };
  const AccuracyReport train_report = run(train);
  std::optional<EmbeddingDataset> test;
  if (!o.test.empty()) test = load_dataset(o.test);
  const AccuracyReport report = test ? run(*test) : train_report;

  json rounds = json::array();
  const std::vector<double> norm = fleet.normalized_weights();
  for (std::size_t r = 0; r < fleet.rounds().size(); ++r) {
    const FleetRound& fr = fleet.rounds()[r];
    rounds.push_back({{"round", r + 1},
                      {"weight", fr.weight.value()},
                      {"normalized_weight", norm[r]},
                      {"coverage", fr.coverage()},
                      {"accuracy", fr.accuracy()}});
  }
  json params = {{"data", o.data}, {"test", o.test}, {"memory", o.memory}, {"max_rounds", o.max_rounds},
                 {"threshold", o.threshold}, {"save", o.save}};
  json m = metrics(run_config(g, "correct", params), report, rounds, start);
  m["training_accuracy"] = train_report.overall;
  m["memory_entries"] = fleet.memory().size();
  m["evaluated_on"] = test ? "test" : "train";
  if (!g.out.empty()) {
    out << fleet.rounds().size() << " rounds, training accuracy " << train_report.overall << ", "
        << fleet.memory().size() << " memory entries\n";
  }
  emit(m, g.out, out);
  return 0;
}

// ---- online-sim ----

struct OnlineOptions {
  std::string schedule;
  std::string resume;
  std::string snapshot;
  std::uint32_t d = 32;
  std::uint32_t test_per_class = 100;
  std::uint32_t models = 5;
  std::uint32_t classes_per_model = 2;
  std::uint32_t n_per_class = 100;
};

int cmd_online(const GlobalOptions& g, const OnlineOptions& o, std::ostream& out) {
  if (g.out.empty()) throw Error(ErrorKind::kIo, "online-sim needs --out <directory>");
  const auto start = Clock::now();
  const SessionConfig config{g.seed, g.dim, g.levels, o.d, o.test_per_class};
  std::optional<OnlineSession> session;
  if (!o.resume.empty()) {
    session = parse_session(read_file_bytes(o.resume), &config);
  } else {
    Schedule schedule;
    if (o.schedule.empty()) {
      schedule = staged_schedule(o.models, o.classes_per_model, o.n_per_class);
    } else {
      const auto bytes = read_file_bytes(o.schedule);
      schedule = parse_schedule(std::string(bytes.begin(), bytes.end()));
    }
    session.emplace(config, std::move(schedule));
  }
  session->run();
  fs::create_directories(g.out);
  write_file_atomic(fs::path(g.out) / "table.csv", session->history_csv());
  write_file_atomic(fs::path(g.out) / "history.jsonl", session->history_jsonl());
  if (!o.snapshot.empty()) save_model(*session, o.snapshot);

  AccuracyReport last;
  if (!session->history().empty()) {
    const HistoryRow& row = session->history().back();
    for (const auto& [label, acc] : row.per_class) {
      if (acc) last.per_class[label] = *acc;
    }
    last.overall = row.overall;
  }
  json params = {{"schedule", o.schedule.empty() ? schedule_to_json(session->schedule()) : o.schedule},
                 {"resume", o.resume},
                 {"d", o.d},
                 {"test_per_class", o.test_per_class}};
  emit(metrics(run_config(g, "online-sim", params), last, std::nullopt, start), (fs::path(g.out) / "metrics.json").string(),
       out);
  out << session->history_csv();
  return 0;
}

// ---- bench ----

struct BenchOptions {
  std::vector<std::uint32_t> dims{2000, 4000, 8000, 12000};
  std::uint32_t repeats = 1;
  std::uint32_t n_train = 100;
  std::uint32_t n_test = 100;
};

int cmd_bench(const GlobalOptions& g, const BenchOptions& o, std::ostream& out) {
  if (o.dims.empty()) throw Error(ErrorKind::kEmptyInput, "bench needs at least one dim");
  if (o.repeats == 0) throw Error(ErrorKind::kInvalidValue, "--repeats must be at least 1");
  SpecialistSetup setup;
  setup.n_train = o.n_train;
  setup.n_test = o.n_test;
  std::vector<SpecialistData> data;
  for (std::uint32_t r = 0; r < o.repeats; ++r) data.push_back(make_specialist_data(g.seed + r, setup));

  std::string jsonl;
  std::vector<double> glue_acc;
  std::vector<double> mean_acc;
  std::vector<double> max_acc;
  for (std::uint32_t dim : o.dims) {
    double gsum = 0.0;
    double msum = 0.0;
    double xsum = 0.0;
    for (std::uint32_t r = 0; r < o.repeats; ++r) {
      const auto start = Clock::now();
      const std::uint64_t seed = g.seed + r;
      const GlueRun run = run_glue_experiment(data[r], seed, dim, g.levels);
      gsum += run.glue_report.overall;
      msum += run.member_mean();
      xsum += run.member_max();
      json per_member = json::array();
      for (std::size_t k = 0; k < run.slots.size(); ++k) {
        per_member.push_back({{"member", "m" + std::to_string(run.slots[k])},
                              {"standalone_accuracy", run.member_reports[k].overall}});
      }
      GlobalOptions cfg = g;
      cfg.seed = seed;
      cfg.dim = dim;
      json params = {{"networks", setup.networks}, {"classes", setup.classes}, {"d", setup.d},
                     {"sharp_noise", setup.sharp_noise}, {"other_noise", setup.other_noise},
                     {"magnitude", setup.magnitude}, {"n_train", setup.n_train}, {"n_test", setup.n_test}};
      jsonl += metrics(run_config(cfg, "bench", params), run.glue_report, per_member, start).dump() + "\n";
    }
    glue_acc.push_back(gsum / o.repeats);
    mean_acc.push_back(msum / o.repeats);
    max_acc.push_back(xsum / o.repeats);
  }

  std::ostringstream table;
  table << "method";
  for (std::uint32_t dim : o.dims) table << ",dim=" << dim;
  table << "\n";
  auto line = [&](const char* name, const std::vector<double>& v) {
    table << name;
    for (double x : v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", x);
      table << ',' << buf;
    }
    table << "\n";
  };
  line("glue", glue_acc);
  line("member_mean", mean_acc);
  line("member_max", max_acc);
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    write_file_atomic(fs::path(g.out) / "bench.csv", table.str());
    write_file_atomic(fs::path(g.out) / "bench.jsonl", jsonl);
  }
  out << table.str();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperdimensional gluing of classifier embeddings", "hdglue"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(HDGLUE_VERSION));

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed for all randomness")->envname("HDGLUE_SEED");
  app.add_option("--dim", g.dim, "Hypervector dimension")->capture_default_str();
  app.add_option("--levels", g.levels, "Number of quantization levels")->capture_default_str();
  app.add_option("--out", g.out, "Output file or directory (per subcommand)");

  GenSynthOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-synth", "Write synthetic network datasets");
  gen_cmd->add_option("--preset", gen.preset, "default | two-class | specialists")->capture_default_str();
  gen_cmd->add_option("--spec", gen.spec_path, "JSON spec file ({\"networks\": [...]})");
  gen_cmd->add_option("--n-train", gen.n_train, "Training examples per class")->capture_default_str();
  gen_cmd->add_option("--n-test", gen.n_test, "Test examples per class")->capture_default_str();
  gen_cmd->add_option("--format", gen.format, "binary | csv")
      ->check(CLI::IsMember({"binary", "csv"}))
      ->capture_default_str();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a HIL model from a dataset (--out model.hdgm)");
  train_cmd->add_option("--data", train.data, "Training dataset (.csv or .hdge)")->required();
  train_cmd->add_option("--metrics", train.metrics, "Write training metrics JSON here");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy of a saved model on a dataset");
  eval_cmd->add_option("--model", eval.model, "Model file (.hdgm)")->required();
  eval_cmd->add_option("--data", eval.data, "Dataset; for a glue, one per active member in slot order")->required();
  eval_cmd->add_option("--drop", eval.drop, "Glue member to treat as unavailable (m<slot>)");

  GlueOptions glue;
  auto* glue_cmd = app.add_subcommand("glue", "Fuse saved HIL models and evaluate the glue");
  glue_cmd->add_option("--model", glue.models, "HIL model files, one per member")->required();
  glue_cmd->add_option("--weights", glue.weights, "Member weights")->delimiter(',');
  glue_cmd->add_option("--test", glue.tests, "Row-aligned test datasets, one per member");
  glue_cmd->add_option("--drop", glue.drop, "Member to treat as unavailable (m<slot>)");
  glue_cmd->add_option("--save", glue.save, "Write the glue model here");

  CorrectOptions correct;
  auto* correct_cmd = app.add_subcommand("correct", "Train an error-correcting fleet");
  correct_cmd->add_option("--data", correct.data, "Training dataset")->required();
  correct_cmd->add_option("--test", correct.test, "Held-out dataset to report on");
  correct_cmd->add_flag("--memory", correct.memory, "Store still-misclassified examples exactly");
  correct_cmd->add_option("--max-rounds", correct.max_rounds, "Round cap")->capture_default_str();
  correct_cmd->add_option("--threshold", correct.threshold, "Memory hit similarity")->capture_default_str();
  correct_cmd->add_option("--save", correct.save, "Write the fleet here");

  OnlineOptions online;
  auto* online_cmd = app.add_subcommand("online-sim", "Run an online-learning schedule (--out directory)");
  online_cmd->add_option("--schedule", online.schedule, "Schedule JSON; default is the staged protocol");
  online_cmd->add_option("--resume", online.resume, "Continue from a session snapshot");
  online_cmd->add_option("--snapshot", online.snapshot, "Write the final session here");
  online_cmd->add_option("--d", online.d, "Embedding length of the synthetic networks")->capture_default_str();
  online_cmd->add_option("--test-per-class", online.test_per_class, "Held-out examples per class")
      ->capture_default_str();
  online_cmd->add_option("--models", online.models, "Staged protocol: number of models")->capture_default_str();
  online_cmd->add_option("--classes-per-model", online.classes_per_model, "Staged protocol: classes per model")
      ->capture_default_str();
  online_cmd->add_option("--n-per-class", online.n_per_class, "Staged protocol: examples per class per stage")
      ->capture_default_str();

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Glue accuracy across hypervector dimensions");
  bench_cmd->add_option("--dims", bench.dims, "Dimensions to sweep")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats, "Seeds per dimension (seed, seed+1, ...)")->capture_default_str();
  bench_cmd->add_option("--n-train", bench.n_train, "Training examples per class")->capture_default_str();
  bench_cmd->add_option("--n-test", bench.n_test, "Test examples per class")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  g.argv.assign(args.begin() + (args.empty() ? 0 : 1), args.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_synth(g, gen, out);
    if (train_cmd->parsed()) return cmd_train(g, train, out);
    if (eval_cmd->parsed()) return cmd_eval(g, eval, out);
    if (glue_cmd->parsed()) return cmd_glue(g, glue, out);
    if (correct_cmd->parsed()) return cmd_correct(g, correct, out);
    if (online_cmd->parsed()) return cmd_online(g, online, out);
    if (bench_cmd->parsed()) return cmd_bench(g, bench, out);
  } catch (const Error& e) {
    err << "hdglue: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "hdglue: io: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int cli_main(int argc, const char* const* argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace hdglue
