#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hdglue/glue.hpp"
#include "hdglue/synthetic.hpp"

namespace hdglue {

// Introduces a synthetic network that is sharp on `classes` and brings those
// classes into the session.
struct AddModelEvent {
  std::string name;
  std::vector<Label> classes;
  double sharp_noise = 0.5;
  double other_noise = 1.5;

  friend bool operator==(const AddModelEvent&, const AddModelEvent&) = default;
};

// Presents n_per_class fresh examples of each listed class (default: every
// introduced class) to each listed model (default: every model).
struct ObserveEvent {
  std::uint32_t n_per_class = 100;
  std::vector<std::string> models;
  std::vector<Label> classes;

  friend bool operator==(const ObserveEvent&, const ObserveEvent&) = default;
};

struct EvaluateEvent {
  friend bool operator==(const EvaluateEvent&, const EvaluateEvent&) = default;
};

using SessionEvent = std::variant<AddModelEvent, ObserveEvent, EvaluateEvent>;
using Schedule = std::vector<SessionEvent>;

struct SessionConfig {
  std::uint64_t seed = 0;
  std::uint32_t dim = kDefaultDim;
  std::uint32_t levels = kDefaultLevels;
  std::uint32_t d = 32;
  std::uint32_t test_per_class = 100;

  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

// Schedules are a JSON array of {"type": "add_model" | "observe" | "evaluate", ...},
// or an object {"events": [...]}.
Schedule parse_schedule(const std::string& json_text);
std::string schedule_to_json(const Schedule& schedule);

// `models` networks of `classes_per_model` new classes each; after each
// addition every model sees n_per_class new examples per existing class, then
// the session is evaluated.
Schedule staged_schedule(std::uint32_t models, std::uint32_t classes_per_model, std::uint32_t n_per_class);

struct HistoryRow {
  std::size_t event = 0;  // schedule position of the Evaluate
  std::size_t models = 0;
  std::uint64_t examples_seen = 0;
  std::vector<Label> introduced;
  std::map<Label, std::optional<double>> per_class;  // nullopt: class not yet introduced
  double overall = 0.0;

  friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

// A contiguous run of sample indices of one class presented to a model.
struct ObservedBlock {
  Label label = 0;
  std::uint64_t first = 0;
  std::uint32_t count = 0;

  friend bool operator==(const ObservedBlock&, const ObservedBlock&) = default;
};

struct SessionModel {
  std::string name;
  std::vector<Label> classes;
  double sharp_noise = 0.5;
  double other_noise = 1.5;
  SyntheticNetworkSpec spec;
  std::shared_ptr<const HilModel> hil;  // null until the model sees data
  std::optional<MemberSlot> slot;
  std::vector<ObservedBlock> observed;
};

class OnlineSession {
 public:
  OnlineSession(const SessionConfig& config, Schedule schedule);

  // Runs events until `limit` have been executed (all by default).
  void run(std::optional<std::size_t> limit = std::nullopt);
  void step();
  [[nodiscard]] bool done() const noexcept { return position_ == schedule_.size(); }

  // Current per-class and overall accuracy of the glue on the fixed test sets.
  [[nodiscard]] HistoryRow evaluate() const;

  // Trains every model from scratch on everything it has observed and glues
  // them in slot order; equals glue() when online updates are exact.
  [[nodiscard]] GlueModel rebuild_from_scratch() const;

  [[nodiscard]] const SessionConfig& config() const noexcept { return config_; }
  [[nodiscard]] const Schedule& schedule() const noexcept { return schedule_; }
  [[nodiscard]] std::size_t position() const noexcept { return position_; }
  [[nodiscard]] const GlueModel& glue() const noexcept { return glue_; }
  [[nodiscard]] const std::vector<SessionModel>& models() const noexcept { return models_; }
  [[nodiscard]] const std::vector<Label>& introduced() const noexcept { return introduced_; }
  [[nodiscard]] const std::vector<Label>& universe() const noexcept { return universe_; }
  [[nodiscard]] const std::map<Label, std::uint64_t>& drawn() const noexcept { return drawn_; }
  [[nodiscard]] const std::vector<HistoryRow>& history() const noexcept { return history_; }

  // Table-shaped CSV: one row per class plus "overall", one column per evaluation.
  [[nodiscard]] std::string history_csv() const;
  // One JSON object per evaluation, newline-separated.
  [[nodiscard]] std::string history_jsonl() const;

  struct State {
    std::size_t position = 0;
    std::vector<Label> introduced;
    std::map<Label, std::uint64_t> drawn;
    std::vector<HistoryRow> history;
    struct Model {
      std::shared_ptr<const HilModel> hil;
      std::optional<MemberSlot> slot;
      std::vector<ObservedBlock> observed;
    };
    std::vector<Model> models;  // one per AddModel executed so far
    MemberSlot next_slot = 0;
  };
  // Rebuilds a session mid-schedule from stored state (deserialization).
  static OnlineSession restore(const SessionConfig& config, Schedule schedule, State state);

 private:
  void apply(const AddModelEvent& e);
  void apply(const ObserveEvent& e);
  void apply(const EvaluateEvent& e);
  [[nodiscard]] SessionModel make_model(const AddModelEvent& e, std::size_t index) const;
  [[nodiscard]] EmbeddingDataset observed_data(const SessionModel& m) const;

  SessionConfig config_;
  Schedule schedule_;
  std::vector<Label> universe_;
  std::size_t position_ = 0;
  std::vector<SessionModel> models_;
  std::vector<Label> introduced_;
  std::map<Label, std::uint64_t> drawn_;
  GlueModel glue_;
  std::vector<HistoryRow> history_;
};

}  // namespace hdglue
