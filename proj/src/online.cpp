#include "hdglue/online.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "hdglue/error.hpp"
#include "json.hpp"

namespace hdglue {

namespace {

using nlohmann::json;

std::size_t class_position(const SyntheticNetworkSpec& spec, Label c) {
  const auto it = std::find(spec.classes.begin(), spec.classes.end(), c);
  if (it == spec.classes.end()) throw Error(ErrorKind::kSchedule, "class " + std::to_string(c) + " unknown");
  return static_cast<std::size_t>(it - spec.classes.begin());
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : it->template get<T>();
}

SessionEvent parse_event(const json& e, std::size_t index) {
  const std::string where = "event " + std::to_string(index);
  if (!e.is_object() || !e.contains("type")) throw Error(ErrorKind::kSchedule, where + ": missing \"type\"");
  const auto type = e.at("type").get<std::string>();
  if (type == "add_model") {
    AddModelEvent a;
    a.name = field_or<std::string>(e, "name", "m" + std::to_string(index));
    a.classes = e.at("classes").get<std::vector<Label>>();
    a.sharp_noise = field_or(e, "sharp_noise", a.sharp_noise);
    a.other_noise = field_or(e, "other_noise", a.other_noise);
    return a;
  }
  if (type == "observe") {
    ObserveEvent o;
    o.n_per_class = field_or(e, "n_per_class", o.n_per_class);
    o.models = field_or(e, "models", o.models);
    o.classes = field_or(e, "classes", o.classes);
    return o;
  }
  if (type == "evaluate") return EvaluateEvent{};
  throw Error(ErrorKind::kSchedule, where + ": unknown type \"" + type + "\"");
}

json row_to_json(const HistoryRow& row) {
  json per_class = json::object();
  for (const auto& [label, acc] : row.per_class) {
    per_class[std::to_string(label)] = acc ? json(*acc) : json(nullptr);
  }
  return {{"event", row.event},
          {"models", row.models},
          {"examples_seen", row.examples_seen},
          {"per_class", per_class},
          {"overall", row.overall}};
}

}  // namespace

Schedule parse_schedule(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("schedule is not valid JSON: ") + e.what());
  }
  const json& events = doc.is_object() ? doc.at("events") : doc;
  if (!events.is_array()) throw Error(ErrorKind::kSchedule, "schedule must be a JSON array of events");
  Schedule out;
  try {
    for (std::size_t i = 0; i < events.size(); ++i) out.push_back(parse_event(events[i], i));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchedule, std::string("bad event field: ") + e.what());
  }
  return out;
}

std::string schedule_to_json(const Schedule& schedule) {
  json events = json::array();
  for (const SessionEvent& ev : schedule) {
    if (const auto* a = std::get_if<AddModelEvent>(&ev)) {
      events.push_back({{"type", "add_model"},
                        {"name", a->name},
                        {"classes", a->classes},
                        {"sharp_noise", a->sharp_noise},
                        {"other_noise", a->other_noise}});
    } else if (const auto* o = std::get_if<ObserveEvent>(&ev)) {
      json j = {{"type", "observe"}, {"n_per_class", o->n_per_class}};
      if (!o->models.empty()) j["models"] = o->models;
      if (!o->classes.empty()) j["classes"] = o->classes;
      events.push_back(j);
    } else {
      events.push_back({{"type", "evaluate"}});
    }
  }
  return events.dump();
}

Schedule staged_schedule(std::uint32_t models, std::uint32_t classes_per_model, std::uint32_t n_per_class) {
  Schedule s;
  Label next = 0;
  for (std::uint32_t k = 0; k < models; ++k) {
    AddModelEvent a;
    a.name = "m" + std::to_string(k);
    for (std::uint32_t j = 0; j < classes_per_model; ++j) a.classes.push_back(next++);
    s.emplace_back(a);
    s.emplace_back(ObserveEvent{n_per_class, {}, {}});
    s.emplace_back(EvaluateEvent{});
  }
  return s;
}

OnlineSession::OnlineSession(const SessionConfig& config, Schedule schedule)
    : config_(config), schedule_(std::move(schedule)) {
  validate(ModelConfig{config_.seed, config_.dim, config_.levels, config_.d});
  if (config_.test_per_class == 0) throw Error(ErrorKind::kInvalidValue, "test_per_class must be at least 1");
  if (schedule_.empty() || !std::holds_alternative<AddModelEvent>(schedule_.front())) {
    throw Error(ErrorKind::kSchedule, "schedule must begin with add_model");
  }
  std::set<Label> all;
  std::set<std::string> names;
  for (const SessionEvent& ev : schedule_) {
    if (const auto* a = std::get_if<AddModelEvent>(&ev)) {
      if (a->classes.empty()) throw Error(ErrorKind::kSchedule, "add_model \"" + a->name + "\" has no classes");
      if (!names.insert(a->name).second) throw Error(ErrorKind::kSchedule, "duplicate model name " + a->name);
      all.insert(a->classes.begin(), a->classes.end());
    }
  }
  universe_.assign(all.begin(), all.end());
  glue_ = GlueModel(config_.seed, config_.dim);
}

SessionModel OnlineSession::make_model(const AddModelEvent& e, std::size_t index) const {
  SessionModel m;
  m.name = e.name;
  m.classes = e.classes;
  m.sharp_noise = e.sharp_noise;
  m.other_noise = e.other_noise;
  m.spec = specialist_spec(universe_, e.classes, config_.d, e.sharp_noise, e.other_noise,
                           SeedContext(config_.seed, "network", index).key());
  m.spec.name = e.name;
  return m;
}

void OnlineSession::run(std::optional<std::size_t> limit) {
  const std::size_t stop = std::min(limit.value_or(schedule_.size()), schedule_.size());
  while (position_ < stop) step();
}

void OnlineSession::step() {
  if (done()) throw Error(ErrorKind::kSchedule, "schedule already finished");
  std::visit([this](const auto& e) { apply(e); }, schedule_[position_]);
  ++position_;
}

void OnlineSession::apply(const AddModelEvent& e) {
  models_.push_back(make_model(e, models_.size()));
  for (Label c : e.classes) {
    if (std::find(introduced_.begin(), introduced_.end(), c) == introduced_.end()) {
      introduced_.push_back(c);
      drawn_.emplace(c, 0);
    }
  }
}

void OnlineSession::apply(const ObserveEvent& e) {
  std::vector<SessionModel*> targets;
  if (e.models.empty()) {
    for (SessionModel& m : models_) targets.push_back(&m);
  } else {
    for (const std::string& name : e.models) {
      auto it = std::find_if(models_.begin(), models_.end(), [&](const SessionModel& m) { return m.name == name; });
      if (it == models_.end()) throw Error(ErrorKind::kSchedule, "observe references unknown model " + name);
      targets.push_back(&*it);
    }
  }
  const std::vector<Label> classes = e.classes.empty() ? introduced_ : e.classes;
  for (Label c : classes) {
    if (!drawn_.contains(c)) throw Error(ErrorKind::kSchedule, "observe references class " + std::to_string(c) +
                                                                   " before it was introduced");
  }
  if (e.n_per_class == 0 || classes.empty()) return;

  const ModelConfig mc{config_.seed, config_.dim, config_.levels, config_.d};
  for (SessionModel* m : targets) {
    EmbeddingDataset batch;
    std::vector<float> values;
    std::vector<Label> labels;
    for (Label c : classes) {
      const std::size_t pos = class_position(m->spec, c);
      const std::uint64_t first = drawn_.at(c);
      for (std::uint32_t k = 0; k < e.n_per_class; ++k) {
        const auto row = sample_embedding(m->spec, pos, first + k);
        values.insert(values.end(), row.begin(), row.end());
        labels.push_back(c);
      }
      m->observed.push_back({c, first, e.n_per_class});
    }
    batch = EmbeddingDataset(config_.d, std::move(values), std::move(labels), "session:" + m->name);
    auto updated = m->hil ? std::make_shared<HilModel>(*m->hil) : std::make_shared<HilModel>(mc);
    updated->update(batch);
    m->hil = updated;
    if (m->slot) {
      glue_.replace_model(*m->slot, m->hil);
    } else {
      m->slot = glue_.add_model(m->hil);
    }
  }
  for (Label c : classes) drawn_[c] += e.n_per_class;
}

void OnlineSession::apply(const EvaluateEvent&) {
  HistoryRow row = evaluate();
  row.event = position_;
  history_.push_back(std::move(row));
}

HistoryRow OnlineSession::evaluate() const {
  if (glue_.active_slots().empty()) throw Error(ErrorKind::kUntrained, "evaluate before any training");
  HistoryRow row;
  row.event = position_;
  row.introduced = introduced_;
  for (Label c : universe_) row.per_class[c] = std::nullopt;
  for (const auto& [c, n] : drawn_) row.examples_seen += n;

  std::vector<const SessionModel*> members;
  for (const SessionModel& m : models_) {
    if (m.slot) members.push_back(&m);
  }
  row.models = members.size();
  std::size_t correct_total = 0;
  std::size_t total = 0;
  std::vector<std::vector<float>> rows(members.size());
  for (Label c : introduced_) {
    std::size_t correct = 0;
    for (std::uint32_t t = 0; t < config_.test_per_class; ++t) {
      MemberEmbeddings embeddings;
      for (std::size_t k = 0; k < members.size(); ++k) {
        rows[k] = sample_embedding(members[k]->spec, class_position(members[k]->spec, c), kTestIndexOffset + t);
        embeddings[*members[k]->slot] = rows[k];
      }
      if (glue_.predict(embeddings).label == c) ++correct;
    }
    row.per_class[c] = static_cast<double>(correct) / static_cast<double>(config_.test_per_class);
    correct_total += correct;
    total += config_.test_per_class;
  }
  row.overall = total == 0 ? 0.0 : static_cast<double>(correct_total) / static_cast<double>(total);
  return row;
}

EmbeddingDataset OnlineSession::observed_data(const SessionModel& m) const {
  std::vector<float> values;
  std::vector<Label> labels;
  for (const ObservedBlock& b : m.observed) {
    const std::size_t pos = class_position(m.spec, b.label);
    for (std::uint32_t k = 0; k < b.count; ++k) {
      const auto row = sample_embedding(m.spec, pos, b.first + k);
      values.insert(values.end(), row.begin(), row.end());
      labels.push_back(b.label);
    }
  }
  return EmbeddingDataset(config_.d, std::move(values), std::move(labels), "session:" + m.name);
}

GlueModel OnlineSession::rebuild_from_scratch() const {
  const ModelConfig mc{config_.seed, config_.dim, config_.levels, config_.d};
  std::vector<const SessionModel*> order;
  for (const SessionModel& m : models_) {
    if (m.slot) order.push_back(&m);
  }
  std::sort(order.begin(), order.end(), [](const SessionModel* a, const SessionModel* b) { return *a->slot < *b->slot; });
  GlueModel g(config_.seed, config_.dim);
  for (const SessionModel* m : order) {
    g.add_model(std::make_shared<const HilModel>(HilModel::train(observed_data(*m), mc)));
  }
  return g;
}

std::string OnlineSession::history_csv() const {
  std::ostringstream out;
  out << "class";
  for (const HistoryRow& r : history_) out << ',' << r.introduced.size();
  out << '\n';
  char buf[32];
  auto cell = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (Label c : universe_) {
    out << c;
    for (const HistoryRow& r : history_) {
      out << ',';
      const auto& acc = r.per_class.at(c);
      if (acc) out << cell(*acc);
    }
    out << '\n';
  }
  out << "overall";
  for (const HistoryRow& r : history_) out << ',' << cell(r.overall);
  out << '\n';
  return out.str();
}

std::string OnlineSession::history_jsonl() const {
  std::string out;
  for (const HistoryRow& r : history_) out += row_to_json(r).dump() + "\n";
  return out;
}

OnlineSession OnlineSession::restore(const SessionConfig& config, Schedule schedule, State state) {
  OnlineSession s(config, std::move(schedule));
  if (state.position > s.schedule_.size()) throw Error(ErrorKind::kFormat, "session position beyond schedule");
  std::size_t adds = 0;
  for (std::size_t i = 0; i < state.position; ++i) {
    if (std::holds_alternative<AddModelEvent>(s.schedule_[i])) ++adds;
  }
  if (adds != state.models.size()) throw Error(ErrorKind::kFormat, "session model count does not match schedule");
  std::vector<GlueMember> members;
  std::size_t k = 0;
  for (std::size_t i = 0; i < state.position; ++i) {
    const auto* a = std::get_if<AddModelEvent>(&s.schedule_[i]);
    if (!a) continue;
    SessionModel m = s.make_model(*a, k);
    State::Model& stored = state.models[k++];
    if (stored.hil) {
      if (stored.hil->config().dim != config.dim) {
        throw Error(ErrorKind::kDimensionMismatch, "stored model dim " + std::to_string(stored.hil->config().dim) +
                                                       " vs session " + std::to_string(config.dim));
      }
      if (!(stored.hil->config() == ModelConfig{config.seed, config.dim, config.levels, config.d})) {
        throw Error(ErrorKind::kFormat, "stored model config differs from session config");
      }
    }
    if (stored.slot.has_value() != static_cast<bool>(stored.hil)) {
      throw Error(ErrorKind::kFormat, "model slot and state disagree");
    }
    m.hil = std::move(stored.hil);
    m.slot = stored.slot;
    m.observed = std::move(stored.observed);
    if (m.slot) {
      GlueMember gm;
      gm.slot = *m.slot;
      gm.query_slot = *m.slot;
      gm.hil = m.hil;
      members.push_back(std::move(gm));
    }
    s.models_.push_back(std::move(m));
  }
  std::sort(members.begin(), members.end(), [](const GlueMember& a, const GlueMember& b) { return a.slot < b.slot; });
  s.glue_ = GlueModel::restore(config.seed, config.dim, std::move(members), state.next_slot);
  s.position_ = state.position;
  s.introduced_ = std::move(state.introduced);
  s.drawn_ = std::move(state.drawn);
  s.history_ = std::move(state.history);
  return s;
}

}  // namespace hdglue
