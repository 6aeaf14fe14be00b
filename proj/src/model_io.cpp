#include "hdglue/model_io.hpp"

#include <bit>
#include <string>

#include "hdglue/bytes.hpp"
#include "hdglue/error.hpp"

namespace hdglue {

namespace {

constexpr char kMagic[] = "HDGM";

struct ConfigBlock {
  std::uint64_t seed = 0;
  std::uint32_t dim = 0;
  std::uint32_t levels = 0;
  std::uint32_t d = 0;
};

ModelConfig to_model_config(const ConfigBlock& c) { return ModelConfig{c.seed, c.dim, c.levels, c.d}; }

void write_config(ByteWriter& w, const ConfigBlock& c) {
  w.u64(c.seed);
  w.u32(c.dim);
  w.u32(c.levels);
  w.u32(c.d);
}

ConfigBlock read_config(ByteReader& r) {
  ConfigBlock c;
  c.seed = r.u64();
  c.dim = r.u32();
  c.levels = r.u32();
  c.d = r.u32();
  return c;
}

void write_header(ByteWriter& w, ModelKind kind, const ConfigBlock& c) {
  w.raw(std::string_view(kMagic, 4));
  w.u16(kHdgmVersion);
  w.u8(static_cast<std::uint8_t>(kind));
  write_config(w, c);
}

ConfigBlock read_header(ByteReader& r, ModelKind expected) {
  if (r.raw(4) != std::string_view(kMagic, 4)) throw Error(ErrorKind::kFormat, "bad magic: not an HDGM file");
  const std::uint16_t version = r.u16();
  if (version != kHdgmVersion) {
    throw Error(ErrorKind::kFormat, "unsupported HDGM version " + std::to_string(version));
  }
  const auto kind = static_cast<ModelKind>(r.u8());
  if (kind != expected) {
    throw Error(ErrorKind::kFormat, std::string("HDGM holds a ") + to_string(kind) + ", expected " +
                                        to_string(expected));
  }
  return read_config(r);
}

void finish(const ByteReader& r) {
  if (!r.done()) throw Error(ErrorKind::kFormat, std::to_string(r.remaining()) + " trailing bytes");
}

void write_f64(ByteWriter& w, double v) { w.u64(std::bit_cast<std::uint64_t>(v)); }
double read_f64(ByteReader& r) { return std::bit_cast<double>(r.u64()); }

void write_accumulator(ByteWriter& w, const ConsensusAccumulator& acc) {
  w.u32(acc.dim());
  w.u64(acc.tiebreak_context().master_seed);
  w.str(acc.tiebreak_context().name_space);
  w.u64(acc.tiebreak_context().index);
  w.i64(acc.total_weight_micros());
  w.u64(acc.term_count());
  for (std::int64_t c : acc.counters()) w.i64(c);
}

ConsensusAccumulator read_accumulator(ByteReader& r) {
  const std::uint32_t dim = r.u32();
  validate_dimension(dim);
  SeedContext ctx;
  ctx.master_seed = r.u64();
  ctx.name_space = r.str();
  ctx.index = r.u64();
  const std::int64_t total = r.i64();
  const std::uint64_t terms = r.u64();
  if (r.remaining() / 8 < dim) throw Error(ErrorKind::kFormat, "truncated counter array");
  std::vector<std::int64_t> counters(dim);
  for (auto& c : counters) c = r.i64();
  return ConsensusAccumulator::restore(dim, std::move(ctx), total, terms, std::move(counters));
}

void write_hil_body(ByteWriter& w, const HilModel& m) {
  w.u32(static_cast<std::uint32_t>(m.classes().size()));
  for (const auto& [label, state] : m.classes()) {
    w.u32(label);
    w.u64(state.examples);
    write_accumulator(w, state.memory);
  }
}

HilModel read_hil_body(ByteReader& r, const ModelConfig& config) {
  const std::uint32_t n = r.u32();
  std::map<Label, ConsensusAccumulator> memories;
  std::map<Label, std::uint64_t> counts;
  for (std::uint32_t i = 0; i < n; ++i) {
    const Label label = r.u32();
    counts[label] = r.u64();
    if (!memories.emplace(label, read_accumulator(r)).second) {
      throw Error(ErrorKind::kFormat, "duplicate class " + std::to_string(label));
    }
  }
  return HilModel::restore(config, std::move(memories), counts);
}

ConfigBlock block_of(const ModelConfig& c) { return {c.seed, c.dim, c.levels, c.length}; }

void write_labels(ByteWriter& w, std::span<const Label> labels) {
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (Label l : labels) w.u32(l);
}

std::vector<Label> read_labels(ByteReader& r) {
  const std::uint32_t n = r.u32();
  if (r.remaining() / 4 < n) throw Error(ErrorKind::kFormat, "truncated label list");
  std::vector<Label> out(n);
  for (auto& l : out) l = r.u32();
  return out;
}

}  // namespace

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::kHil: return "hil";
    case ModelKind::kGlue: return "glue";
    case ModelKind::kFleet: return "fleet";
    case ModelKind::kSession: return "session";
  }
  return "unknown";
}

ModelKind peek_kind(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.raw(4) != std::string_view(kMagic, 4)) throw Error(ErrorKind::kFormat, "bad magic: not an HDGM file");
  const std::uint16_t version = r.u16();
  if (version != kHdgmVersion) {
    throw Error(ErrorKind::kFormat, "unsupported HDGM version " + std::to_string(version));
  }
  const std::uint8_t kind = r.u8();
  if (kind < 1 || kind > 4) throw Error(ErrorKind::kFormat, "unknown HDGM object kind " + std::to_string(kind));
  return static_cast<ModelKind>(kind);
}

std::vector<std::uint8_t> serialize(const HilModel& model) {
  ByteWriter w;
  write_header(w, ModelKind::kHil, block_of(model.config()));
  write_hil_body(w, model);
  return w.take();
}

HilModel parse_hil(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const ConfigBlock c = read_header(r, ModelKind::kHil);
  HilModel m = read_hil_body(r, to_model_config(c));
  finish(r);
  return m;
}

std::vector<std::uint8_t> serialize(const GlueModel& model) {
  ByteWriter w;
  write_header(w, ModelKind::kGlue, {model.seed(), model.dim(), 0, 0});
  w.u32(model.next_slot());
  w.u32(static_cast<std::uint32_t>(model.members().size()));
  for (const GlueMember& m : model.members()) {
    w.u32(m.slot);
    w.i64(m.weight.micros());
    w.u8(m.active ? 1 : 0);
    w.u32(m.query_slot);
    if (m.hil) {
      w.u8(0);
      write_config(w, block_of(m.hil->config()));
      write_hil_body(w, *m.hil);
    } else {
      w.u8(1);
      write_config(w, block_of(m.folded->encoder->config()));
      write_accumulator(w, m.folded->accumulator);
      write_labels(w, m.folded->labels);
      write_labels(w, m.folded->folded_slots);
    }
  }
  return w.take();
}

GlueModel parse_glue(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const ConfigBlock c = read_header(r, ModelKind::kGlue);
  validate_dimension(c.dim);
  const MemberSlot next_slot = r.u32();
  const std::uint32_t n = r.u32();
  std::vector<GlueMember> members;
  for (std::uint32_t i = 0; i < n; ++i) {
    GlueMember m;
    m.slot = r.u32();
    const std::int64_t micros = r.i64();
    if (micros <= 0) throw Error(ErrorKind::kFormat, "member weight must be positive");
    m.weight = Weight::from_micros(micros);
    m.active = r.u8() != 0;
    m.query_slot = r.u32();
    const std::uint8_t type = r.u8();
    const ModelConfig mc = to_model_config(read_config(r));
    if (type == 0) {
      m.hil = std::make_shared<const HilModel>(read_hil_body(r, mc));
    } else if (type == 1) {
      validate(mc);
      FoldedModel f{read_accumulator(r), Hypervector(), std::make_shared<const EmbeddingEncoder>(mc), read_labels(r),
                    {}};
      f.folded_slots = read_labels(r);
      if (f.accumulator.dim() != c.dim || !(f.accumulator.tiebreak_context() == fold_tiebreak_context(c.seed))) {
        throw Error(ErrorKind::kFormat, "folded member does not match glue config");
      }
      m.folded = std::move(f);
    } else {
      throw Error(ErrorKind::kFormat, "unknown member type " + std::to_string(type));
    }
    members.push_back(std::move(m));
  }
  finish(r);
  return GlueModel::restore(c.seed, c.dim, std::move(members), next_slot);
}

std::vector<std::uint8_t> serialize(const ErrorFleet& fleet) {
  ByteWriter w;
  write_header(w, ModelKind::kFleet, block_of(fleet.config()));
  w.u32(fleet.options().max_rounds);
  w.u8(fleet.options().use_residual_memory ? 1 : 0);
  write_f64(w, fleet.options().memory_threshold);
  w.u32(static_cast<std::uint32_t>(fleet.rounds().size()));
  for (const FleetRound& round : fleet.rounds()) {
    w.i64(round.weight.micros());
    w.u64(round.subset_size);
    w.u64(round.subset_correct);
    w.u64(round.training_size);
    write_hil_body(w, *round.hil);
  }
  w.u32(static_cast<std::uint32_t>(fleet.trace().size()));
  for (const FleetStep& s : fleet.trace()) {
    w.u32(s.round);
    w.u64(s.subset_size);
    w.u64(s.fleet_correct);
    w.u8(s.accepted ? 1 : 0);
  }
  w.u32(static_cast<std::uint32_t>(fleet.memory().size()));
  for (const MemoryEntry& e : fleet.memory()) {
    w.u32(e.label);
    for (std::uint64_t word : e.encoding.words()) w.u64(word);
  }
  return w.take();
}

ErrorFleet parse_fleet(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const ModelConfig mc = to_model_config(read_header(r, ModelKind::kFleet));
  validate(mc);
  FleetOptions options;
  options.max_rounds = r.u32();
  options.use_residual_memory = r.u8() != 0;
  options.memory_threshold = read_f64(r);
  const std::uint32_t n_rounds = r.u32();
  std::vector<FleetRound> rounds;
  for (std::uint32_t i = 0; i < n_rounds; ++i) {
    FleetRound round;
    const std::int64_t micros = r.i64();
    if (micros <= 0) throw Error(ErrorKind::kFormat, "round weight must be positive");
    round.weight = Weight::from_micros(micros);
    round.subset_size = r.u64();
    round.subset_correct = r.u64();
    round.training_size = r.u64();
    round.hil = std::make_shared<const HilModel>(read_hil_body(r, mc));
    rounds.push_back(std::move(round));
  }
  const std::uint32_t n_steps = r.u32();
  std::vector<FleetStep> trace;
  for (std::uint32_t i = 0; i < n_steps; ++i) {
    FleetStep s;
    s.round = r.u32();
    s.subset_size = r.u64();
    s.fleet_correct = r.u64();
    s.accepted = r.u8() != 0;
    trace.push_back(s);
  }
  const std::uint32_t n_memory = r.u32();
  const std::size_t words = words_for(mc.dim);
  std::vector<MemoryEntry> memory;
  for (std::uint32_t i = 0; i < n_memory; ++i) {
    MemoryEntry e;
    e.label = r.u32();
    if (r.remaining() / 8 < words) throw Error(ErrorKind::kFormat, "truncated memory entry");
    std::vector<std::uint64_t> bits(words);
    for (auto& b : bits) b = r.u64();
    e.encoding = Hypervector::from_words(mc.dim, std::move(bits));
    memory.push_back(std::move(e));
  }
  finish(r);
  return ErrorFleet::restore(mc, options, std::move(rounds), std::move(memory), std::move(trace));
}

std::vector<std::uint8_t> serialize(const OnlineSession& session) {
  const SessionConfig& c = session.config();
  ByteWriter w;
  write_header(w, ModelKind::kSession, {c.seed, c.dim, c.levels, c.d});
  w.u32(c.test_per_class);
  w.str(schedule_to_json(session.schedule()));
  w.u64(session.position());
  write_labels(w, session.introduced());
  w.u32(static_cast<std::uint32_t>(session.drawn().size()));
  for (const auto& [label, n] : session.drawn()) {
    w.u32(label);
    w.u64(n);
  }
  w.u32(static_cast<std::uint32_t>(session.models().size()));
  for (const SessionModel& m : session.models()) {
    w.u8(m.hil ? 1 : 0);
    if (m.hil) {
      w.u32(*m.slot);
      write_hil_body(w, *m.hil);
    }
    w.u32(static_cast<std::uint32_t>(m.observed.size()));
    for (const ObservedBlock& b : m.observed) {
      w.u32(b.label);
      w.u64(b.first);
      w.u32(b.count);
    }
  }
  w.u32(session.glue().next_slot());
  w.u32(static_cast<std::uint32_t>(session.history().size()));
  for (const HistoryRow& row : session.history()) {
    w.u64(row.event);
    w.u64(row.models);
    w.u64(row.examples_seen);
    write_labels(w, row.introduced);
    w.u32(static_cast<std::uint32_t>(row.per_class.size()));
    for (const auto& [label, acc] : row.per_class) {
      w.u32(label);
      w.u8(acc ? 1 : 0);
      write_f64(w, acc.value_or(0.0));
    }
    write_f64(w, row.overall);
  }
  return w.take();
}

OnlineSession parse_session(std::span<const std::uint8_t> bytes, const SessionConfig* expected) {
  ByteReader r(bytes);
  const ConfigBlock block = read_header(r, ModelKind::kSession);
  SessionConfig c{block.seed, block.dim, block.levels, block.d, 0};
  c.test_per_class = r.u32();
  if (expected) {
    if (expected->dim != c.dim) {
      throw Error(ErrorKind::kDimensionMismatch, "snapshot dim " + std::to_string(c.dim) + " vs expected " +
                                                     std::to_string(expected->dim));
    }
    if (!(*expected == c)) throw Error(ErrorKind::kFormat, "snapshot config differs from the expected config");
  }
  const ModelConfig mc = to_model_config(block);
  validate(mc);
  Schedule schedule = parse_schedule(r.str());
  OnlineSession::State state;
  state.position = r.u64();
  state.introduced = read_labels(r);
  const std::uint32_t n_drawn = r.u32();
  for (std::uint32_t i = 0; i < n_drawn; ++i) {
    const Label label = r.u32();
    state.drawn[label] = r.u64();
  }
  const std::uint32_t n_models = r.u32();
  for (std::uint32_t i = 0; i < n_models; ++i) {
    OnlineSession::State::Model m;
    if (r.u8() != 0) {
      m.slot = r.u32();
      m.hil = std::make_shared<const HilModel>(read_hil_body(r, mc));
    }
    const std::uint32_t n_blocks = r.u32();
    for (std::uint32_t k = 0; k < n_blocks; ++k) {
      ObservedBlock b;
      b.label = r.u32();
      b.first = r.u64();
      b.count = r.u32();
      m.observed.push_back(b);
    }
    state.models.push_back(std::move(m));
  }
  state.next_slot = r.u32();
  const std::uint32_t n_rows = r.u32();
  for (std::uint32_t i = 0; i < n_rows; ++i) {
    HistoryRow row;
    row.event = r.u64();
    row.models = r.u64();
    row.examples_seen = r.u64();
    row.introduced = read_labels(r);
    const std::uint32_t n_classes = r.u32();
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      const Label label = r.u32();
      const bool present = r.u8() != 0;
      const double acc = read_f64(r);
      row.per_class[label] = present ? std::optional<double>(acc) : std::nullopt;
    }
    row.overall = read_f64(r);
    state.history.push_back(std::move(row));
  }
  finish(r);
  return OnlineSession::restore(c, std::move(schedule), std::move(state));
}

AnyModel parse_model(std::span<const std::uint8_t> bytes) {
  switch (peek_kind(bytes)) {
    case ModelKind::kHil: return parse_hil(bytes);
    case ModelKind::kGlue: return parse_glue(bytes);
    case ModelKind::kFleet: return parse_fleet(bytes);
    case ModelKind::kSession: return parse_session(bytes);
  }
  throw Error(ErrorKind::kFormat, "unknown HDGM object kind");
}

AnyModel load_model(const std::filesystem::path& path) {
  return parse_model(read_file_bytes(path));
}

template <typename T>
void save_model(const T& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize(model));
}

template void save_model(const HilModel&, const std::filesystem::path&);
template void save_model(const GlueModel&, const std::filesystem::path&);
template void save_model(const ErrorFleet&, const std::filesystem::path&);
template void save_model(const OnlineSession&, const std::filesystem::path&);

}  // namespace hdglue
