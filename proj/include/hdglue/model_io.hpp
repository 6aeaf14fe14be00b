#pragma once

// HDGM container: "HDGM", u16 version, u8 kind, config block (u64 seed,
// u32 dim, u32 levels, u32 d), then kind-specific accumulator counters and
// metadata. Seed-derived vectors (class IDs, level tables, model IDs,
// tiebreaks) are regenerated on load, never stored. Little-endian throughout.

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "hdglue/fleet.hpp"
#include "hdglue/glue.hpp"
#include "hdglue/hil.hpp"
#include "hdglue/online.hpp"

namespace hdglue {

enum class ModelKind : std::uint8_t { kHil = 1, kGlue = 2, kFleet = 3, kSession = 4 };
inline constexpr std::uint16_t kHdgmVersion = 1;

const char* to_string(ModelKind kind) noexcept;

std::vector<std::uint8_t> serialize(const HilModel& model);
std::vector<std::uint8_t> serialize(const GlueModel& model);
std::vector<std::uint8_t> serialize(const ErrorFleet& fleet);
std::vector<std::uint8_t> serialize(const OnlineSession& session);

// Validates magic and version; throws kFormat otherwise.
ModelKind peek_kind(std::span<const std::uint8_t> bytes);

HilModel parse_hil(std::span<const std::uint8_t> bytes);
GlueModel parse_glue(std::span<const std::uint8_t> bytes);
ErrorFleet parse_fleet(std::span<const std::uint8_t> bytes);
// With `expected`, a stored session whose seed, dim, levels or d differ is
// rejected (kDimensionMismatch for dim, kFormat otherwise).
OnlineSession parse_session(std::span<const std::uint8_t> bytes, const SessionConfig* expected = nullptr);

using AnyModel = std::variant<HilModel, GlueModel, ErrorFleet, OnlineSession>;

AnyModel parse_model(std::span<const std::uint8_t> bytes);
AnyModel load_model(const std::filesystem::path& path);

template <typename T>
void save_model(const T& model, const std::filesystem::path& path);

}  // namespace hdglue
