#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "irec/algorithm.hpp"

namespace irec {

struct AvoidLinks {
  std::set<AsLink> links;
  friend bool operator==(const AvoidLinks&, const AvoidLinks&) = default;
};
struct AvoidAses {
  std::set<AsId> ases;
  friend bool operator==(const AvoidAses&, const AvoidAses&) = default;
};
struct MaxHops {
  std::uint16_t hops = 0;
  friend bool operator==(const MaxHops&, const MaxHops&) = default;
};
struct MaxDelayMs {
  double ms = 0.0;
  friend bool operator==(const MaxDelayMs&, const MaxDelayMs&) = default;
};
struct MinBandwidthMbps {
  double mbps = 0.0;
  friend bool operator==(const MinBandwidthMbps&, const MinBandwidthMbps&) = default;
};

using ProgramFilter = std::variant<AvoidLinks, AvoidAses, MaxHops, MaxDelayMs, MinBandwidthMbps>;

enum class Objective : std::uint8_t {
  MinSumDelay = 1,
  MinHops = 2,
  MaxMinBandwidth = 3,
  /// Contextual: links not yet covered by paths selected earlier in the
  /// same execution for the same egress.
  MaxFreshLinks = 4,
};

std::string_view objective_name(Objective o);

/// Declarative routing algorithm: filters, lexicographic objectives and a
/// selection count.
struct RoutingProgram {
  std::vector<ProgramFilter> filters;
  std::vector<Objective> objectives;
  std::uint16_t select_k = 1;

  friend bool operator==(const RoutingProgram&, const RoutingProgram&) = default;
};

struct ExecutionLimits {
  std::uint64_t max_steps = 1'000'000;
  std::size_t max_memory_items = 100'000;
  std::size_t max_program_bytes = 64 * 1024;
};

/// "IRECALG1" serialization; see docs/formats.md.
Bytes serialize_program(const RoutingProgram& program);
/// Strict parse. Throws TooLarge (before parsing) or ParseError.
RoutingProgram parse_program(ByteView bytes, std::size_t max_program_bytes = ExecutionLimits{}.max_program_bytes);
Digest program_hash(const RoutingProgram& program);

/// Text form used in config files, e.g.
///   max_delay_ms=30; objectives=MaxMinBandwidth,MinSumDelay; select_k=20
/// Throws Error(ConfigError).
RoutingProgram parse_program_text(std::string_view text);
std::string program_to_text(const RoutingProgram& program);

/// True iff the candidate, extended to `egress`, passes every filter.
bool passes_filters(const RoutingProgram& program, const Candidate& c, InterfaceId egress,
                    const TopologyView& view);

/// Runs a program over one partition. Per egress: filter on extended
/// metrics, rank by the objectives, keep the best select_k. The local
/// selection applies the same filters and objectives to received paths
/// (AvoidLinks/AvoidAses/MaxHops/MaxDelayMs/MinBandwidth on the path as
/// received). Throws StepBudgetExceeded or MemoryBudgetExceeded.
Selection execute_program(const RoutingProgram& program, std::span<const Candidate> candidates,
                          const TopologyView& view, const ExecutionLimits& limits);

class ProgramAlgorithm final : public RoutingAlgorithm {
 public:
  ProgramAlgorithm(std::string name, RoutingProgram program, ExecutionLimits limits = {})
      : name_(std::move(name)), program_(std::move(program)), limits_(limits) {}

  std::string_view name() const override { return name_; }
  const RoutingProgram& program() const { return program_; }
  Selection select(std::span<const Candidate> candidates, const TopologyView& view,
                   const SelectionContext& ctx) override;

 private:
  std::string name_;
  RoutingProgram program_;
  ExecutionLimits limits_;
};

}  // namespace irec
