#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "irec/algorithm.hpp"
#include "irec/event_log.hpp"
#include "irec/gateways.hpp"
#include "irec/program.hpp"

namespace irec {

enum class RacKind { Static, OnDemand };

struct RacConfig {
  std::string rac_id;
  RacKind kind = RacKind::Static;
  /// Built-in id (1SP, 5SP, LEG20, HD, DON, DOB) or "program" for a static
  /// routing program. Unused for on-demand RACs.
  std::string algorithm;
  std::optional<RoutingProgram> program;
  bool partition_by_group = false;
  bool partition_by_target = false;
  std::size_t max_selected = 20;
  ExecutionLimits limits;
  Round period = 1;
  /// Interface-group diameter for this RAC's origination profile; no
  /// group extension when unset.
  std::optional<double> group_km;
  std::vector<std::string> criteria_tags;

  /// Checks the invariants. Throws ConfigError.
  void validate() const;
  std::vector<std::string> tags() const;
};

/// Descriptor hashed into the AlgorithmExt of PCBs a static RAC originates.
std::string static_descriptor(const RacConfig& cfg);
Digest static_code_hash(const RacConfig& cfg);

/// Published routing programs, per origin AS and algorithm id.
class AlgorithmStore {
 public:
  /// Throws TooLarge.
  void publish(AsId origin, const std::string& algorithm_id, Bytes program,
               std::size_t max_program_bytes = ExecutionLimits{}.max_program_bytes);
  /// Throws NotFound.
  const Bytes& fetch(AsId origin, const std::string& algorithm_id) const;
  std::size_t access_count() const { return accesses_; }

 private:
  std::map<std::pair<AsId, std::string>, Bytes> programs_;
  mutable std::size_t accesses_ = 0;
};

class AlgorithmCache {
 public:
  using Key = std::tuple<AsId, std::string, Digest>;

  const RoutingProgram* find(const Key& key) const;
  const RoutingProgram& insert(const Key& key, RoutingProgram program);
  std::size_t size() const { return programs_.size(); }

 private:
  std::map<Key, std::shared_ptr<const RoutingProgram>> programs_;
};

/// Fetch, verify and parse an on-demand program, short-circuiting on a
/// cache hit. Throws NotFound, HashMismatch, TooLarge or ParseError.
const RoutingProgram& fetch_algorithm(AsId origin, const std::string& algorithm_id, const Digest& expected_hash,
                                      const AlgorithmStore& store, AlgorithmCache& cache,
                                      const ExecutionLimits& limits = {});

struct PartitionKey {
  AsId origin;
  std::optional<std::uint16_t> group;
  std::optional<AsId> target;
  /// Set for on-demand partitions: (algorithm id, code hash).
  std::optional<std::pair<std::string, Digest>> algorithm;

  friend auto operator<=>(const PartitionKey&, const PartitionKey&) = default;
};

struct Partition {
  PartitionKey key;
  std::vector<const StoredPcb*> members;  // ordered by digest
};

/// Groups candidates by origin, plus group and target when the flags are
/// set, plus the algorithm extension for on-demand RACs.
std::vector<Partition> partition_candidates(const std::vector<const StoredPcb*>& phi, const RacConfig& cfg);

/// One routing-algorithm container of one AS.
class RacInstance {
 public:
  /// `static_tags` are the algorithm ids of every static RAC configured on
  /// the AS; an on-demand RAC ignores PCBs carrying one of them.
  RacInstance(RacConfig cfg, std::set<std::string> static_tags);

  const RacConfig& config() const { return cfg_; }
  bool due(Round now) const { return now % cfg_.period == 0; }
  /// True iff this RAC takes the PCB as input.
  bool wants(const Pcb& pcb) const;

  struct Context {
    Round now = 0;
    const TopologyView* view = nullptr;
    const AlgorithmStore* store = nullptr;
    AlgorithmCache* cache = nullptr;
    PathRegistry* registry = nullptr;
    EventLog* log = nullptr;
  };

  /// Runs every partition. A failing partition (fetch error, budget) yields
  /// nothing and leaves the others untouched.
  std::vector<Submission> tick(const std::vector<const StoredPcb*>& snapshot, const Context& ctx);

  /// Errors of the last tick, one line per failed partition.
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  RacConfig cfg_;
  std::set<std::string> static_tags_;
  std::unique_ptr<RoutingAlgorithm> static_alg_;
  std::vector<std::string> errors_;
};

}  // namespace irec
