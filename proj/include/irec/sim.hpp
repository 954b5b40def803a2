#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "irec/event_log.hpp"
#include "irec/gateways.hpp"
#include "irec/pd.hpp"
#include "irec/rac.hpp"
#include "irec/topology.hpp"

namespace irec {

/// On-demand origination profile: AS(es) publishing a routing program and
/// beaconing with it, optionally toward a target (pull-based).
struct OriginProfile {
  std::string name;  // algorithm id carried in the PCBs
  RoutingProgram program;
  std::vector<AsId> origins;  // empty: every AS
  std::optional<AsId> target;
  Round first_round = 0;
  std::optional<Round> last_round;
};

struct PdConfig {
  std::vector<std::pair<AsId, AsId>> pairs;  // (source, target)
  std::size_t random_pairs = 0;              // extra pairs drawn from the seed
  std::size_t goal_k = 20;
  Round timeout_rounds = 16;
  Round start_round = 8;
  std::string seed_rac = "HD";
};

struct SimConfig {
  std::shared_ptr<const Topology> topology;
  Round rounds = 10;
  Round period = 1;  // origination period
  std::vector<RacConfig> racs;
  std::vector<OriginProfile> origins;
  std::optional<PdConfig> pd;
  std::size_t registry_cap = 20;
  Round validity = kDefaultValidityCap;
  Round validity_cap = kDefaultValidityCap;
  Round purge_lookahead = 1;
  Round fastpath_interval = 0;  // 0 disables the fast path
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// INI-style config with sections [topology], [sim], [rac.<name>],
/// [origin.<name>] and [pd]; see docs/config.md. Relative paths resolve
/// against `base_dir`. Throws ConfigError.
SimConfig parse_sim_config(std::istream& in, const std::filesystem::path& base_dir = {});
SimConfig load_sim_config(const std::filesystem::path& path);

/// One registered path as exported from a registry snapshot.
struct PathRecord {
  AsId as;  // registering AS
  std::string rac;
  AsId origin;
  std::uint16_t group = 0;
  std::size_t rank = 0;  // position in the RAC's ordering, best first
  Digest digest;
  std::size_t hops = 0;
  std::optional<double> delay_ms;
  Round created = 0;
  std::vector<AsId> ases;  // origin first, registering AS last
  GeoPoint origin_location;
  GeoPoint local_location;
  std::vector<std::string> tags;

  friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

struct ReturnRecord {
  Round round = 0;  // intake round at the origin
  AsId as;
  AsId target;
  std::string algorithm_id;
  Digest digest;
  std::vector<AsId> ases;  // origin first, target last

  friend bool operator==(const ReturnRecord&, const ReturnRecord&) = default;
};

struct PdRecord {
  AsId source;
  AsId target;
  std::uint32_t iterations = 0;
  bool terminated = false;
  std::vector<std::vector<AsId>> paths;  // source first, target last

  friend bool operator==(const PdRecord&, const PdRecord&) = default;
};

struct SimResult {
  Round rounds = 0;
  std::shared_ptr<const Topology> topology;
  EventLog log;
  std::vector<PathRecord> registry;
  std::vector<ReturnRecord> returns;
  std::vector<PdRecord> pd;
  /// Registry ids in first-seen order of configuration.
  std::vector<std::string> algorithms;
  /// Labels of everything that emits PCBs (RACs, origin profiles, PD).
  std::vector<std::string> emitters;
  std::vector<std::string> warnings;
};

/// Runs the round-based engine. With `event_sink` the log is written there
/// as the run goes and the result's log keeps only the event count.
/// Throws ConfigError.
SimResult run(const SimConfig& config, std::ostream* event_sink = nullptr);

/// Registry rows of one AS. Throws UnknownAs.
std::vector<PathRecord> snapshot_registry(const SimResult& result, AsId as);

/// Writes events.log (unless the log was streamed), registry.csv,
/// result.json and topology.georel.
void save_result(const SimResult& result, const std::filesystem::path& dir);
/// Throws MissingResult. Without `with_events` the log stays empty; scan
/// events.log instead.
SimResult load_result(const std::filesystem::path& dir, bool with_events = true);

void write_registry_csv(std::ostream& out, const std::vector<PathRecord>& rows);

/// Write to a temporary sibling, then rename over `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

}  // namespace irec
