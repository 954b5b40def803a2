#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "irec/algorithm.hpp"
#include "irec/event_log.hpp"
#include "irec/pcb.hpp"
#include "irec/topology.hpp"

namespace irec {

using PcbPtr = std::shared_ptr<const Pcb>;

struct StoredPcb {
  PcbPtr pcb;
  Digest digest;
  Digest path;
  Round arrival = 0;
};

enum class RejectReason { BadChain, Expired, PolicyViolation, Loop };
std::string_view reject_name(RejectReason r);

struct AcceptResult {
  enum class Kind { Stored, Duplicate, Superseded, Rejected };
  Kind kind = Kind::Stored;
  std::optional<RejectReason> reason;

  bool stored() const { return kind == Kind::Stored; }
};

/// Returns true when the PCB complies with local policy.
using IngressPolicy = std::function<bool(const Pcb&)>;

/// Candidate query. Absent keys match only PCBs without that extension when
/// the matching flag is on, and anything when it is off.
struct IngressQuery {
  AsId origin;
  std::optional<std::uint16_t> group;
  std::optional<AsId> target;
  bool by_group = false;
  bool by_target = false;
};

/// Per-AS candidate store. Holds at most one entry per digest and, per path
/// identity, only the newest copy: a fresher origination of the same path
/// replaces the older one.
class IngressDb {
 public:
  explicit IngressDb(AsId local) : local_(local) {}

  AcceptResult accept(const Pcb& pcb, Round now, const Signer& verifier,
                      const IngressPolicy& policy = {});
  /// Same as accept() with a shared body and precomputed digest.
  AcceptResult accept(PcbPtr pcb, const Digest& digest, Round now, const Signer& verifier,
                      const IngressPolicy& policy = {});

  std::vector<const StoredPcb*> query(const IngressQuery& q, Round now) const;
  /// Every unexpired entry, ordered by digest.
  std::vector<const StoredPcb*> all(Round now) const;

  /// Removes entries with expiry <= now + lookahead.
  std::size_t purge(Round now, Round lookahead = 1);

  std::size_t size() const { return entries_.size(); }
  bool contains(const Digest& d) const { return entries_.count(d) != 0; }

 private:
  AsId local_;
  std::map<Digest, StoredPcb> entries_;
  std::unordered_map<Digest, Digest> newest_by_path_;
};

/// Propagation memory: digest -> egress interfaces already used. Holds no
/// PCB bodies.
class EgressDb {
 public:
  /// Returns the interfaces not yet recorded for this digest and records
  /// them.
  std::set<InterfaceId> record(const Digest& digest, const std::set<InterfaceId>& egress_ifs, Round expiry);
  std::size_t purge(Round now);
  std::size_t size() const { return seen_.size(); }
  const std::set<InterfaceId>* find(const Digest& d) const;

 private:
  struct Entry {
    std::set<InterfaceId> ifs;
    Round expiry = 0;
  };
  std::unordered_map<Digest, Entry> seen_;
};

struct Submission {
  std::string rac_id;
  PcbPtr pcb;
  Digest digest;
  InterfaceId ingress_if;
  std::set<InterfaceId> egress_ifs;
};

struct Message {
  enum class Kind { Beacon, Return };
  Kind kind = Kind::Beacon;
  AsId from;
  AsId to;
  Pcb pcb;
  Digest digest;
};

/// Builds an origin PCB for `egress` with static info from the topology.
Pcb originate_on(const Topology& topo, AsId origin, InterfaceId egress, const Extensions& exts,
                 Round now, Round validity, const Signer& signer, Round cap = kDefaultValidityCap);

class EgressGateway {
 public:
  EgressGateway(const Topology& topo, AsId local) : topo_(&topo), local_(local) {}

  /// Records the submission and queues the newly added interfaces. Throws
  /// UnknownEgressInterface.
  std::set<InterfaceId> submit(const Submission& sub);

  /// Extends and emits everything queued since the last call. A PCB whose
  /// target is this AS goes back to its origin unextended instead.
  std::vector<Message> propagate(Round now, const Signer& signer, EventLog* log = nullptr);

  void purge(Round now) { db_.purge(now); }
  const EgressDb& db() const { return db_; }

 private:
  struct Pending {
    Submission sub;
    std::set<InterfaceId> newly_added;
  };

  const Topology* topo_;
  AsId local_;
  EgressDb db_;
  std::vector<Pending> pending_;
};

struct RegistryKey {
  std::string rac_id;
  AsId origin;
  std::uint16_t group = 0;

  friend auto operator<=>(const RegistryKey&, const RegistryKey&) = default;
};

struct RegisteredPath {
  PcbPtr pcb;
  Digest digest;
  Digest path;
  OrderingKey key;
  std::vector<std::string> tags;
  InterfaceId ingress_if;
};

struct RegistrationInput {
  PcbPtr pcb;
  Digest digest;
  OrderingKey key;
  InterfaceId ingress_if;
};

/// Registered paths per (rac, origin, group), bounded by `cap`. Each path
/// identity appears once, as its newest copy. On overflow the worst entry
/// by the RAC-supplied key (then digest) is evicted.
class PathRegistry {
 public:
  explicit PathRegistry(std::size_t cap = 20) : cap_(cap) {}

  std::size_t register_paths(const std::string& rac_id, const std::vector<RegistrationInput>& paths,
                             const std::vector<std::string>& tags);
  std::size_t purge(Round now);

  const std::map<RegistryKey, std::vector<RegisteredPath>>& entries() const { return entries_; }
  std::size_t cap() const { return cap_; }
  bool empty() const;
  std::size_t size() const;

 private:
  std::size_t cap_;
  std::map<RegistryKey, std::vector<RegisteredPath>> entries_;  // each sorted best first
};

/// Recursive path request toward neighbors. `registered` returns the paths
/// an AS would hand out. Throws Disconnected.
std::vector<Pcb> bootstrap_request(const Topology& topo, AsId requester, std::size_t depth_limit,
                                   const std::function<std::vector<Pcb>(AsId)>& registered);

/// Rate limiter of the fast-forward path: one PCB per origin per interval.
class FastPathLimiter {
 public:
  explicit FastPathLimiter(Round interval = 1) : interval_(interval) {}

  enum class Decision { Forward, RateLimited };
  Decision forward(const Pcb& pcb, Round now);

 private:
  Round interval_;
  std::map<AsId, Round> last_;
};

}  // namespace irec
