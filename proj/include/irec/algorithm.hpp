#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irec/pcb.hpp"
#include "irec/topology.hpp"

namespace irec {

/// Read-only, AS-local view of the topology handed to routing algorithms:
/// the local interfaces, intra-AS delays between them, and what lies
/// behind each egress.
class TopologyView {
 public:
  TopologyView(const Topology& topo, AsId local);

  AsId local_as() const { return local_; }
  const std::vector<InterfaceId>& interfaces() const { return ifs_; }
  bool has_interface(InterfaceId ifid) const;

  double intra_delay_ms(InterfaceId a, InterfaceId b) const;
  AsId neighbor(InterfaceId egress) const { return info(egress).neighbor; }
  double link_delay_ms(InterfaceId egress) const { return info(egress).link_delay_ms; }
  double link_bandwidth_mbps(InterfaceId egress) const { return info(egress).bandwidth_mbps; }

  /// Local interface a PCB arrives on when its last hop left through
  /// (remote_as, remote_egress), if that link exists.
  std::optional<InterfaceId> ingress_for(AsId remote_as, InterfaceId remote_egress) const;

 private:
  struct EgressInfo {
    AsId neighbor;
    InterfaceId neighbor_if;
    double link_delay_ms = 0.0;
    double bandwidth_mbps = 0.0;
  };

  std::size_t slot(InterfaceId ifid) const;
  const EgressInfo& info(InterfaceId ifid) const { return egress_[slot(ifid)]; }

  AsId local_;
  std::vector<InterfaceId> ifs_;  // ascending
  std::vector<EgressInfo> egress_;
  std::vector<double> intra_;  // row-major |ifs| x |ifs|
};

/// A candidate PCB as presented to an algorithm, with precomputed metrics
/// of the received path.
struct Candidate {
  const Pcb* pcb = nullptr;
  Digest digest;
  InterfaceId ingress;
  std::size_t hops = 0;
  std::optional<double> delay_ms;      // received accumulated delay
  double min_bandwidth_mbps = 0.0;     // bottleneck of the received path
  Round created = 0;
  std::vector<AsId> ases;              // on-path ASes, sorted
  std::vector<AsLink> links;           // AS-level links incl. the one into the local AS, sorted

  bool visits(AsId as) const;
};

/// Builds a candidate; returns nullopt when the PCB did not arrive over a
/// link of the local AS.
std::optional<Candidate> make_candidate(const Pcb& pcb, const Digest& digest, const TopologyView& view);

/// True iff propagating the candidate over `egress` keeps the path loop-free.
bool eligible(const Candidate& c, InterfaceId egress, const TopologyView& view);

/// Metrics of a candidate extended by the local hop to `egress`.
struct ExtendedMetrics {
  std::optional<double> delay_ms;
  std::size_t hops = 0;
  double min_bandwidth_mbps = 0.0;
};
ExtendedMetrics extended_metrics(const Candidate& c, InterfaceId egress, const TopologyView& view);

/// Lexicographic ordering key, smaller is better. Ties on `values` prefer
/// newer beacons, then the smaller digest.
struct OrderingKey {
  std::vector<double> values;
  Round created = 0;
  Digest digest;

  friend bool operator<(const OrderingKey& a, const OrderingKey& b) {
    if (a.values != b.values) return a.values < b.values;
    if (a.created != b.created) return a.created > b.created;
    return a.digest < b.digest;
  }
  friend bool operator==(const OrderingKey&, const OrderingKey&) = default;
};

struct Ranked {
  std::size_t candidate = 0;  // index into the candidate span
  OrderingKey key;
};

/// Algorithm output: a ranked list per egress interface, plus the ranked
/// selection of received paths used for path registration and for pull
/// returns at the target AS.
struct Selection {
  std::map<InterfaceId, std::vector<Ranked>> per_egress;
  std::vector<Ranked> local;
};

struct SelectionContext {
  std::size_t max_selected = 20;
  Round now = 0;
};

/// The standardized RAC <-> algorithm interface. Partition keys (origin,
/// group, target) are not passed in; candidates of one call always share
/// them.
class RoutingAlgorithm {
 public:
  virtual ~RoutingAlgorithm() = default;

  virtual std::string_view name() const = 0;
  virtual Selection select(std::span<const Candidate> candidates, const TopologyView& view,
                           const SelectionContext& ctx) = 0;
};

}  // namespace irec
