#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "irec/geo.hpp"
#include "irec/pcb.hpp"
#include "irec/types.hpp"

namespace irec {

enum class Relationship : std::uint8_t { ProviderToCustomer, CustomerToProvider, PeerToPeer };

std::string to_string(Relationship rel);

inline constexpr double kDefaultBandwidthMbps = 1000.0;

struct Interface {
  AsId owner;
  InterfaceId if_id;
  GeoPoint location;
  AsId peer_as;
  InterfaceId peer_if;
  double link_bandwidth_mbps = kDefaultBandwidthMbps;
  std::size_t link_index = 0;
};

/// One inter-AS link. `a` is the first AS named on its geo-rel line.
struct Link {
  AsId a_as;
  InterfaceId a_if;
  AsId b_as;
  InterfaceId b_if;
  Relationship rel = Relationship::PeerToPeer;
  double bandwidth_mbps = kDefaultBandwidthMbps;
  /// Overrides the geographic propagation delay when set.
  std::optional<double> delay_ms;
};

/// Geo-annotated AS-level multigraph. Interfaces are created by add_link,
/// numbered per AS from 1 in creation order.
class Topology {
 public:
  struct LinkSpec {
    AsId a;
    AsId b;
    GeoPoint a_location;
    GeoPoint b_location;
    Relationship rel = Relationship::PeerToPeer;
    double bandwidth_mbps = kDefaultBandwidthMbps;
    std::optional<double> delay_ms;
  };

  /// Adds a link and its two interfaces; returns the link index.
  std::size_t add_link(const LinkSpec& spec);
  /// Registers an AS without links (it is dropped by prune/normalize).
  void add_as(AsId as);

  bool has_as(AsId as) const { return ases_.count(as) != 0; }
  std::size_t as_count() const { return ases_.size(); }
  std::size_t link_count() const { return links_.size(); }
  std::size_t interface_count() const;

  std::vector<AsId> as_ids() const;
  const std::vector<Interface>& interfaces(AsId as) const;
  const Interface* find_interface(AsId as, InterfaceId ifid) const;
  /// Throws UnknownInterface.
  const Interface& interface(AsId as, InterfaceId ifid) const;
  const std::vector<Link>& links() const { return links_; }

  /// Distinct neighbor ASes, ascending.
  std::vector<AsId> neighbors(AsId as) const;
  std::size_t degree(AsId as) const { return neighbors(as).size(); }

  double link_delay_ms(const Link& link) const;
  /// Delay of the link leaving through (as, egress).
  double egress_link_delay_ms(AsId as, InterfaceId egress) const;

  /// Intra-AS delay between two interfaces of `as`: the great-circle
  /// propagation delay unless overridden. Throws UnknownInterface.
  double intra_delay_ms(AsId as, InterfaceId a, InterfaceId b) const;
  void set_intra_delay(AsId as, InterfaceId a, InterfaceId b, double delay_ms);

  /// True iff (from_as, from_egress) peers with (to_as, to_ingress).
  bool linked(AsId from_as, InterfaceId from_egress, AsId to_as, InterfaceId to_ingress) const;
  LinkCheck link_check() const;

  /// Static info a hop crossing `as` from `ingress` to `egress` carries.
  StaticInfo hop_static_info(AsId as, std::optional<InterfaceId> ingress, InterfaceId egress) const;

  /// True iff the AS graph is connected (an empty graph counts as connected).
  bool connected() const;

 private:
  struct AsRecord {
    std::vector<Interface> interfaces;  // sorted by if_id
  };

  Interface& new_interface(AsId as, const GeoPoint& loc);

  std::map<AsId, AsRecord> ases_;
  std::vector<Link> links_;
  std::map<std::tuple<AsId, InterfaceId, InterfaceId>, double> intra_overrides_;
};

/// Parses the geo-rel line format `as1 as2 rel lat lon [bandwidth_mbps]`.
/// Throws ParseError(line) and DuplicateLink(line).
Topology load_georel(std::istream& in);
Topology load_georel_file(const std::string& path);
/// Writes one line per link using the a-side interface location.
void write_georel(std::ostream& out, const Topology& topo);

/// Removed ASes in removal order (the greedy trace) plus the result.
struct PruneResult {
  Topology topology;
  std::vector<AsId> removed;
  std::vector<std::size_t> removed_degree;  // degree at removal time
};

/// Greedily removes the minimum-degree AS (ties: smallest AsId) until at
/// most n remain, then drops isolated ASes.
PruneResult prune_to_top_n(const Topology& topo, std::size_t n);

struct InterfaceGroup {
  std::uint16_t group_id = 0;
  std::vector<InterfaceId> members;  // ascending
};

/// Greedy first-fit clustering by ascending interface id with a diameter
/// bound of `max_diameter_km`.
std::vector<InterfaceGroup> cluster_interface_groups(const Topology& topo, AsId as,
                                                     double max_diameter_km);

/// Interface-level graph used as the oracle substrate for delay optimality.
struct InterfaceGraph {
  struct Node {
    AsId as;
    InterfaceId if_id;
  };
  struct Edge {
    std::size_t u;
    std::size_t v;
    double weight_ms;
    bool intra;
  };

  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::map<std::pair<AsId, InterfaceId>, std::size_t> index;

  std::size_t node(AsId as, InterfaceId ifid) const { return index.at({as, ifid}); }
};

InterfaceGraph interface_graph(const Topology& topo);

struct SynthParams {
  std::size_t n_ases = 50;
  double avg_degree = 6.0;
  double geo_spread_km = 5000.0;
  std::uint64_t seed = 1;
};

/// Deterministic connected random topology. Each AS gets 1-8 points of
/// presence; every link sits at a PoP of one endpoint. Throws
/// InfeasibleParameters.
Topology synth_topology(const SynthParams& params);

}  // namespace irec
