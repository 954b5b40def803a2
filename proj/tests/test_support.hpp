#pragma once

#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "irec/algorithm.hpp"
#include "irec/crypto.hpp"
#include "irec/metrics.hpp"
#include "irec/pcb.hpp"
#include "irec/rac.hpp"
#include "irec/sim.hpp"
#include "irec/topology.hpp"

namespace irec::testing {

/// Line 1 - 2 - ... - n; each link sits at its own point, 100 km apart.
Topology line_topology(std::size_t n);

/// Five-AS three-criteria example. Ids: Src 1, X 2, Y 3, Z 4, Dst 5. Every
/// link has a 10 ms delay; all interfaces of an AS are co-located.
/// Bandwidths: Src-X 100, Src-Y 1000, X-Dst 600, Y-Z 500, X-Z 1000,
/// Y-X 1000, Z-Dst 1000.
Topology three_criteria_topology();
inline constexpr AsId kSrc{1}, kX{2}, kY{3}, kZ{4}, kDst{5};

/// Extend-then-optimize example: O (1) reaches M (2) over two links
/// (M if 1: 10 ms, M if 2: 12 ms); M if 3 leads to N (3) with 1 ms.
/// Intra-M delays 1->3 = 10 ms, 2->3 = 2 ms.
Topology extend_optimize_topology();
inline constexpr AsId kO{1}, kM{2}, kN{3};

/// Builds a signed PCB along `ases` (must be a path in `topo`, first link
/// used between consecutive ASes).
Pcb build_pcb(const Topology& topo, const std::vector<AsId>& ases, const Signer& signer, Round now = 0,
              Extensions exts = {}, Round validity = kDefaultValidityCap);

/// Same, following explicit egress interfaces from `origin` on.
Pcb build_pcb_via(const Topology& topo, AsId origin, const std::vector<InterfaceId>& egresses, const Signer& signer,
                  Round now = 0, Extensions exts = {}, Round validity = kDefaultValidityCap);

/// PCBs arriving at `local`, wrapped as algorithm candidates.
struct CandidateSet {
  std::vector<Pcb> pcbs;
  std::vector<Candidate> candidates;
};
CandidateSet make_candidates(const TopologyView& view, std::vector<Pcb> pcbs);

/// Hop distances from `src` (breadth-first search).
std::map<AsId, std::size_t> bfs_hops(const Topology& topo, AsId src);

/// Multi-source Dijkstra on the interface graph. Intra edges of
/// `skip_intra_of` are left out. Returns the distance per node index.
std::vector<double> interface_dijkstra(const InterfaceGraph& g, const std::vector<std::size_t>& sources,
                                       std::optional<AsId> skip_intra_of = std::nullopt);

struct EnumeratedPath {
  std::vector<AsId> ases;
  double delay_ms = 0.0;
  double min_bandwidth_mbps = 0.0;
};

/// Every loop-free interface-level path from src to dst, with the delay a
/// PCB along it accumulates (no intra delay at either end). Paths longer
/// than `max_ases` ASes are skipped.
std::vector<EnumeratedPath> enumerate_paths(const Topology& topo, AsId src, AsId dst,
                                            std::size_t max_ases = std::numeric_limits<std::size_t>::max());

/// Line-level helpers over the event log.
std::size_t duplicate_propagations(const EventLog& log);
/// PROPAGATE events without exactly one ACCEPT/REJECT of the emitted
/// digest at the receiver in the next round.
std::size_t unmatched_propagations(const EventLog& log, Round last_round);

/// kFanA reaches kFanLocal over `a_branches` two-hop branches through
/// fresh middle ASes (first link delay 1 + branch index, second 1 ms),
/// kFanB over `b_branches`; kFanLocal also links to kFanOut.
inline constexpr AsId kFanA{1}, kFanB{2}, kFanLocal{10}, kFanOut{900};
struct Fan {
  Topology topo;
  std::vector<std::vector<AsId>> a_paths, b_paths;

  Fan(std::size_t a_branches, std::size_t b_branches);
};

/// Ingress-database stand-in for RAC ticks.
struct Stored {
  std::vector<StoredPcb> items;

  void add(const Pcb& p);
  std::vector<const StoredPcb*> view() const;
};

struct RacHarness {
  AlgorithmStore store;
  AlgorithmCache cache;
  PathRegistry registry;
  EventLog log;

  std::vector<Submission> tick(RacInstance& rac, const Stored& s, const TopologyView& view);
};

/// One line per submission: rac, digest, ingress, egress interfaces.
std::string render(const std::vector<Submission>& subs);

/// Between one and six random simple paths from AS 1 to AS `nodes` over a
/// random connected graph.
TlfInput random_tlf_input(std::mt19937_64& rng, int nodes);
std::size_t union_link_count(const TlfInput& in);

}  // namespace irec::testing
