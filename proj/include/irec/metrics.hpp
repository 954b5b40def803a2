#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irec/sim.hpp"

namespace irec {

struct Pop {
  AsId as;
  GeoPoint location;

  friend bool operator==(const Pop&, const Pop&) = default;
};

inline constexpr double kPopMergeKm = 1.0;

/// One PoP per distinct interface location of each AS; locations within
/// 1 km of an earlier PoP of the same AS merge into it.
std::vector<Pop> enumerate_pops(const Topology& topo);

/// Registered paths of one algorithm between AS pairs, with the geographic
/// end points of each path, for PoP-pair delay queries.
class PopDelayIndex {
 public:
  PopDelayIndex(const SimResult& result, const std::string& alg);

  /// Minimum over paths between the two ASes of path delay plus the
  /// intra-AS correction at each end. nullopt when no path exists.
  std::optional<double> min_delay(const Pop& a, const Pop& b) const;

 private:
  struct End {
    GeoPoint low_end;   // location at the smaller AS id
    GeoPoint high_end;  // location at the larger AS id
    double delay_ms;
  };
  std::map<std::pair<AsId, AsId>, std::vector<End>> paths_;
};

/// Throws std::invalid_argument when both PoPs belong to the same AS.
std::optional<double> min_pop_delay(const SimResult& result, const std::string& alg, const Pop& a, const Pop& b);

inline constexpr double kUnreachableRatio = std::numeric_limits<double>::infinity();

struct DelayRatioRow {
  Pop a;
  Pop b;
  std::string alg;
  double ratio = 1.0;  // kUnreachableRatio when only the baseline reaches
};

std::vector<DelayRatioRow> delay_ratio_table(const SimResult& result, const std::string& alg,
                                             const std::string& baseline = "1SP");

/// AS-level path set between two ASes; each path is its list of links.
struct TlfInput {
  AsId s;
  AsId t;
  std::vector<std::vector<AsLink>> paths;
};

/// Minimum number of links whose removal hits every path (exact search).
std::size_t tlf(const TlfInput& input);
/// Exhaustive k-subset enumeration. Throws TooLarge above 20 union links.
std::size_t tlf_bruteforce(const TlfInput& input);
inline constexpr std::size_t kBruteforceMaxLinks = 20;
/// Unit-capacity s-t max-flow over the union of the path links. An upper
/// bound of tlf, equal to it when no two paths cross.
std::size_t union_min_cut(const TlfInput& input);
/// Size of a greedy set of pairwise link-disjoint paths; a lower bound of tlf.
std::size_t disjoint_packing(const TlfInput& input);

/// Links of an AS sequence (consecutive pairs).
std::vector<AsLink> links_of(const std::vector<AsId>& ases);

struct TlfRow {
  AsId s;  // s < t
  AsId t;
  std::string alg;
  std::size_t tlf = 0;
  std::size_t paths = 0;
};

/// One row per (AS pair with at least one path in any algorithm, algorithm).
/// PD contributes the pairs it ran on.
std::vector<TlfRow> tlf_table(const SimResult& result);

struct PcbCountRow {
  std::string alg;
  AsId as;
  InterfaceId interface;
  Round round = 0;
  std::size_t count = 0;
};

/// PROPAGATE events per (emitter, AS, interface, round), zero rows included.
std::vector<PcbCountRow> pcb_count_distribution(const SimResult& result);
/// Same, reading the events from an events.log stream instead of result.log.
std::vector<PcbCountRow> pcb_count_distribution(const SimResult& result, std::istream& events);

void write_delay_ratio_csv(std::ostream& out, const std::vector<DelayRatioRow>& rows);
void write_tlf_csv(std::ostream& out, const std::vector<TlfRow>& rows);
void write_pcb_counts_csv(std::ostream& out, const std::vector<PcbCountRow>& rows);

/// Empirical CDF per series: columns series,value,cdf with values sorted.
void write_cdf_csv(std::ostream& out, const std::map<std::string, std::vector<double>>& series);

}  // namespace irec
