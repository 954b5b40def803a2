#include "irec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/dynamic_bitset.hpp>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/edmonds_karp_max_flow.hpp>

#include "irec/error.hpp"

namespace irec {

std::vector<Pop> enumerate_pops(const Topology& topo) {
  std::vector<Pop> pops;
  for (AsId as : topo.as_ids()) {
    const std::size_t first = pops.size();
    for (const auto& itf : topo.interfaces(as)) {
      const bool merged = std::any_of(pops.begin() + static_cast<std::ptrdiff_t>(first), pops.end(), [&](const Pop& p) {
        return haversine_km(p.location, itf.location) <= kPopMergeKm;
      });
      if (!merged) pops.push_back({as, itf.location});
    }
  }
  return pops;
}

PopDelayIndex::PopDelayIndex(const SimResult& result, const std::string& alg) {
  for (const auto& r : result.registry) {
    if (r.rac != alg || !r.delay_ms || r.origin == r.as) continue;
    End e;
    e.delay_ms = *r.delay_ms;
    if (r.origin < r.as) {
      e.low_end = r.origin_location;
      e.high_end = r.local_location;
    } else {
      e.low_end = r.local_location;
      e.high_end = r.origin_location;
    }
    paths_[{std::min(r.origin, r.as), std::max(r.origin, r.as)}].push_back(e);
  }
}

std::optional<double> PopDelayIndex::min_delay(const Pop& a, const Pop& b) const {
  if (a.as == b.as) throw std::invalid_argument("PoPs of the same AS");
  const Pop& lo = a.as < b.as ? a : b;
  const Pop& hi = a.as < b.as ? b : a;
  auto it = paths_.find({lo.as, hi.as});
  if (it == paths_.end()) return std::nullopt;
  std::optional<double> best;
  for (const End& e : it->second) {
    const double d = propagation_delay_ms(lo.location, e.low_end) + e.delay_ms +
                     propagation_delay_ms(e.high_end, hi.location);
    if (!best || d < *best) best = d;
  }
  return best;
}

std::optional<double> min_pop_delay(const SimResult& result, const std::string& alg, const Pop& a, const Pop& b) {
  return PopDelayIndex(result, alg).min_delay(a, b);
}

std::vector<DelayRatioRow> delay_ratio_table(const SimResult& result, const std::string& alg,
                                             const std::string& baseline) {
  const auto pops = enumerate_pops(*result.topology);
  const PopDelayIndex algs(result, alg);
  const PopDelayIndex base(result, baseline);
  std::vector<DelayRatioRow> rows;
  for (std::size_t i = 0; i < pops.size(); ++i) {
    for (std::size_t j = i + 1; j < pops.size(); ++j) {
      if (pops[i].as == pops[j].as) continue;
      const auto b = base.min_delay(pops[i], pops[j]);
      if (!b) continue;
      const auto d = algs.min_delay(pops[i], pops[j]);
      double ratio = kUnreachableRatio;
      if (d) ratio = *b == 0.0 ? (*d == 0.0 ? 1.0 : kUnreachableRatio) : *d / *b;
      rows.push_back({pops[i], pops[j], alg, ratio});
    }
  }
  return rows;
}

std::vector<AsLink> links_of(const std::vector<AsId>& ases) {
  std::vector<AsLink> links;
  for (std::size_t i = 1; i < ases.size(); ++i) links.emplace_back(ases[i - 1], ases[i]);
  return links;
}

namespace {

using Bits = boost::dynamic_bitset<>;

struct Indexed {
  std::vector<AsLink> links;  // union, sorted
  std::vector<Bits> paths;    // each over `links`
};

Indexed index_paths(const TlfInput& in) {
  Indexed ix;
  std::set<AsLink> all;
  for (const auto& p : in.paths) all.insert(p.begin(), p.end());
  ix.links.assign(all.begin(), all.end());
  for (const auto& p : in.paths) {
    Bits b(ix.links.size());
    for (const auto& l : p) {
      b.set(static_cast<std::size_t>(std::lower_bound(ix.links.begin(), ix.links.end(), l) - ix.links.begin()));
    }
    ix.paths.push_back(std::move(b));
  }
  return ix;
}

// Drops duplicates and every path that contains another one: hitting the
// smaller path hits the larger.
std::vector<Bits> minimal_paths(std::vector<Bits> paths) {
  std::sort(paths.begin(), paths.end(), [](const Bits& a, const Bits& b) {
    return a.count() != b.count() ? a.count() < b.count() : a < b;
  });
  std::vector<Bits> keep;
  for (const auto& p : paths) {
    if (std::none_of(keep.begin(), keep.end(), [&](const Bits& k) { return k.is_subset_of(p); })) keep.push_back(p);
  }
  return keep;
}

std::size_t packing_bound(const std::vector<Bits>& paths, const std::vector<bool>& hit) {
  std::size_t n = 0;
  Bits used(paths.empty() ? 0 : paths.front().size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (hit[i] || paths[i].intersects(used)) continue;
    used |= paths[i];
    ++n;
  }
  return n;
}

void hitting_search(const std::vector<Bits>& paths, std::vector<bool>& hit, std::size_t chosen, std::size_t& best) {
  if (chosen + packing_bound(paths, hit) >= best) return;
  std::size_t first = paths.size();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!hit[i]) {
      first = i;
      break;
    }
  }
  if (first == paths.size()) {
    best = chosen;
    return;
  }
  const Bits& p = paths[first];
  for (std::size_t l = p.find_first(); l != Bits::npos; l = p.find_next(l)) {
    std::vector<std::size_t> newly;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (!hit[i] && paths[i].test(l)) {
        hit[i] = true;
        newly.push_back(i);
      }
    }
    hitting_search(paths, hit, chosen + 1, best);
    for (std::size_t i : newly) hit[i] = false;
  }
}

}  // namespace

std::size_t tlf(const TlfInput& input) {
  if (input.paths.empty()) return 0;
  const auto paths = minimal_paths(index_paths(input).paths);
  if (paths.front().none()) return 0;
  std::vector<bool> hit(paths.size(), false);
  std::size_t best = paths.size();  // one link per path always works
  hitting_search(paths, hit, 0, best);
  return best;
}

std::size_t tlf_bruteforce(const TlfInput& input) {
  if (input.paths.empty()) return 0;
  const Indexed ix = index_paths(input);
  const std::size_t n = ix.links.size();
  if (n > kBruteforceMaxLinks) {
    throw Error(ErrorCode::TooLarge, std::to_string(n) + " union links exceed " + std::to_string(kBruteforceMaxLinks));
  }
  std::vector<std::uint32_t> masks;
  for (const auto& p : ix.paths) masks.push_back(static_cast<std::uint32_t>(p.to_ulong()));
  if (std::any_of(masks.begin(), masks.end(), [](std::uint32_t m) { return m == 0; })) return 0;
  std::size_t best = n;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    const auto k = static_cast<std::size_t>(std::popcount(s));
    if (k >= best) continue;
    if (std::all_of(masks.begin(), masks.end(), [&](std::uint32_t m) { return (m & s) != 0; })) best = k;
  }
  return best;
}

std::size_t union_min_cut(const TlfInput& input) {
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, long,
                      boost::property<boost::edge_residual_capacity_t, long,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;
  std::map<AsId, std::size_t> node;
  auto id = [&](AsId a) {
    auto [it, fresh] = node.emplace(a, node.size());
    return it->second;
  };
  id(input.s);
  id(input.t);
  std::set<AsLink> links;
  for (const auto& p : input.paths) links.insert(p.begin(), p.end());
  for (const auto& l : links) {
    id(l.low);
    id(l.high);
  }
  Graph g(node.size());
  auto cap = boost::get(boost::edge_capacity, g);
  auto rev = boost::get(boost::edge_reverse, g);
  auto add_arc = [&](std::size_t u, std::size_t v) {
    auto e = boost::add_edge(u, v, g).first;
    auto r = boost::add_edge(v, u, g).first;
    cap[e] = 1;
    cap[r] = 0;
    rev[e] = r;
    rev[r] = e;
  };
  for (const auto& l : links) {
    add_arc(node[l.low], node[l.high]);
    add_arc(node[l.high], node[l.low]);
  }
  if (input.s == input.t) return 0;
  return static_cast<std::size_t>(boost::edmonds_karp_max_flow(g, node[input.s], node[input.t]));
}

std::size_t disjoint_packing(const TlfInput& input) {
  if (input.paths.empty()) return 0;
  const auto paths = minimal_paths(index_paths(input).paths);
  return packing_bound(paths, std::vector<bool>(paths.size(), false));
}

std::vector<TlfRow> tlf_table(const SimResult& result) {
  using Pair = std::pair<AsId, AsId>;
  std::map<std::string, std::map<Pair, std::vector<std::vector<AsLink>>>> by_alg;
  std::set<Pair> pairs;
  for (const auto& r : result.registry) {
    if (r.origin == r.as) continue;
    const Pair key{std::min(r.origin, r.as), std::max(r.origin, r.as)};
    by_alg[r.rac][key].push_back(links_of(r.ases));
    pairs.insert(key);
  }
  for (const auto& p : result.pd) {
    const Pair key{std::min(p.source, p.target), std::max(p.source, p.target)};
    auto& list = by_alg["PD"][key];
    for (const auto& path : p.paths) list.push_back(links_of(path));
    pairs.insert(key);
  }
  std::vector<TlfRow> rows;
  for (const auto& key : pairs) {
    for (const auto& alg : result.algorithms) {
      TlfRow row{key.first, key.second, alg, 0, 0};
      auto a = by_alg.find(alg);
      if (a != by_alg.end()) {
        auto it = a->second.find(key);
        if (it != a->second.end()) {
          row.paths = it->second.size();
          row.tlf = tlf({key.first, key.second, it->second});
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

using PcbCounts = std::map<std::tuple<std::string, AsId, InterfaceId, Round>, std::size_t>;

void count_propagation(PcbCounts& counts, const Event& e) {
  if (e.type != EventType::Propagate) return;
  const std::string alg = detail_field(e.detail, "rac");
  const std::string ifs = detail_field(e.detail, "if");
  counts[{alg, e.as, InterfaceId(static_cast<std::uint16_t>(std::stoul(ifs))), e.round}]++;
}

std::vector<PcbCountRow> count_rows(const SimResult& result, const PcbCounts& counts) {
  std::vector<std::string> algs = result.emitters;
  for (const auto& [key, n] : counts) {
    if (std::find(algs.begin(), algs.end(), std::get<0>(key)) == algs.end()) algs.push_back(std::get<0>(key));
  }
  std::vector<PcbCountRow> rows;
  const Topology& topo = *result.topology;
  for (const auto& alg : algs) {
    for (AsId as : topo.as_ids()) {
      for (const auto& itf : topo.interfaces(as)) {
        for (Round r = 0; r < result.rounds; ++r) {
          auto it = counts.find({alg, as, itf.if_id, r});
          rows.push_back({alg, as, itf.if_id, r, it == counts.end() ? 0 : it->second});
        }
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<PcbCountRow> pcb_count_distribution(const SimResult& result) {
  PcbCounts counts;
  for (const auto& e : result.log.events()) count_propagation(counts, e);
  return count_rows(result, counts);
}

std::vector<PcbCountRow> pcb_count_distribution(const SimResult& result, std::istream& events) {
  PcbCounts counts;
  EventLog::scan(events, [&](const Event& e) { count_propagation(counts, e); });
  return count_rows(result, counts);
}

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

void write_delay_ratio_csv(std::ostream& out, const std::vector<DelayRatioRow>& rows) {
  out << "pop_a_as,pop_a_lat,pop_a_lon,pop_b_as,pop_b_lat,pop_b_lon,alg,ratio\n";
  for (const auto& r : rows) {
    out << r.a.as.value << ',' << fmt_double(r.a.location.lat_deg) << ',' << fmt_double(r.a.location.lon_deg) << ','
        << r.b.as.value << ',' << fmt_double(r.b.location.lat_deg) << ',' << fmt_double(r.b.location.lon_deg) << ','
        << r.alg << ',' << fmt_double(r.ratio) << '\n';
  }
}

void write_tlf_csv(std::ostream& out, const std::vector<TlfRow>& rows) {
  out << "src_as,dst_as,alg,tlf\n";
  for (const auto& r : rows) out << r.s.value << ',' << r.t.value << ',' << r.alg << ',' << r.tlf << '\n';
}

void write_pcb_counts_csv(std::ostream& out, const std::vector<PcbCountRow>& rows) {
  out << "alg,as,interface,round,count\n";
  for (const auto& r : rows) {
    out << r.alg << ',' << r.as.value << ',' << r.interface.value << ',' << r.round << ',' << r.count << '\n';
  }
}

void write_cdf_csv(std::ostream& out, const std::map<std::string, std::vector<double>>& series) {
  out << "series,value,cdf\n";
  for (const auto& [name, values] : series) {
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << name << ',' << fmt_double(v[i]) << ','
          << fmt_double(static_cast<double>(i + 1) / static_cast<double>(v.size())) << '\n';
    }
  }
}

}  // namespace irec
