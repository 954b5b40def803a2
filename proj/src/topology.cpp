#include "irec/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <tuple>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "irec/error.hpp"

namespace irec {

std::string to_string(Relationship rel) {
  switch (rel) {
    case Relationship::ProviderToCustomer: return "p2c";
    case Relationship::CustomerToProvider: return "c2p";
    case Relationship::PeerToPeer: return "p2p";
  }
  return "p2p";
}

Interface& Topology::new_interface(AsId as, const GeoPoint& loc) {
  auto& rec = ases_[as];
  const auto next = rec.interfaces.empty() ? 1 : rec.interfaces.back().if_id.value + 1;
  if (next > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::InfeasibleParameters, "AS " + to_string(as) + " exceeds 65535 interfaces");
  }
  Interface itf;
  itf.owner = as;
  itf.if_id = InterfaceId(static_cast<std::uint16_t>(next));
  itf.location = loc;
  rec.interfaces.push_back(itf);
  return rec.interfaces.back();
}

std::size_t Topology::add_link(const LinkSpec& spec) {
  if (!spec.a.valid() || !spec.b.valid()) throw std::invalid_argument("AS ids must be nonzero");
  if (spec.a == spec.b) throw std::invalid_argument("self-loop link");
  const std::size_t index = links_.size();
  Interface& ia = new_interface(spec.a, spec.a_location);
  const InterfaceId a_if = ia.if_id;
  Interface& ib = new_interface(spec.b, spec.b_location);
  const InterfaceId b_if = ib.if_id;

  ib.peer_as = spec.a;
  ib.peer_if = a_if;
  ib.link_bandwidth_mbps = spec.bandwidth_mbps;
  ib.link_index = index;
  // a != b, so the two interfaces live in different vectors and `ia` is
  // still valid here.
  ia.peer_as = spec.b;
  ia.peer_if = b_if;
  ia.link_bandwidth_mbps = spec.bandwidth_mbps;
  ia.link_index = index;

  Link link;
  link.a_as = spec.a;
  link.a_if = a_if;
  link.b_as = spec.b;
  link.b_if = b_if;
  link.rel = spec.rel;
  link.bandwidth_mbps = spec.bandwidth_mbps;
  link.delay_ms = spec.delay_ms;
  links_.push_back(link);
  return index;
}

void Topology::add_as(AsId as) { ases_[as]; }

std::size_t Topology::interface_count() const {
  std::size_t n = 0;
  for (const auto& [as, rec] : ases_) n += rec.interfaces.size();
  return n;
}

std::vector<AsId> Topology::as_ids() const {
  std::vector<AsId> out;
  out.reserve(ases_.size());
  for (const auto& [as, rec] : ases_) out.push_back(as);
  return out;
}

const std::vector<Interface>& Topology::interfaces(AsId as) const {
  auto it = ases_.find(as);
  if (it == ases_.end()) throw Error(ErrorCode::UnknownAs, "AS " + to_string(as));
  return it->second.interfaces;
}

const Interface* Topology::find_interface(AsId as, InterfaceId ifid) const {
  auto it = ases_.find(as);
  if (it == ases_.end()) return nullptr;
  const auto& v = it->second.interfaces;
  auto pos = std::lower_bound(v.begin(), v.end(), ifid,
                              [](const Interface& i, InterfaceId id) { return i.if_id < id; });
  if (pos == v.end() || pos->if_id != ifid) return nullptr;
  return &*pos;
}

const Interface& Topology::interface(AsId as, InterfaceId ifid) const {
  const Interface* itf = find_interface(as, ifid);
  if (!itf) {
    throw Error(ErrorCode::UnknownInterface,
                "interface " + to_string(ifid) + " of AS " + to_string(as));
  }
  return *itf;
}

std::vector<AsId> Topology::neighbors(AsId as) const {
  std::set<AsId> out;
  for (const auto& itf : interfaces(as)) out.insert(itf.peer_as);
  return {out.begin(), out.end()};
}

double Topology::link_delay_ms(const Link& link) const {
  if (link.delay_ms) return *link.delay_ms;
  return propagation_delay_ms(interface(link.a_as, link.a_if).location,
                              interface(link.b_as, link.b_if).location);
}

double Topology::egress_link_delay_ms(AsId as, InterfaceId egress) const {
  return link_delay_ms(links_[interface(as, egress).link_index]);
}

double Topology::intra_delay_ms(AsId as, InterfaceId a, InterfaceId b) const {
  const Interface& ia = interface(as, a);
  const Interface& ib = interface(as, b);
  if (a == b) return 0.0;
  const auto key = a < b ? std::make_tuple(as, a, b) : std::make_tuple(as, b, a);
  if (auto it = intra_overrides_.find(key); it != intra_overrides_.end()) return it->second;
  return propagation_delay_ms(ia.location, ib.location);
}

void Topology::set_intra_delay(AsId as, InterfaceId a, InterfaceId b, double delay_ms) {
  interface(as, a);
  interface(as, b);
  if (a == b) return;
  intra_overrides_[a < b ? std::make_tuple(as, a, b) : std::make_tuple(as, b, a)] = delay_ms;
}

bool Topology::linked(AsId from_as, InterfaceId from_egress, AsId to_as,
                      InterfaceId to_ingress) const {
  const Interface* itf = find_interface(from_as, from_egress);
  return itf && itf->peer_as == to_as && itf->peer_if == to_ingress;
}

LinkCheck Topology::link_check() const {
  return [this](AsId fa, InterfaceId fe, AsId ta, InterfaceId ti) { return linked(fa, fe, ta, ti); };
}

StaticInfo Topology::hop_static_info(AsId as, std::optional<InterfaceId> ingress,
                                     InterfaceId egress) const {
  const Interface& out = interface(as, egress);
  StaticInfo info;
  info.link_delay_ms = link_delay_ms(links_[out.link_index]);
  if (ingress) info.intra_delay_ms = intra_delay_ms(as, *ingress, egress);
  info.bandwidth_mbps = out.link_bandwidth_mbps;
  info.location = out.location;
  return info;
}

bool Topology::connected() const {
  if (ases_.empty()) return true;
  std::set<AsId> seen{ases_.begin()->first};
  std::queue<AsId> todo;
  todo.push(ases_.begin()->first);
  while (!todo.empty()) {
    const AsId cur = todo.front();
    todo.pop();
    for (const auto& itf : ases_.at(cur).interfaces) {
      if (seen.insert(itf.peer_as).second) todo.push(itf.peer_as);
    }
  }
  return seen.size() == ases_.size();
}

// ---------------------------------------------------------------------------
// geo-rel

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Topology load_georel(std::istream& in) {
  Topology topo;
  std::set<std::tuple<AsId, AsId, double, double>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 5 && tokens.size() != 6) {
      throw ParseError(line_no, "expected 'as1 as2 rel lat lon [bandwidth_mbps]'");
    }
    std::uint64_t a = 0, b = 0;
    if (!parse_number(tokens[0], a) || a == 0) throw ParseError(line_no, "bad AS id '" + std::string(tokens[0]) + "'");
    if (!parse_number(tokens[1], b) || b == 0) throw ParseError(line_no, "bad AS id '" + std::string(tokens[1]) + "'");
    if (a == b) throw ParseError(line_no, "self-loop link");

    Relationship rel;
    if (tokens[2] == "p2c") rel = Relationship::ProviderToCustomer;
    else if (tokens[2] == "c2p") rel = Relationship::CustomerToProvider;
    else if (tokens[2] == "p2p") rel = Relationship::PeerToPeer;
    else throw ParseError(line_no, "unknown relationship '" + std::string(tokens[2]) + "'");

    GeoPoint loc;
    if (!parse_number(tokens[3], loc.lat_deg) || loc.lat_deg < -90.0 || loc.lat_deg > 90.0) {
      throw ParseError(line_no, "bad latitude '" + std::string(tokens[3]) + "'");
    }
    if (!parse_number(tokens[4], loc.lon_deg) || loc.lon_deg < -180.0 || loc.lon_deg > 180.0) {
      throw ParseError(line_no, "bad longitude '" + std::string(tokens[4]) + "'");
    }
    double bw = kDefaultBandwidthMbps;
    if (tokens.size() == 6 && (!parse_number(tokens[5], bw) || !(bw > 0.0) || !std::isfinite(bw))) {
      throw ParseError(line_no, "bad bandwidth '" + std::string(tokens[5]) + "'");
    }

    const AsId x(std::min(a, b));
    const AsId y(std::max(a, b));
    if (!seen.emplace(x, y, loc.lat_deg, loc.lon_deg).second) {
      throw Error(ErrorCode::DuplicateLink, "line " + std::to_string(line_no) + ": duplicate link " +
                                                std::to_string(a) + "-" + std::to_string(b));
    }
    Topology::LinkSpec spec;
    spec.a = AsId(a);
    spec.b = AsId(b);
    spec.a_location = loc;
    spec.b_location = loc;
    spec.rel = rel;
    spec.bandwidth_mbps = bw;
    topo.add_link(spec);
  }
  return topo;
}

Topology load_georel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return load_georel(in);
}

void write_georel(std::ostream& out, const Topology& topo) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  for (const auto& link : topo.links()) {
    const GeoPoint& loc = topo.interface(link.a_as, link.a_if).location;
    buf << link.a_as.value << ' ' << link.b_as.value << ' ' << to_string(link.rel) << ' '
        << loc.lat_deg << ' ' << loc.lon_deg << ' ' << link.bandwidth_mbps << '\n';
  }
  out << buf.str();
}

// ---------------------------------------------------------------------------
// pruning

PruneResult prune_to_top_n(const Topology& topo, std::size_t n) {
  if (n == 0) throw std::invalid_argument("prune target must be >= 1");
  std::map<AsId, std::map<AsId, std::size_t>> adj;  // neighbor -> parallel link count
  for (AsId as : topo.as_ids()) adj[as];
  for (const auto& link : topo.links()) {
    ++adj[link.a_as][link.b_as];
    ++adj[link.b_as][link.a_as];
  }
  std::set<std::pair<std::size_t, AsId>> order;
  for (const auto& [as, nb] : adj) order.emplace(nb.size(), as);

  PruneResult result;
  std::set<AsId> removed;
  while (order.size() > n) {
    const auto [deg, victim] = *order.begin();
    order.erase(order.begin());
    result.removed.push_back(victim);
    result.removed_degree.push_back(deg);
    removed.insert(victim);
    for (const auto& [nb, count] : adj[victim]) {
      auto& nb_adj = adj[nb];
      order.erase({nb_adj.size(), nb});
      nb_adj.erase(victim);
      order.emplace(nb_adj.size(), nb);
    }
    adj.erase(victim);
  }

  // Rebuild in original link order so surviving interface ids stay stable
  // when nothing is removed.
  std::map<std::pair<AsId, InterfaceId>, InterfaceId> renumber;
  for (const auto& link : topo.links()) {
    if (removed.count(link.a_as) || removed.count(link.b_as)) continue;
    Topology::LinkSpec spec;
    spec.a = link.a_as;
    spec.b = link.b_as;
    spec.a_location = topo.interface(link.a_as, link.a_if).location;
    spec.b_location = topo.interface(link.b_as, link.b_if).location;
    spec.rel = link.rel;
    spec.bandwidth_mbps = link.bandwidth_mbps;
    spec.delay_ms = link.delay_ms;
    const std::size_t idx = result.topology.add_link(spec);
    const Link& nl = result.topology.links()[idx];
    renumber[{link.a_as, link.a_if}] = nl.a_if;
    renumber[{link.b_as, link.b_if}] = nl.b_if;
  }
  // Carry explicit intra-delay overrides over to the renumbered interfaces.
  for (AsId as : result.topology.as_ids()) {
    const auto& old_ifs = topo.interfaces(as);
    for (std::size_t i = 0; i < old_ifs.size(); ++i) {
      for (std::size_t j = i + 1; j < old_ifs.size(); ++j) {
        auto ia = renumber.find({as, old_ifs[i].if_id});
        auto ib = renumber.find({as, old_ifs[j].if_id});
        if (ia == renumber.end() || ib == renumber.end()) continue;
        const double d = topo.intra_delay_ms(as, old_ifs[i].if_id, old_ifs[j].if_id);
        if (d != propagation_delay_ms(old_ifs[i].location, old_ifs[j].location)) {
          result.topology.set_intra_delay(as, ia->second, ib->second, d);
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// interface groups

std::vector<InterfaceGroup> cluster_interface_groups(const Topology& topo, AsId as,
                                                     double max_diameter_km) {
  if (!(max_diameter_km > 0.0)) throw std::invalid_argument("group diameter must be positive");
  std::vector<InterfaceGroup> groups;
  for (const auto& itf : topo.interfaces(as)) {
    bool placed = false;
    for (auto& group : groups) {
      const bool fits = std::all_of(group.members.begin(), group.members.end(), [&](InterfaceId m) {
        return haversine_km(topo.interface(as, m).location, itf.location) <= max_diameter_km;
      });
      if (fits) {
        group.members.push_back(itf.if_id);
        placed = true;
        break;
      }
    }
    if (!placed) {
      InterfaceGroup g;
      g.group_id = static_cast<std::uint16_t>(groups.size() + 1);
      g.members.push_back(itf.if_id);
      groups.push_back(std::move(g));
    }
  }
  return groups;
}

// ---------------------------------------------------------------------------
// interface graph

InterfaceGraph interface_graph(const Topology& topo) {
  InterfaceGraph g;
  for (AsId as : topo.as_ids()) {
    for (const auto& itf : topo.interfaces(as)) {
      g.index[{as, itf.if_id}] = g.nodes.size();
      g.nodes.push_back({as, itf.if_id});
    }
  }
  for (const auto& link : topo.links()) {
    g.edges.push_back({g.node(link.a_as, link.a_if), g.node(link.b_as, link.b_if),
                       topo.link_delay_ms(link), false});
  }
  for (AsId as : topo.as_ids()) {
    const auto& ifs = topo.interfaces(as);
    for (std::size_t i = 0; i < ifs.size(); ++i) {
      for (std::size_t j = i + 1; j < ifs.size(); ++j) {
        g.edges.push_back({g.node(as, ifs[i].if_id), g.node(as, ifs[j].if_id),
                           topo.intra_delay_ms(as, ifs[i].if_id, ifs[j].if_id), true});
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// synthetic topologies

namespace {

constexpr double kKmPerDegree = 111.195;

GeoPoint offset_point(const GeoPoint& base, double dx_km, double dy_km) {
  GeoPoint p;
  p.lat_deg = std::clamp(base.lat_deg + dy_km / kKmPerDegree, -85.0, 85.0);
  const double scale = std::max(0.2, std::cos(p.lat_deg * 3.14159265358979323846 / 180.0));
  p.lon_deg = std::clamp(base.lon_deg + dx_km / (kKmPerDegree * scale), -180.0, 180.0);
  return p;
}

}  // namespace

Topology synth_topology(const SynthParams& params) {
  const std::size_t n = params.n_ases;
  if (n < 2) throw Error(ErrorCode::InfeasibleParameters, "need at least 2 ASes");
  if (!(params.avg_degree > 0.0) || !std::isfinite(params.avg_degree)) {
    throw Error(ErrorCode::InfeasibleParameters, "average degree must be positive");
  }
  if (!(params.geo_spread_km > 0.0) || !std::isfinite(params.geo_spread_km)) {
    throw Error(ErrorCode::InfeasibleParameters, "geographic spread must be positive");
  }
  if (params.avg_degree > static_cast<double>(n - 1)) {
    throw Error(ErrorCode::InfeasibleParameters,
                "average degree exceeds n-1 for a simple graph of " + std::to_string(n) + " ASes");
  }

  boost::random::mt19937_64 rng(params.seed);
  const double half = params.geo_spread_km / 2.0;
  boost::random::uniform_real_distribution<double> center_dist(-half, half);
  boost::random::uniform_real_distribution<double> pop_dist(-half / 3.0, half / 3.0);
  boost::random::uniform_int_distribution<int> pop_count(1, 8);
  const GeoPoint origin{30.0, 10.0};

  std::vector<std::vector<GeoPoint>> pops(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint center = offset_point(origin, center_dist(rng), center_dist(rng));
    const int k = pop_count(rng);
    pops[i].push_back(center);
    for (int p = 1; p < k; ++p) pops[i].push_back(offset_point(center, pop_dist(rng), pop_dist(rng)));
  }

  static constexpr double kBandwidths[] = {400.0, 1000.0, 2500.0, 10000.0};
  boost::random::uniform_int_distribution<int> bw_dist(0, 3);
  boost::random::uniform_int_distribution<int> coin(0, 1);

  Topology topo;
  std::set<std::pair<std::size_t, std::size_t>> edges;
  auto connect = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    if (a == b || !edges.emplace(a, b).second) return false;
    std::size_t best_pa = 0, best_pb = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t pa = 0; pa < pops[a].size(); ++pa) {
      for (std::size_t pb = 0; pb < pops[b].size(); ++pb) {
        const double d = haversine_km(pops[a][pa], pops[b][pb]);
        if (d < best) {
          best = d;
          best_pa = pa;
          best_pb = pb;
        }
      }
    }
    const GeoPoint loc = coin(rng) ? pops[a][best_pa] : pops[b][best_pb];
    Topology::LinkSpec spec;
    spec.a = AsId(a + 1);
    spec.b = AsId(b + 1);
    spec.a_location = loc;
    spec.b_location = loc;
    spec.rel = Relationship::PeerToPeer;
    spec.bandwidth_mbps = kBandwidths[bw_dist(rng)];
    topo.add_link(spec);
    return true;
  };

  for (std::size_t i = 1; i < n; ++i) {
    boost::random::uniform_int_distribution<std::size_t> parent(0, i - 1);
    connect(parent(rng), i);
  }
  const std::size_t max_edges = n * (n - 1) / 2;
  const auto target = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * params.avg_degree / 2.0)), n - 1,
      max_edges);
  boost::random::uniform_int_distribution<std::size_t> any(0, n - 1);
  std::size_t attempts = 0;
  while (edges.size() < target && attempts < 1000 * target) {
    ++attempts;
    connect(any(rng), any(rng));
  }
  return topo;
}

}  // namespace irec
