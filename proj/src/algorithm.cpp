#include "irec/algorithm.hpp"

#include <algorithm>
#include <limits>

#include "irec/error.hpp"

namespace irec {

TopologyView::TopologyView(const Topology& topo, AsId local) : local_(local) {
  const auto& ifs = topo.interfaces(local);
  ifs_.reserve(ifs.size());
  egress_.reserve(ifs.size());
  for (const auto& itf : ifs) {
    ifs_.push_back(itf.if_id);
    EgressInfo e;
    e.neighbor = itf.peer_as;
    e.neighbor_if = itf.peer_if;
    e.link_delay_ms = topo.egress_link_delay_ms(local, itf.if_id);
    e.bandwidth_mbps = itf.link_bandwidth_mbps;
    egress_.push_back(e);
  }
  const std::size_t n = ifs_.size();
  intra_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = topo.intra_delay_ms(local, ifs_[i], ifs_[j]);
      intra_[i * n + j] = d;
      intra_[j * n + i] = d;
    }
  }
}

std::size_t TopologyView::slot(InterfaceId ifid) const {
  auto it = std::lower_bound(ifs_.begin(), ifs_.end(), ifid);
  if (it == ifs_.end() || *it != ifid) {
    throw Error(ErrorCode::UnknownInterface,
                "interface " + to_string(ifid) + " of AS " + to_string(local_));
  }
  return static_cast<std::size_t>(it - ifs_.begin());
}

bool TopologyView::has_interface(InterfaceId ifid) const {
  return std::binary_search(ifs_.begin(), ifs_.end(), ifid);
}

double TopologyView::intra_delay_ms(InterfaceId a, InterfaceId b) const {
  return intra_[slot(a) * ifs_.size() + slot(b)];
}

std::optional<InterfaceId> TopologyView::ingress_for(AsId remote_as, InterfaceId remote_egress) const {
  for (std::size_t i = 0; i < ifs_.size(); ++i) {
    if (egress_[i].neighbor == remote_as && egress_[i].neighbor_if == remote_egress) return ifs_[i];
  }
  return std::nullopt;
}

bool Candidate::visits(AsId as) const { return std::binary_search(ases.begin(), ases.end(), as); }

std::optional<Candidate> make_candidate(const Pcb& pcb, const Digest& digest, const TopologyView& view) {
  const HopEntry& last = pcb.last_hop();
  const auto ingress = view.ingress_for(last.as_id, last.egress_if);
  if (!ingress) return std::nullopt;

  Candidate c;
  c.pcb = &pcb;
  c.digest = digest;
  c.ingress = *ingress;
  c.hops = pcb.hops.size();
  c.created = pcb.creation_time;
  try {
    c.delay_ms = accumulated_delay(pcb);
  } catch (const Error&) {
    c.delay_ms.reset();
  }
  c.min_bandwidth_mbps = std::numeric_limits<double>::infinity();
  for (const auto& hop : pcb.hops) {
    if (hop.static_info.bandwidth_mbps) {
      c.min_bandwidth_mbps = std::min(c.min_bandwidth_mbps, *hop.static_info.bandwidth_mbps);
    }
  }
  c.ases = path_ases(pcb);
  std::sort(c.ases.begin(), c.ases.end());
  c.links = path_links(pcb, view.local_as());
  std::sort(c.links.begin(), c.links.end());
  c.links.erase(std::unique(c.links.begin(), c.links.end()), c.links.end());
  return c;
}

bool eligible(const Candidate& c, InterfaceId egress, const TopologyView& view) {
  const AsId next = view.neighbor(egress);
  return next != view.local_as() && !c.visits(next);
}

ExtendedMetrics extended_metrics(const Candidate& c, InterfaceId egress, const TopologyView& view) {
  ExtendedMetrics m;
  if (c.delay_ms) {
    m.delay_ms = *c.delay_ms + view.intra_delay_ms(c.ingress, egress) + view.link_delay_ms(egress);
  }
  m.hops = c.hops + 1;
  m.min_bandwidth_mbps = std::min(c.min_bandwidth_mbps, view.link_bandwidth_mbps(egress));
  return m;
}

}  // namespace irec
