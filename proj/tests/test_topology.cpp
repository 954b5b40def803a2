#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "irec/error.hpp"
#include "irec/geo.hpp"
#include "irec/topology.hpp"
#include "test_support.hpp"

using namespace irec;

namespace {

Topology parse(const std::string& text) {
  std::istringstream in(text);
  return load_georel(in);
}

Topology star(std::size_t leaves) {
  Topology t;
  for (std::size_t i = 1; i <= leaves; ++i) {
    Topology::LinkSpec s;
    s.a = AsId(100);
    s.b = AsId(i);
    t.add_link(s);
  }
  return t;
}

// Point `km` east of (0, 0) along the equator.
GeoPoint east(double km) { return GeoPoint{0.0, km / kEarthRadiusKm * 180.0 / std::numbers::pi}; }

}  // namespace

TEST(Geo, Haversine) {
  const GeoPoint a{0, 0};
  EXPECT_DOUBLE_EQ(haversine_km(a, a), 0.0);
  EXPECT_NEAR(haversine_km(a, {90, 0}), 10007.54, 0.01);
  EXPECT_NEAR(haversine_km(a, {0, 180}), 20015.09, 0.01);
}

TEST(Geo, PropagationDelay) {
  EXPECT_DOUBLE_EQ(propagation_delay_ms({1, 1}, {1, 1}), 0.0);
  EXPECT_NEAR(propagation_delay_ms(GeoPoint{0, 0}, east(1000.0)), 5.003, 0.001);
  EXPECT_NEAR(propagation_delay_ms({0, 0}, {90, 0}), 50.07, 0.05);
}

TEST(Geo, HaversineProperties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
    const double d = haversine_km(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_DOUBLE_EQ(d, haversine_km(b, a));
    EXPECT_LE(d, std::numbers::pi * kEarthRadiusKm + 1e-9);
    EXPECT_GT(d, 0.0);
  }
}

TEST(Topology, IntraDelay) {
  Topology t;
  Topology::LinkSpec s;
  s.a = AsId(1);
  s.b = AsId(2);
  s.a_location = s.b_location = GeoPoint{0, 0};
  t.add_link(s);
  s.b = AsId(3);
  t.add_link(s);
  s.b = AsId(4);
  s.a_location = s.b_location = east(1000.0);
  t.add_link(s);
  EXPECT_DOUBLE_EQ(t.intra_delay_ms(AsId(1), InterfaceId(1), InterfaceId(1)), 0.0);
  EXPECT_DOUBLE_EQ(t.intra_delay_ms(AsId(1), InterfaceId(1), InterfaceId(2)), 0.0);
  EXPECT_NEAR(t.intra_delay_ms(AsId(1), InterfaceId(1), InterfaceId(3)), 5.003, 0.001);
  EXPECT_THROW(t.intra_delay_ms(AsId(1), InterfaceId(1), InterfaceId(9)), Error);
}

TEST(Topology, PeeringSymmetric) {
  const Topology t = synth_topology({30, 4.0, 3000.0, 5});
  for (AsId as : t.as_ids()) {
    for (const auto& itf : t.interfaces(as)) {
      const Interface& peer = t.interface(itf.peer_as, itf.peer_if);
      EXPECT_EQ(peer.peer_as, as);
      EXPECT_EQ(peer.peer_if, itf.if_id);
      EXPECT_NE(itf.peer_as, as);
    }
  }
}

TEST(GeoRel, Load) {
  const Topology t = parse("# comment\n1 2 p2c 10.0 20.0\n2 3 p2p 11.0 21.0 400\n");
  EXPECT_EQ(t.as_count(), 3u);
  EXPECT_EQ(t.link_count(), 2u);
  EXPECT_EQ(t.interface_count(), 4u);
  EXPECT_DOUBLE_EQ(t.interfaces(AsId(3))[0].link_bandwidth_mbps, 400.0);
}

TEST(GeoRel, Errors) {
  try {
    parse("1 2 p2c 10 20\n1 3 p2c 91.0 20\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse("1 2 p2c 10 20\n1 2 p2c 10 20\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateLink);
  }
  EXPECT_THROW(parse("1 2 xyz 10 20\n"), ParseError);
  EXPECT_THROW(parse("1 1 p2p 10 20\n"), ParseError);
}

TEST(GeoRel, WriteReadRoundTrip) {
  const Topology t = synth_topology({20, 4.0, 2000.0, 9});
  std::ostringstream a;
  write_georel(a, t);
  const Topology u = parse(a.str());
  std::ostringstream b;
  write_georel(b, u);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Prune, Star) {
  const PruneResult r = prune_to_top_n(star(5), 3);
  EXPECT_EQ(r.topology.as_ids(), (std::vector<AsId>{AsId(4), AsId(5), AsId(100)}));
  EXPECT_EQ(r.removed, (std::vector<AsId>{AsId(1), AsId(2), AsId(3)}));
}

TEST(Prune, LargeNUnchanged) {
  const Topology t = star(4);
  const PruneResult r = prune_to_top_n(t, 10);
  EXPECT_EQ(r.topology.as_count(), t.as_count());
  EXPECT_EQ(r.topology.link_count(), t.link_count());
}

TEST(Prune, Triangle) {
  Topology t;
  for (auto [a, b] : {std::pair{1, 2}, {2, 3}, {1, 3}}) {
    Topology::LinkSpec s;
    s.a = AsId(a);
    s.b = AsId(b);
    t.add_link(s);
  }
  const PruneResult r = prune_to_top_n(t, 2);
  EXPECT_EQ(r.topology.as_ids(), (std::vector<AsId>{AsId(2), AsId(3)}));
  EXPECT_EQ(r.topology.link_count(), 1u);
}

// Replaying the trace: every removed AS had minimum degree at its removal.
TEST(Prune, MonotoneGreedy) {
  const Topology t = synth_topology({60, 5.0, 4000.0, 2});
  const PruneResult r = prune_to_top_n(t, 25);
  std::map<AsId, std::set<AsId>> adj;
  for (AsId as : t.as_ids()) {
    for (AsId n : t.neighbors(as)) adj[as].insert(n);
  }
  for (std::size_t i = 0; i < r.removed.size(); ++i) {
    const AsId gone = r.removed[i];
    EXPECT_EQ(adj[gone].size(), r.removed_degree[i]);
    for (const auto& [as, ns] : adj) EXPECT_GE(ns.size(), r.removed_degree[i]);
    for (AsId n : adj[gone]) adj[n].erase(gone);
    adj.erase(gone);
  }
  EXPECT_LE(r.topology.as_count(), 25u);
}

TEST(Groups, Clustering) {
  Topology t;
  auto link = [&](AsId peer, GeoPoint loc) {
    Topology::LinkSpec s;
    s.a = AsId(1);
    s.b = peer;
    s.a_location = s.b_location = loc;
    t.add_link(s);
  };
  link(AsId(2), east(0));
  link(AsId(3), east(250));
  link(AsId(4), east(500));
  auto groups = cluster_interface_groups(t, AsId(1), 300.0);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].members, (std::vector<InterfaceId>{InterfaceId(1), InterfaceId(2)}));
  EXPECT_EQ(groups[1].members, (std::vector<InterfaceId>{InterfaceId(3)}));
  EXPECT_EQ(cluster_interface_groups(t, AsId(1), 1000.0).size(), 1u);
  EXPECT_EQ(cluster_interface_groups(t, AsId(2), 300.0).size(), 1u);
}

TEST(Groups, DiameterAndCoverage) {
  const Topology t = synth_topology({40, 5.0, 5000.0, 3});
  for (AsId as : t.as_ids()) {
    const auto groups = cluster_interface_groups(t, as, 300.0);
    std::set<InterfaceId> covered;
    for (const auto& g : groups) {
      for (InterfaceId a : g.members) {
        covered.insert(a);
        for (InterfaceId b : g.members) {
          EXPECT_LE(haversine_km(t.interface(as, a).location, t.interface(as, b).location), 300.0 + 1e-9);
        }
      }
    }
    EXPECT_EQ(covered.size(), t.interfaces(as).size());
  }
}

TEST(InterfaceGraph, Shape) {
  const Topology two = irec::testing::line_topology(2);
  const InterfaceGraph g2 = interface_graph(two);
  EXPECT_EQ(g2.nodes.size(), 2u);
  EXPECT_EQ(g2.edges.size(), 1u);
  const InterfaceGraph gs = interface_graph(star(3));
  std::size_t intra = 0;
  for (const auto& e : gs.edges) intra += e.intra ? 1 : 0;
  EXPECT_EQ(intra, 3u);
}

// Interface-graph distance between two interfaces equals the best PCB
// delay over loop-free paths, checked by enumeration on small instances.
TEST(InterfaceGraph, MatchesEnumeration) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Topology t = synth_topology({7, 3.0, 3000.0, seed});
    const InterfaceGraph g = interface_graph(t);
    for (AsId src : t.as_ids()) {
      for (AsId dst : t.as_ids()) {
        if (dst == src) continue;
        std::vector<std::size_t> sources;
        for (const auto& itf : t.interfaces(src)) sources.push_back(g.node(src, itf.if_id));
        const auto dist = irec::testing::interface_dijkstra(g, sources, src);
        double oracle = std::numeric_limits<double>::infinity();
        for (const auto& itf : t.interfaces(dst)) oracle = std::min(oracle, dist[g.node(dst, itf.if_id)]);
        double enumerated = std::numeric_limits<double>::infinity();
        for (const auto& p : irec::testing::enumerate_paths(t, src, dst)) enumerated = std::min(enumerated, p.delay_ms);
        EXPECT_NEAR(oracle, enumerated, 1e-9) << "seed " << seed;
      }
    }
  }
}

TEST(Synth, Deterministic) {
  const SynthParams p{50, 6.0, 5000.0, 1};
  std::ostringstream a, b;
  write_georel(a, synth_topology(p));
  write_georel(b, synth_topology(p));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Synth, ConnectedAndSized) {
  const Topology two = synth_topology({2, 1.0, 100.0, 1});
  EXPECT_EQ(two.link_count(), 1u);
  EXPECT_TRUE(two.connected());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Topology t = synth_topology({50, 6.0, 5000.0, seed});
    EXPECT_EQ(t.as_count(), 50u);
    EXPECT_TRUE(t.connected());
    EXPECT_EQ(irec::testing::bfs_hops(t, AsId(1)).size(), 50u);
    EXPECT_NEAR(2.0 * t.link_count() / 50.0, 6.0, 0.5);
  }
}

TEST(Synth, Infeasible) {
  EXPECT_THROW(synth_topology({1, 1.0, 100.0, 1}), Error);
  EXPECT_THROW(synth_topology({5, 10.0, 100.0, 1}), Error);
}
