#include <gtest/gtest.h>

#include <random>

#include "irec/builtin.hpp"
#include "irec/error.hpp"
#include "test_support.hpp"

using namespace irec;
using namespace irec::testing;

namespace {

const KeyedHashSigner& signer() {
  static const KeyedHashSigner s(8);
  return s;
}

constexpr AsId kOrigin{1};
constexpr AsId kLocal{10};
constexpr AsId kOut1{900};
constexpr AsId kOut2{901};

void link(Topology& t, AsId a, AsId b, double delay) {
  Topology::LinkSpec s;
  s.a = a;
  s.b = b;
  s.delay_ms = delay;
  t.add_link(s);
}

// Disjoint branches from kOrigin to kLocal, one per entry, each a list of
// link delays (so a branch with n entries is an n-hop path). kLocal has
// two more neighbors, kOut1 and kOut2.
struct Ladder {
  Topology topo;
  std::vector<std::vector<AsId>> branches;

  explicit Ladder(const std::vector<std::vector<double>>& delays) {
    std::uint64_t next = 100;
    for (const auto& b : delays) {
      std::vector<AsId> path{kOrigin};
      for (std::size_t i = 0; i + 1 < b.size(); ++i) path.push_back(AsId(next++));
      path.push_back(kLocal);
      for (std::size_t i = 0; i < b.size(); ++i) link(topo, path[i], path[i + 1], b[i]);
      branches.push_back(path);
    }
    link(topo, kLocal, kOut1, 1.0);
    link(topo, kLocal, kOut2, 1.0);
  }

  CandidateSet candidates(const TopologyView& view, Round now = 0) const {
    std::vector<Pcb> pcbs;
    for (const auto& b : branches) pcbs.push_back(build_pcb(topo, b, signer(), now));
    return make_candidates(view, std::move(pcbs));
  }
};

InterfaceId egress_to(const Topology& t, AsId from, AsId to) {
  for (const auto& itf : t.interfaces(from)) {
    if (itf.peer_as == to) return itf.if_id;
  }
  throw std::invalid_argument("no such link");
}

std::size_t hops_of(const CandidateSet& s, const Ranked& r) { return s.candidates[r.candidate].hops; }

}  // namespace

TEST(ShortestPaths, PicksFewestHops) {
  const Ladder l({{1, 1}, {1, 1, 1}, {1, 1, 1, 1}});
  const TopologyView view(l.topo, kLocal);
  const auto set = l.candidates(view);
  ShortestPaths one("1SP", 1);
  const Selection sel = one.select(set.candidates, view, {});
  for (AsId out : {kOut1, kOut2}) {
    const auto& picks = sel.per_egress.at(egress_to(l.topo, kLocal, out));
    ASSERT_EQ(picks.size(), 1u);
    EXPECT_EQ(hops_of(set, picks[0]), 2u);
  }
  // Toward the neighbor on the 2-hop path only loop-free candidates remain.
  const InterfaceId back = egress_to(l.topo, kLocal, l.branches[0][1]);
  ASSERT_EQ(sel.per_egress.at(back).size(), 1u);
  EXPECT_EQ(hops_of(set, sel.per_egress.at(back)[0]), 3u);
  ASSERT_EQ(sel.local.size(), 1u);
  EXPECT_EQ(hops_of(set, sel.local[0]), 2u);
}

TEST(ShortestPaths, TieBreaksOnDelay) {
  const Ladder l({{3, 4}, {2, 3}});
  const TopologyView view(l.topo, kLocal);
  const auto set = l.candidates(view);
  ShortestPaths one("1SP", 1);
  const Selection sel = one.select(set.candidates, view, {});
  EXPECT_DOUBLE_EQ(*set.candidates[sel.local[0].candidate].delay_ms, 5.0);
  EXPECT_DOUBLE_EQ(*set.candidates[sel.per_egress.at(egress_to(l.topo, kLocal, kOut1))[0].candidate].delay_ms, 5.0);
}

TEST(ShortestPaths, Empty) {
  const Ladder l({{1, 1}});
  const TopologyView view(l.topo, kLocal);
  ShortestPaths one("1SP", 1);
  const Selection sel = one.select({}, view, {});
  EXPECT_TRUE(sel.per_egress.empty());
  EXPECT_TRUE(sel.local.empty());
}

TEST(ShortestPaths, KBest) {
  const Ladder l({{1, 1}, {1, 2}, {1, 1, 1}, {1, 1, 1, 1}});
  const TopologyView view(l.topo, kLocal);
  const auto set = l.candidates(view);
  ShortestPaths three("3SP", 3);
  const Selection sel = three.select(set.candidates, view, {});
  const auto& picks = sel.per_egress.at(egress_to(l.topo, kLocal, kOut1));
  ASSERT_EQ(picks.size(), 3u);
  EXPECT_EQ(hops_of(set, picks[0]), 2u);
  EXPECT_EQ(hops_of(set, picks[1]), 2u);
  EXPECT_EQ(hops_of(set, picks[2]), 3u);

  ShortestPaths five("5SP", 5);
  const Ladder small({{1, 1}, {1, 1, 1}, {1, 1, 1, 1}});
  const TopologyView v2(small.topo, kLocal);
  const auto s2 = small.candidates(v2);
  EXPECT_EQ(five.select(s2.candidates, v2, {}).per_egress.at(egress_to(small.topo, kLocal, kOut1)).size(), 3u);
  SelectionContext capped;
  capped.max_selected = 2;
  EXPECT_EQ(five.select(s2.candidates, v2, capped).per_egress.at(egress_to(small.topo, kLocal, kOut1)).size(), 2u);
}

TEST(ShortestPaths, OneEqualsOneSp) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> hops(1, 5);
  std::uniform_real_distribution<double> d(0.5, 20.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> br(4);
    for (auto& b : br) {
      b.resize(static_cast<std::size_t>(hops(rng)));
      for (auto& x : b) x = d(rng);
    }
    const Ladder l(br);
    const TopologyView view(l.topo, kLocal);
    const auto set = l.candidates(view);
    auto a = make_builtin("1SP", "1SP");
    ShortestPaths k1("K1", 1);
    const Selection sa = a->select(set.candidates, view, {});
    const Selection sb = k1.select(set.candidates, view, {});
    ASSERT_EQ(sa.per_egress.size(), sb.per_egress.size());
    for (const auto& [e, picks] : sa.per_egress) {
      ASSERT_EQ(picks.size(), sb.per_egress.at(e).size());
      for (std::size_t i = 0; i < picks.size(); ++i) EXPECT_EQ(picks[i].key, sb.per_egress.at(e)[i].key);
    }
  }
}

TEST(HeuristicDisjointness, DisjointBothSelected) {
  const Ladder l({{1, 1}, {1, 1, 1}});
  const TopologyView view(l.topo, kLocal);
  const auto set = l.candidates(view);
  HeuristicDisjointness hd;
  const Selection sel = hd.select(set.candidates, view, {});
  ASSERT_EQ(sel.local.size(), 2u);
  EXPECT_EQ(hops_of(set, sel.local[0]), 3u);  // three fresh links beat two
  EXPECT_EQ(hops_of(set, sel.local[1]), 2u);
}

TEST(HeuristicDisjointness, SharedLinksSkipped) {
  const Ladder l({{1, 1}});
  const TopologyView view(l.topo, kLocal);
  std::vector<Pcb> pcbs{build_pcb(l.topo, l.branches[0], signer(), 0),
                        build_pcb(l.topo, l.branches[0], signer(), 1)};
  const auto set = make_candidates(view, std::move(pcbs));
  HeuristicDisjointness hd;
  const Selection sel = hd.select(set.candidates, view, {});
  ASSERT_EQ(sel.local.size(), 1u);
  EXPECT_EQ(set.candidates[sel.local[0].candidate].created, 1u);  // newer copy wins the tie
}

TEST(HeuristicDisjointness, MemoryAcrossRounds) {
  const Ladder l({{1, 1}, {1, 1, 1}});
  const TopologyView view(l.topo, kLocal);
  const auto set = l.candidates(view);
  HeuristicDisjointness hd;
  const Selection first = hd.select(set.candidates, view, {});
  EXPECT_FALSE(first.per_egress.empty());
  const Selection again = hd.select(set.candidates, view, {});
  EXPECT_TRUE(again.per_egress.empty());
  EXPECT_TRUE(again.local.empty());
  // A fresh copy of an already covered path adds nothing either.
  const auto newer = l.candidates(view, 3);
  EXPECT_TRUE(hd.select(newer.candidates, view, {20, 3}).per_egress.empty());
}

TEST(HeuristicDisjointness, MemoryExpiresWithSelection) {
  const Ladder l({{1, 1}});
  const TopologyView view(l.topo, kLocal);
  auto at = [&](Round created) {
    return make_candidates(view, {build_pcb(l.topo, l.branches[0], signer(), created, {}, 4)});
  };
  HeuristicDisjointness hd;
  const auto first = at(0);
  EXPECT_EQ(hd.select(first.candidates, view, {20, 0}).local.size(), 1u);
  const auto second = at(2);
  EXPECT_TRUE(hd.select(second.candidates, view, {20, 2}).local.empty());
  // The round-0 selection expired at round 4; the live copy is fresh again.
  const Selection later = hd.select(second.candidates, view, {20, 4});
  ASSERT_EQ(later.local.size(), 1u);
  EXPECT_FALSE(later.per_egress.empty());
}

TEST(DelayOptimization, ExtendThenOptimize) {
  const Topology topo = extend_optimize_topology();
  const TopologyView view(topo, kM);
  const auto set = make_candidates(view, {build_pcb_via(topo, kO, {InterfaceId(1)}, signer()),
                                          build_pcb_via(topo, kO, {InterfaceId(2)}, signer())});
  ASSERT_DOUBLE_EQ(*set.candidates[0].delay_ms, 10.0);
  ASSERT_DOUBLE_EQ(*set.candidates[1].delay_ms, 12.0);
  SelectionContext one;
  one.max_selected = 1;

  auto don = make_builtin("DON", "DON");
  const Selection a = don->select(set.candidates, view, one);
  ASSERT_EQ(a.per_egress.at(InterfaceId(3)).size(), 1u);
  EXPECT_EQ(a.per_egress.at(InterfaceId(3))[0].candidate, 0u);

  auto dob = make_builtin("DOB", "DOB");
  const Selection b = dob->select(set.candidates, view, one);
  ASSERT_EQ(b.per_egress.at(InterfaceId(3)).size(), 1u);
  EXPECT_EQ(b.per_egress.at(InterfaceId(3))[0].candidate, 1u);
  EXPECT_DOUBLE_EQ(*extended_metrics(set.candidates[0], InterfaceId(3), view).delay_ms, 10 + 10 + 1);
  EXPECT_DOUBLE_EQ(*extended_metrics(set.candidates[1], InterfaceId(3), view).delay_ms, 12 + 2 + 1);
}

TEST(DelayOptimization, SingleAndTie) {
  const Ladder l({{2, 3}, {3, 2}});
  const TopologyView view(l.topo, kLocal);
  const auto set = l.candidates(view);
  DelayOptimization don("DON", false);
  SelectionContext one;
  one.max_selected = 1;
  const Selection sel = don.select(set.candidates, view, one);
  const std::size_t expect = set.candidates[0].digest < set.candidates[1].digest ? 0 : 1;
  EXPECT_EQ(sel.local[0].candidate, expect);
  const auto single = make_candidates(view, {set.pcbs[0]});
  EXPECT_EQ(don.select(single.candidates, view, one).local.size(), 1u);
}

TEST(DelayOptimization, ZeroIntraDegenerates) {
  const Ladder l({{5, 1}, {1, 1, 1}, {2, 2}});
  const TopologyView view(l.topo, kLocal);
  const auto set = l.candidates(view);
  DelayOptimization don("DON", false), dob("DOB", true);
  for (std::size_t k = 1; k <= 3; ++k) {
    SelectionContext ctx;
    ctx.max_selected = k;
    const Selection a = don.select(set.candidates, view, ctx);
    const Selection b = dob.select(set.candidates, view, ctx);
    for (AsId out : {kOut1, kOut2}) {
      const InterfaceId e = egress_to(l.topo, kLocal, out);
      ASSERT_EQ(a.per_egress.at(e).size(), b.per_egress.at(e).size());
      for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(a.per_egress.at(e)[i].candidate, b.per_egress.at(e)[i].candidate);
    }
  }
}

TEST(DelayOptimization, PerEgressChoicesDiffer) {
  Topology topo = extend_optimize_topology();
  link(topo, kM, AsId(4), 1.0);  // M if 4
  topo.set_intra_delay(kM, InterfaceId(1), InterfaceId(4), 0.0);
  topo.set_intra_delay(kM, InterfaceId(2), InterfaceId(4), 10.0);
  const TopologyView view(topo, kM);
  const auto set = make_candidates(view, {build_pcb_via(topo, kO, {InterfaceId(1)}, signer()),
                                          build_pcb_via(topo, kO, {InterfaceId(2)}, signer())});
  DelayOptimization dob("DOB", true);
  SelectionContext one;
  one.max_selected = 1;
  const Selection sel = dob.select(set.candidates, view, one);
  EXPECT_EQ(sel.per_egress.at(InterfaceId(3))[0].candidate, 1u);
  EXPECT_EQ(sel.per_egress.at(InterfaceId(4))[0].candidate, 0u);
}

TEST(DelayOptimization, DobNeverWorse) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(0.5, 20.0);
  for (int trial = 0; trial < 30; ++trial) {
    Ladder l({{d(rng), d(rng)}, {d(rng), d(rng)}, {d(rng), d(rng), d(rng)}});
    const auto ifs = l.topo.interfaces(kLocal);
    for (const auto& a : ifs) {
      for (const auto& b : ifs) {
        if (a.if_id < b.if_id) l.topo.set_intra_delay(kLocal, a.if_id, b.if_id, d(rng));
      }
    }
    const TopologyView view(l.topo, kLocal);
    const auto set = l.candidates(view);
    DelayOptimization don("DON", false), dob("DOB", true);
    SelectionContext one;
    one.max_selected = 1;
    const Selection a = don.select(set.candidates, view, one);
    const Selection b = dob.select(set.candidates, view, one);
    for (const auto& [e, picks] : a.per_egress) {
      const double dn = *extended_metrics(set.candidates[picks[0].candidate], e, view).delay_ms;
      const double db = *extended_metrics(set.candidates[b.per_egress.at(e)[0].candidate], e, view).delay_ms;
      EXPECT_LE(db, dn + 1e-9);
    }
  }
}

TEST(Builtin, Registry) {
  for (const char* id : {"1SP", "5SP", "LEG20", "HD", "DON", "DOB"}) {
    EXPECT_TRUE(is_builtin(id));
    EXPECT_NE(make_builtin(id, id), nullptr);
  }
  EXPECT_FALSE(is_builtin("XYZ"));
  try {
    make_builtin("XYZ", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}
