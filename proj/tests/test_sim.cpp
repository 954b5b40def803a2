#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "irec/error.hpp"
#include "irec/pd.hpp"
#include "irec/sim.hpp"
#include "test_support.hpp"

using namespace irec;
using irec::testing::build_pcb;
using irec::testing::line_topology;

namespace {

std::shared_ptr<const Topology> shared(Topology t) { return std::make_shared<const Topology>(std::move(t)); }

RacConfig static_rac(const std::string& id, std::size_t max_selected = 20) {
  RacConfig c;
  c.rac_id = id;
  c.algorithm = id;
  c.max_selected = max_selected;
  return c;
}

RacConfig on_demand_rac() {
  RacConfig c;
  c.rac_id = "OD";
  c.kind = RacKind::OnDemand;
  c.partition_by_target = true;
  return c;
}

SimConfig line_config(std::size_t n, Round rounds) {
  SimConfig cfg;
  cfg.topology = shared(line_topology(n));
  cfg.rounds = rounds;
  cfg.racs = {static_rac("1SP")};
  return cfg;
}

SimConfig pull_config(std::size_t n) {
  SimConfig cfg;
  cfg.topology = shared(line_topology(n));
  cfg.rounds = static_cast<Round>(n + 2);
  cfg.racs = {on_demand_rac()};
  OriginProfile o;
  o.name = "PULL";
  o.program = parse_program_text("objectives=MinHops");
  o.origins = {AsId(1)};
  o.target = AsId(n);
  o.last_round = 0;
  cfg.origins = {o};
  return cfg;
}

SimConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_sim_config(in);
}

std::string log_text(const SimResult& r) {
  std::ostringstream out;
  r.log.write(out);
  return out.str();
}

std::string csv_text(const std::vector<PathRecord>& rows) {
  std::ostringstream out;
  write_registry_csv(out, rows);
  return out.str();
}

std::vector<PathRecord> rows_of(const SimResult& r, const std::string& rac) {
  std::vector<PathRecord> out;
  for (const auto& row : r.registry) {
    if (row.rac == rac) out.push_back(row);
  }
  return out;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST(SimConfig, Parse) {
  const SimConfig cfg = parse(R"(
# comment
[topology]
synth_n = 12
avg_degree = 3
spread_km = 2000
seed = 4

[sim]
rounds = 7
registry_cap = 5

[rac.1SP]
max_selected = 3

[rac.HD]

[rac.DOB300]
algorithm = DOB
group_km = 300

[rac.OD]
kind = on_demand

[origin.WIDE]
program = objectives=MaxMinBandwidth; select_k=2
origins = 1,2
target = 3

[pd]
pairs = 1-5
goal_k = 4
)");
  EXPECT_EQ(cfg.topology->as_count(), 12u);
  EXPECT_EQ(cfg.rounds, 7u);
  EXPECT_EQ(cfg.registry_cap, 5u);
  ASSERT_EQ(cfg.racs.size(), 4u);
  EXPECT_EQ(cfg.racs[0].max_selected, 3u);
  EXPECT_EQ(cfg.racs[1].rac_id, "HD");
  EXPECT_EQ(cfg.racs[1].algorithm, "HD");
  EXPECT_EQ(cfg.racs[2].algorithm, "DOB");
  EXPECT_TRUE(cfg.racs[2].partition_by_group);
  EXPECT_FALSE(cfg.racs[0].partition_by_group);
  EXPECT_EQ(cfg.racs[3].kind, RacKind::OnDemand);
  EXPECT_TRUE(cfg.racs[3].partition_by_target);
  ASSERT_EQ(cfg.origins.size(), 1u);
  EXPECT_EQ(cfg.origins[0].origins, (std::vector<AsId>{AsId(1), AsId(2)}));
  EXPECT_EQ(cfg.origins[0].target, AsId(3));
  EXPECT_EQ(cfg.origins[0].program.select_k, 2u);
  ASSERT_TRUE(cfg.pd);
  EXPECT_EQ(cfg.pd->pairs, (std::vector<std::pair<AsId, AsId>>{{AsId(1), AsId(5)}}));
  EXPECT_EQ(cfg.pd->goal_k, 4u);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(SimConfig, Errors) {
  const std::string topo = "[topology]\nsynth_n = 6\navg_degree = 2\nspread_km = 100\nseed = 1\n";
  for (const std::string bad : {
           "[sim]\nrounds = 0\n",
           "[sim]\nrounds = -3\n",
           "[sim]\nrounds = ten\n",
           "[sim]\nround = 3\n",
           "[bogus]\nx = 1\n",
           "[bogus]\n",
           "[rac.HD]\n[rac.HD]\n",
           "[rac.A]\nalgorithm = NOPE\n",
           "[rac.A]\nkind = sometimes\n",
           "[rac.A]\nmax_selected = 0\n",
           "[rac.1SP]\n[pd]\npairs = 1-2\n",
           "[rac.OD]\nkind = on_demand\n[pd]\npairs = 1-1\n",
           "[rac.OD]\nkind = on_demand\n[pd]\npairs = 1-99\n",
           "[origin.X]\nprogram = objectives=Fastest\n",
           "[origin.X]\nprogram = objectives=MinHops\ntarget = 99\n",
       }) {
    try {
      parse(topo + bad).validate();
      ADD_FAILURE() << "accepted:\n" << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigError) << bad;
    }
  }
  EXPECT_THROW(parse("rounds = 3\n" + topo), Error);
  try {
    parse("[sim]\nrounds = 3\n").validate();
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(SimConfig, RoundsZeroRejectedByRun) {
  SimConfig cfg = line_config(3, 0);
  try {
    run(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Engine, OneHopPerRound) {
  const SimResult two = run(line_config(3, 2));
  for (const auto& row : snapshot_registry(two, AsId(1))) EXPECT_NE(row.origin, AsId(3));

  const SimResult three = run(line_config(3, 3));
  const auto rows = snapshot_registry(three, AsId(1));
  const auto it = std::find_if(rows.begin(), rows.end(), [](const PathRecord& r) { return r.origin == AsId(3); });
  ASSERT_NE(it, rows.end());
  EXPECT_EQ(it->ases, (std::vector<AsId>{AsId(3), AsId(2), AsId(1)}));
  EXPECT_EQ(it->hops, 2u);
  EXPECT_EQ(it->rac, "1SP");
}

TEST(Engine, PullReturnRound) {
  for (std::size_t n = 3; n <= 6; ++n) {
    const SimResult r = run(pull_config(n));
    ASSERT_EQ(r.returns.size(), 1u) << n;
    EXPECT_EQ(r.returns[0].round, n);
    EXPECT_EQ(r.returns[0].as, AsId(1));
    EXPECT_EQ(r.returns[0].target, AsId(n));
    EXPECT_EQ(r.returns[0].algorithm_id, "PULL");
    std::vector<AsId> line;
    for (std::size_t i = 1; i <= n; ++i) line.emplace_back(i);
    EXPECT_EQ(r.returns[0].ases, line);
    for (const auto& row : r.registry) EXPECT_NE(row.rac.rfind("OD", 0), 0u) << row.rac;
  }
}

TEST(Engine, Deterministic) {
  SimConfig cfg;
  cfg.topology = shared(synth_topology({15, 3.0, 3000.0, 8}));
  cfg.rounds = 5;
  cfg.racs = {static_rac("1SP", 2), static_rac("HD", 2)};
  const SimResult a = run(cfg);
  const SimResult b = run(cfg);
  EXPECT_EQ(log_text(a), log_text(b));
  EXPECT_EQ(csv_text(a.registry), csv_text(b.registry));
  EXPECT_GT(a.log.size(), 0u);
}

TEST(Engine, DedupAndConservation) {
  SimConfig cfg;
  cfg.topology = shared(synth_topology({15, 4.0, 3000.0, 2}));
  cfg.rounds = 5;
  cfg.racs = {static_rac("1SP", 2), static_rac("DON", 2)};
  cfg.fastpath_interval = 2;
  const SimResult r = run(cfg);
  EXPECT_EQ(irec::testing::duplicate_propagations(r.log), 0u);
  EXPECT_EQ(irec::testing::unmatched_propagations(r.log, cfg.rounds - 1), 0u);
}

TEST(Engine, RacIndependence) {
  SimConfig both;
  both.topology = shared(synth_topology({15, 3.0, 3000.0, 5}));
  both.rounds = 5;
  both.racs = {static_rac("1SP", 2), static_rac("HD", 2)};
  SimConfig alone = both;
  alone.racs = {static_rac("HD", 2)};
  EXPECT_EQ(csv_text(rows_of(run(both), "HD")), csv_text(rows_of(run(alone), "HD")));
}

TEST(Engine, SnapshotUnknownAs) {
  const SimResult r = run(line_config(3, 2));
  try {
    snapshot_registry(r, AsId(77));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownAs);
  }
}

TEST(Engine, DisconnectedWarns) {
  Topology t = line_topology(2);
  Topology::LinkSpec s;
  s.a = AsId(8);
  s.b = AsId(9);
  t.add_link(s);
  SimConfig cfg;
  cfg.topology = shared(std::move(t));
  cfg.rounds = 2;
  cfg.racs = {static_rac("1SP")};
  EXPECT_FALSE(run(cfg).warnings.empty());
}

TEST(Result, SaveLoadRoundTrip) {
  const TempDir dir("irec_test_result");
  const SimResult r = run(pull_config(4));
  save_result(r, dir.path);
  const SimResult back = load_result(dir.path);
  EXPECT_EQ(back.rounds, r.rounds);
  EXPECT_EQ(back.registry, r.registry);
  EXPECT_EQ(back.returns, r.returns);
  EXPECT_EQ(back.algorithms, r.algorithms);
  EXPECT_EQ(back.emitters, r.emitters);
  EXPECT_EQ(log_text(back), log_text(r));
  EXPECT_EQ(back.topology->link_count(), r.topology->link_count());
  EXPECT_FALSE(std::filesystem::exists(dir.path / "result.json.tmp"));
}

TEST(Result, Missing) {
  const TempDir dir("irec_test_missing");
  std::filesystem::create_directories(dir.path);
  try {
    load_result(dir.path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingResult);
  }
}

namespace {

const KeyedHashSigner& signer() {
  static const KeyedHashSigner s(7);
  return s;
}

// Two parallel 3-AS branches between 1 and 5: 1-2-5 and 1-3-4-5.
Topology ladder() {
  Topology t;
  for (auto [a, b] : {std::pair{1, 2}, {2, 5}, {1, 3}, {3, 4}, {4, 5}}) {
    Topology::LinkSpec s;
    s.a = AsId(a);
    s.b = AsId(b);
    t.add_link(s);
  }
  return t;
}

PcbPtr pull(const Topology& t, const std::vector<AsId>& ases, const std::string& alg) {
  Extensions e;
  e.target = TargetExt{ases.back()};
  e.algorithm = AlgorithmExt{alg, Digest{}};
  Pcb p = build_pcb(t, ases, signer(), 0, e);
  return std::make_shared<const Pcb>(std::move(p));
}

}  // namespace

TEST(Pd, SeedAvoidsLinks) {
  const Topology t = ladder();
  const Pcb seed = build_pcb(t, {AsId(5), AsId(2), AsId(1)}, signer());
  const PdState s = pd_seed(AsId(1), AsId(5), &seed, 3, 4);
  EXPECT_EQ(s.avoid_links, (std::set<AsLink>{AsLink(AsId(1), AsId(2)), AsLink(AsId(2), AsId(5))}));
  EXPECT_EQ(s.accepted.size(), 1u);
  const RoutingProgram prog = pd_program(s);
  ASSERT_EQ(prog.filters.size(), 1u);
  EXPECT_EQ(pd_algorithm_id(s), "PD/5/0");
  EXPECT_TRUE(pd_seed(AsId(1), AsId(5), nullptr).avoid_links.empty());
  EXPECT_TRUE(pd_program(pd_seed(AsId(1), AsId(5), nullptr)).filters.empty());
}

TEST(Pd, AcceptsFastestReturn) {
  Topology t;
  auto add = [&](int a, int b, double delay) {
    Topology::LinkSpec s;
    s.a = AsId(a);
    s.b = AsId(b);
    s.delay_ms = delay;
    t.add_link(s);
  };
  add(1, 2, 4);
  add(2, 5, 4);
  add(1, 3, 3);
  add(3, 5, 3);
  PdState s = pd_seed(AsId(1), AsId(5), nullptr, 5, 4);
  const PdStepResult first = pd_step(s, {}, 0);
  ASSERT_TRUE(first.originate);
  EXPECT_TRUE(s.waiting);
  const std::string id = first.originate->algorithm_id;
  // Each return carries the last hop before the target; the target itself
  // is not a hop.
  const PcbPtr slow = pull(t, {AsId(1), AsId(2), AsId(5)}, id);
  const PcbPtr fast = pull(t, {AsId(1), AsId(3), AsId(5)}, id);
  EXPECT_DOUBLE_EQ(accumulated_delay(*slow), 8.0);
  EXPECT_DOUBLE_EQ(accumulated_delay(*fast), 6.0);
  const PdStepResult second = pd_step(s, {{slow, pcb_digest(*slow)}, {fast, pcb_digest(*fast)}}, 3);
  EXPECT_TRUE(second.accepted);
  ASSERT_EQ(s.accepted.size(), 1u);
  EXPECT_EQ(s.accepted[0], fast);
  EXPECT_EQ(s.avoid_links, (std::set<AsLink>{AsLink(AsId(1), AsId(3)), AsLink(AsId(3), AsId(5))}));
  ASSERT_TRUE(second.originate);
  EXPECT_EQ(second.originate->algorithm_id, "PD/5/1");
  EXPECT_NE(second.originate->code_hash, first.originate->code_hash);
}

TEST(Pd, TimeoutTerminates) {
  PdState s = pd_seed(AsId(1), AsId(5), nullptr, 5, 4);
  ASSERT_TRUE(pd_step(s, {}, 2).originate);
  EXPECT_FALSE(pd_step(s, {}, 5).originate);
  EXPECT_FALSE(s.terminated);
  EXPECT_FALSE(pd_step(s, {}, 6).originate);
  EXPECT_TRUE(s.terminated);
  EXPECT_FALSE(pd_step(s, {}, 7).originate);
}

TEST(Pd, GoalTerminates) {
  const Topology t = ladder();
  const Pcb seed = build_pcb(t, {AsId(5), AsId(2), AsId(1)}, signer());
  PdState s = pd_seed(AsId(1), AsId(5), &seed, 1, 4);
  EXPECT_FALSE(pd_step(s, {}, 0).originate);
  EXPECT_TRUE(s.terminated);
}

// Accepted PD paths in a full run are pairwise link-disjoint paths from
// source to target, and the avoid set only grows.
TEST(Pd, SimulatedPairsDisjoint) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SimConfig cfg;
    cfg.topology = shared(synth_topology({16, 4.0, 3000.0, seed}));
    cfg.rounds = 30;
    cfg.seed = seed;
    cfg.racs = {static_rac("HD", 3), on_demand_rac()};
    PdConfig pd;
    pd.random_pairs = 3;
    pd.start_round = 6;
    pd.timeout_rounds = 8;
    cfg.pd = pd;
    const SimResult r = run(cfg);
    ASSERT_FALSE(r.pd.empty());
    for (const auto& rec : r.pd) {
      EXPECT_GE(rec.paths.size(), 1u);
      std::set<AsLink> used;
      for (const auto& path : rec.paths) {
        ASSERT_GE(path.size(), 2u);
        EXPECT_EQ(path.front(), rec.source);
        EXPECT_EQ(path.back(), rec.target);
        for (std::size_t i = 1; i < path.size(); ++i) {
          const auto ns = cfg.topology->neighbors(path[i - 1]);
          EXPECT_NE(std::find(ns.begin(), ns.end(), path[i]), ns.end());
          EXPECT_TRUE(used.insert(AsLink(path[i - 1], path[i])).second) << "seed " << seed;
        }
      }
    }
    EXPECT_EQ(irec::testing::duplicate_propagations(r.log), 0u);
  }
}
