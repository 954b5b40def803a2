#include "irec/sim.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <nlohmann/json.hpp>

#include "irec/error.hpp"

namespace irec {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using json = nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& why) { throw Error(ErrorCode::ConfigError, why); }

template <typename T>
T get_num(const pt::ptree& sec, const std::string& section, const std::string& key, T fallback) {
  auto v = sec.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
  if (!v) return fallback;
  std::string s = boost::trim_copy(*v);
  try {
    std::size_t used = 0;
    if constexpr (std::is_floating_point_v<T>) {
      const double d = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("");
      return static_cast<T>(d);
    } else {
      if (!s.empty() && s[0] == '-') throw std::invalid_argument("");
      const unsigned long long u = std::stoull(s, &used);
      if (used != s.size() || u > std::numeric_limits<T>::max()) throw std::invalid_argument("");
      return static_cast<T>(u);
    }
  } catch (const std::exception&) {
    config_fail("[" + section + "] " + key + ": bad number '" + s + "'");
  }
}

std::optional<std::string> get_str(const pt::ptree& sec, const std::string& key) {
  auto v = sec.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
  if (!v) return std::nullopt;
  return boost::trim_copy(*v);
}

bool get_bool(const pt::ptree& sec, const std::string& section, const std::string& key, bool fallback) {
  auto v = get_str(sec, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  config_fail("[" + section + "] " + key + ": expected true/false");
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string{}), parts.end());
  return parts;
}

AsId parse_as(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size() && v != 0 && s[0] != '-') return AsId(v);
  } catch (const std::exception&) {
  }
  config_fail(where + ": bad AS id '" + s + "'");
}

void check_keys(const pt::ptree& sec, const std::string& section, std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : sec) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      config_fail("[" + section + "] unknown key '" + k + "'");
    }
  }
}

std::shared_ptr<const Topology> load_topology_section(const pt::ptree& sec, const fs::path& base) {
  check_keys(sec, "topology", {"file", "prune_n", "synth_n", "avg_degree", "spread_km", "seed"});
  Topology topo;
  if (auto file = get_str(sec, "file")) {
    fs::path p = *file;
    if (p.is_relative()) p = base / p;
    std::ifstream in(p);
    if (!in) config_fail("[topology] cannot open " + p.string());
    topo = load_georel(in);
  } else if (sec.count("synth_n")) {
    SynthParams sp;
    sp.n_ases = get_num<std::size_t>(sec, "topology", "synth_n", sp.n_ases);
    sp.avg_degree = get_num<double>(sec, "topology", "avg_degree", sp.avg_degree);
    sp.geo_spread_km = get_num<double>(sec, "topology", "spread_km", sp.geo_spread_km);
    sp.seed = get_num<std::uint64_t>(sec, "topology", "seed", sp.seed);
    topo = synth_topology(sp);
  } else {
    config_fail("[topology] needs 'file' or 'synth_n'");
  }
  if (sec.count("prune_n")) {
    const auto n = get_num<std::size_t>(sec, "topology", "prune_n", 0);
    if (n == 0) config_fail("[topology] prune_n must be >= 1");
    topo = prune_to_top_n(topo, n).topology;
  }
  return std::make_shared<const Topology>(std::move(topo));
}

RacConfig parse_rac(const std::string& name, const pt::ptree& sec) {
  const std::string s = "rac." + name;
  check_keys(sec, s, {"kind", "algorithm", "program", "max_selected", "period", "group_km", "partition_by_group",
                      "partition_by_target", "tags", "max_steps", "max_memory_items", "max_program_bytes"});
  RacConfig c;
  c.rac_id = name;
  const std::string kind = get_str(sec, "kind").value_or("static");
  if (kind == "static") {
    c.kind = RacKind::Static;
  } else if (kind == "on_demand") {
    c.kind = RacKind::OnDemand;
  } else {
    config_fail("[" + s + "] kind must be static or on_demand");
  }
  if (c.kind == RacKind::Static) c.algorithm = get_str(sec, "algorithm").value_or(name);
  if (auto prog = get_str(sec, "program")) {
    c.program = parse_program_text(*prog);
    if (c.kind == RacKind::Static && !sec.count("algorithm")) c.algorithm = "program";
  }
  c.max_selected = get_num<std::size_t>(sec, s, "max_selected", c.max_selected);
  c.period = get_num<Round>(sec, s, "period", c.period);
  if (sec.count("group_km")) c.group_km = get_num<double>(sec, s, "group_km", 0.0);
  c.partition_by_group = get_bool(sec, s, "partition_by_group", c.group_km.has_value());
  c.partition_by_target = get_bool(sec, s, "partition_by_target", c.kind == RacKind::OnDemand);
  if (auto tags = get_str(sec, "tags")) c.criteria_tags = split_csv(*tags);
  c.limits.max_steps = get_num<std::uint64_t>(sec, s, "max_steps", c.limits.max_steps);
  c.limits.max_memory_items = get_num<std::size_t>(sec, s, "max_memory_items", c.limits.max_memory_items);
  c.limits.max_program_bytes = get_num<std::size_t>(sec, s, "max_program_bytes", c.limits.max_program_bytes);
  c.validate();
  return c;
}

OriginProfile parse_origin(const std::string& name, const pt::ptree& sec) {
  const std::string s = "origin." + name;
  check_keys(sec, s, {"program", "origins", "target", "first_round", "last_round"});
  OriginProfile o;
  o.name = name;
  if (name.empty() || name.size() > kMaxAlgorithmIdBytes) config_fail("[" + s + "] name must be 1-32 bytes");
  auto prog = get_str(sec, "program");
  if (!prog) config_fail("[" + s + "] needs a program");
  o.program = parse_program_text(*prog);
  if (auto list = get_str(sec, "origins"); list && *list != "all") {
    for (const auto& a : split_csv(*list)) o.origins.push_back(parse_as(a, "[" + s + "] origins"));
  }
  if (auto t = get_str(sec, "target")) o.target = parse_as(*t, "[" + s + "] target");
  o.first_round = get_num<Round>(sec, s, "first_round", 0);
  if (sec.count("last_round")) o.last_round = get_num<Round>(sec, s, "last_round", 0);
  return o;
}

PdConfig parse_pd(const pt::ptree& sec) {
  check_keys(sec, "pd", {"pairs", "random_pairs", "goal_k", "timeout", "start_round", "seed_rac"});
  PdConfig p;
  if (auto pairs = get_str(sec, "pairs")) {
    for (const auto& item : split_csv(*pairs)) {
      const auto dash = item.find('-');
      if (dash == std::string::npos) config_fail("[pd] pairs entries must be source-target");
      const AsId s = parse_as(boost::trim_copy(item.substr(0, dash)), "[pd] pairs");
      const AsId t = parse_as(boost::trim_copy(item.substr(dash + 1)), "[pd] pairs");
      if (s == t) config_fail("[pd] pair with source == target");
      p.pairs.emplace_back(s, t);
    }
  }
  p.random_pairs = get_num<std::size_t>(sec, "pd", "random_pairs", 0);
  p.goal_k = get_num<std::size_t>(sec, "pd", "goal_k", p.goal_k);
  p.timeout_rounds = get_num<Round>(sec, "pd", "timeout", p.timeout_rounds);
  p.start_round = get_num<Round>(sec, "pd", "start_round", p.start_round);
  p.seed_rac = get_str(sec, "seed_rac").value_or(p.seed_rac);
  return p;
}

}  // namespace

void SimConfig::validate() const {
  if (!topology) config_fail("no topology");
  if (rounds == 0) config_fail("rounds must be >= 1");
  if (period == 0) config_fail("period must be >= 1");
  if (registry_cap == 0) config_fail("registry_cap must be >= 1");
  if (validity == 0 || validity > validity_cap) config_fail("validity must be in [1, validity_cap]");
  std::set<std::string> ids;
  bool on_demand = false;
  for (const auto& r : racs) {
    r.validate();
    if (!ids.insert(r.rac_id).second) config_fail("duplicate rac '" + r.rac_id + "'");
    on_demand = on_demand || r.kind == RacKind::OnDemand;
  }
  for (const auto& o : origins) {
    if (ids.count(o.name)) config_fail("origin profile '" + o.name + "' collides with a rac id");
    for (AsId a : o.origins) {
      if (!topology->has_as(a)) config_fail("origin profile '" + o.name + "': unknown AS " + to_string(a));
    }
    if (o.target && !topology->has_as(*o.target)) config_fail("origin profile '" + o.name + "': unknown target");
  }
  if (pd) {
    if (!on_demand) config_fail("[pd] needs an on_demand rac");
    if (pd->goal_k == 0 || pd->timeout_rounds == 0) config_fail("[pd] goal_k and timeout must be >= 1");
    for (const auto& [s, t] : pd->pairs) {
      if (!topology->has_as(s) || !topology->has_as(t)) config_fail("[pd] pair with unknown AS");
    }
    if (pd->random_pairs > 0 && topology->as_count() < 2) config_fail("[pd] random pairs need two ASes");
  }
}

SimConfig parse_sim_config(std::istream& in, const fs::path& base_dir) {
  std::stringstream filtered;
  std::vector<std::string> sections;  // read_ini drops sections without keys
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') line.clear();
    if (first != std::string::npos && line[first] == '[') {
      const auto close = line.find(']', first);
      if (close != std::string::npos) sections.push_back(boost::trim_copy(line.substr(first + 1, close - first - 1)));
    }
    filtered << line << '\n';
  }
  pt::ptree tree;
  try {
    pt::read_ini(filtered, tree);
  } catch (const pt::ini_parser_error& e) {
    config_fail(std::string("line ") + std::to_string(e.line()) + ": " + e.message());
  }

  SimConfig cfg;
  bool have_topology = false;
  const pt::ptree empty;
  for (const auto& name : sections) {
    const auto found = tree.find(name);
    const pt::ptree& sec = found == tree.not_found() ? empty : found->second;
    if (name == "topology") {
      cfg.topology = load_topology_section(sec, base_dir);
      have_topology = true;
    } else if (name == "sim") {
      check_keys(sec, "sim", {"rounds", "period", "registry_cap", "validity", "validity_cap", "purge_lookahead",
                              "fastpath_interval", "seed"});
      cfg.rounds = get_num<Round>(sec, "sim", "rounds", cfg.rounds);
      cfg.period = get_num<Round>(sec, "sim", "period", cfg.period);
      cfg.registry_cap = get_num<std::size_t>(sec, "sim", "registry_cap", cfg.registry_cap);
      cfg.validity_cap = get_num<Round>(sec, "sim", "validity_cap", cfg.validity_cap);
      cfg.validity = get_num<Round>(sec, "sim", "validity", std::min(cfg.validity, cfg.validity_cap));
      cfg.purge_lookahead = get_num<Round>(sec, "sim", "purge_lookahead", cfg.purge_lookahead);
      cfg.fastpath_interval = get_num<Round>(sec, "sim", "fastpath_interval", cfg.fastpath_interval);
      cfg.seed = get_num<std::uint64_t>(sec, "sim", "seed", cfg.seed);
    } else if (name.rfind("rac.", 0) == 0) {
      cfg.racs.push_back(parse_rac(name.substr(4), sec));
    } else if (name.rfind("origin.", 0) == 0) {
      cfg.origins.push_back(parse_origin(name.substr(7), sec));
    } else if (name == "pd") {
      cfg.pd = parse_pd(sec);
    } else {
      config_fail("unknown section [" + name + "]");
    }
  }
  for (const auto& [name, sec] : tree) {
    if (std::find(sections.begin(), sections.end(), name) == sections.end()) {
      config_fail("key '" + name + "' outside a section");
    }
  }
  if (!have_topology) config_fail("missing [topology] section");
  cfg.validate();
  return cfg;
}

SimConfig load_sim_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_fail("cannot open config " + path.string());
  return parse_sim_config(in, path.parent_path());
}

namespace {

struct AsState {
  AsState(const Topology& topo, AsId id, std::size_t cap)
      : id(id), view(topo, id), ingress(id), egress(topo, id), registry(cap) {}

  AsId id;
  TopologyView view;
  IngressDb ingress;
  EgressGateway egress;
  PathRegistry registry;
  std::vector<RacInstance> racs;
  AlgorithmCache cache;
  std::optional<FastPathLimiter> fast;
  std::vector<PdState> pd;
  std::vector<Digest> pd_hash;  // code hash of each controller's current iteration
  std::vector<std::pair<PcbPtr, Digest>> returns_in;
  std::map<std::string, std::map<InterfaceId, std::uint16_t>> group_of;  // per static rac
};

std::vector<AsId> full_path(const Pcb& pcb, AsId terminal) {
  auto ases = path_ases(pcb);
  ases.push_back(terminal);
  return ases;
}

std::optional<double> delay_of(const Pcb& pcb) {
  try {
    return accumulated_delay(pcb);
  } catch (const Error&) {
    return std::nullopt;
  }
}

class Engine {
 public:
  Engine(const SimConfig& cfg, std::ostream* event_sink)
      : cfg_(cfg), topo_(*cfg.topology), signer_(cfg.seed), log_(event_sink) {
    std::set<std::string> static_tags;
    for (const auto& r : cfg_.racs) {
      if (r.kind == RacKind::Static) static_tags.insert(r.rac_id);
    }
    for (AsId a : topo_.as_ids()) {
      auto st = std::make_unique<AsState>(topo_, a, cfg_.registry_cap);
      for (const auto& r : cfg_.racs) {
        st->racs.emplace_back(r, static_tags);
        if (r.kind == RacKind::Static && r.group_km) {
          auto& m = st->group_of[r.rac_id];
          for (const auto& g : cluster_interface_groups(topo_, a, *r.group_km)) {
            for (InterfaceId i : g.members) m[i] = g.group_id;
          }
        }
      }
      if (cfg_.fastpath_interval > 0) st->fast.emplace(cfg_.fastpath_interval);
      states_.emplace(a, std::move(st));
    }
    for (const auto& r : cfg_.racs) {
      if (r.kind == RacKind::Static) static_hash_[r.rac_id] = static_code_hash(r);
    }
    for (const auto& o : cfg_.origins) {
      const Bytes bytes = serialize_program(o.program);
      for (AsId a : origins_of(o)) store_.publish(a, o.name, bytes);
    }
    if (cfg_.pd) pd_pairs_ = choose_pd_pairs();
    if (!topo_.connected()) result_.warnings.push_back("DisconnectedTopology: the AS graph is not connected");
  }

  SimResult run() {
    for (Round r = 0; r < cfg_.rounds; ++r) {
      std::map<AsId, std::vector<Message>> next;
      for (auto& [id, st] : states_) step(*st, r, next);
      inbox_ = std::move(next);
    }
    return finish();
  }

 private:
  std::vector<AsId> origins_of(const OriginProfile& o) const {
    return o.origins.empty() ? topo_.as_ids() : o.origins;
  }

  std::vector<std::pair<AsId, AsId>> choose_pd_pairs() const {
    auto pairs = cfg_.pd->pairs;
    const auto ases = topo_.as_ids();
    boost::random::mt19937_64 rng(cfg_.seed ^ 0x5044u);
    boost::random::uniform_int_distribution<std::size_t> pick(0, ases.size() - 1);
    std::set<std::pair<AsId, AsId>> seen(pairs.begin(), pairs.end());
    std::size_t added = 0;
    std::size_t attempts = 0;
    const std::size_t max_pairs = ases.size() * (ases.size() - 1);
    while (added < cfg_.pd->random_pairs && seen.size() < max_pairs && attempts < 100000) {
      ++attempts;
      const AsId s = ases[pick(rng)];
      const AsId t = ases[pick(rng)];
      if (s == t || !seen.insert({s, t}).second) continue;
      pairs.emplace_back(s, t);
      ++added;
    }
    return pairs;
  }

  void emit_origin(AsState& st, Round r, InterfaceId e, const Extensions& exts, const std::string& label,
                   std::map<AsId, std::vector<Message>>& next) {
    Pcb pcb = originate_on(topo_, st.id, e, exts, r, cfg_.validity, signer_, cfg_.validity_cap);
    const Digest d = pcb_digest(pcb);
    const Interface& itf = topo_.interface(st.id, e);
    log_.add(r, st.id, EventType::Originate, d, "rac=" + label + " if=" + to_string(e));
    log_.add(r, st.id, EventType::Propagate, d,
             "rac=" + label + " if=" + to_string(e) + " to=" + to_string(itf.peer_as) + " out=" + to_hex(d));
    next[itf.peer_as].push_back({Message::Kind::Beacon, st.id, itf.peer_as, std::move(pcb), d});
  }

  void step(AsState& st, Round r, std::map<AsId, std::vector<Message>>& next) {
    std::vector<Submission> subs;

    // (1) intake
    st.returns_in.clear();
    if (auto it = inbox_.find(st.id); it != inbox_.end()) {
      auto& msgs = it->second;
      std::stable_sort(msgs.begin(), msgs.end(), [](const Message& a, const Message& b) {
        return std::tie(a.from, a.digest) < std::tie(b.from, b.digest);
      });
      for (auto& m : msgs) {
        if (m.kind == Message::Kind::Return) {
          auto body = std::make_shared<const Pcb>(std::move(m.pcb));
          ReturnRecord rec;
          rec.round = r;
          rec.as = st.id;
          rec.target = body->extensions.target ? body->extensions.target->target_as : m.from;
          rec.algorithm_id = body->extensions.algorithm ? body->extensions.algorithm->algorithm_id : "";
          rec.digest = m.digest;
          rec.ases = full_path(*body, rec.target);
          result_.returns.push_back(std::move(rec));
          st.returns_in.emplace_back(std::move(body), m.digest);
          continue;
        }
        auto body = std::make_shared<const Pcb>(std::move(m.pcb));
        const AcceptResult res = st.ingress.accept(body, m.digest, r, signer_);
        const std::string from = "from=" + to_string(m.from);
        switch (res.kind) {
          case AcceptResult::Kind::Rejected:
            log_.add(r, st.id, EventType::Reject, m.digest, from + " reason=" + std::string(reject_name(*res.reason)));
            break;
          case AcceptResult::Kind::Stored:
            log_.add(r, st.id, EventType::Accept, m.digest, from + " status=stored");
            break;
          case AcceptResult::Kind::Duplicate:
            log_.add(r, st.id, EventType::Accept, m.digest, from + " status=duplicate");
            break;
          case AcceptResult::Kind::Superseded:
            log_.add(r, st.id, EventType::Accept, m.digest, from + " status=superseded");
            break;
        }
        if (res.stored() && st.fast && st.fast->forward(*body, r) == FastPathLimiter::Decision::Forward) {
          if (auto c = make_candidate(*body, m.digest, st.view)) {
            std::set<InterfaceId> ifs;
            for (InterfaceId e : st.view.interfaces()) {
              if (eligible(*c, e, st.view)) ifs.insert(e);
            }
            if (!ifs.empty()) {
              log_.add(r, st.id, EventType::Fastpath, m.digest, "origin=" + to_string(body->origin_as));
              subs.push_back({"FASTPATH", body, m.digest, c->ingress, std::move(ifs)});
            }
          }
        }
      }
    }

    // (2) origination
    if (r % cfg_.period == 0) {
      for (const auto& rc : cfg_.racs) {
        if (rc.kind != RacKind::Static) continue;
        const auto groups = st.group_of.find(rc.rac_id);
        for (InterfaceId e : st.view.interfaces()) {
          Extensions exts;
          exts.algorithm = AlgorithmExt{rc.rac_id, static_hash_.at(rc.rac_id)};
          if (groups != st.group_of.end()) exts.group = InterfaceGroupExt{groups->second.at(e)};
          emit_origin(st, r, e, exts, rc.rac_id, next);
        }
      }
      for (const auto& o : cfg_.origins) {
        if (r < o.first_round || (o.last_round && r > *o.last_round)) continue;
        const auto ases = origins_of(o);
        if (std::find(ases.begin(), ases.end(), st.id) == ases.end()) continue;
        if (o.target && *o.target == st.id) continue;
        Extensions exts;
        exts.algorithm = AlgorithmExt{o.name, program_hash(o.program)};
        if (o.target) exts.target = TargetExt{*o.target};
        for (InterfaceId e : st.view.interfaces()) emit_origin(st, r, e, exts, o.name, next);
      }
    }

    // (3) RACs on a snapshot
    const auto snapshot = st.ingress.all(r);
    RacInstance::Context ctx{r, &st.view, &store_, &st.cache, &st.registry, &log_};
    for (auto& rac : st.racs) {
      if (!rac.due(r)) continue;
      auto out = rac.tick(snapshot, ctx);
      for (const auto& err : rac.errors()) {
        if (result_.warnings.size() < 1000) {
          result_.warnings.push_back("round " + std::to_string(r) + " AS " + to_string(st.id) + " rac " +
                                     rac.config().rac_id + ": " + err);
        }
      }
      std::move(out.begin(), out.end(), std::back_inserter(subs));
    }

    // (4) PD controllers
    if (cfg_.pd) pd_phase(st, r, next);

    // (5) propagation
    std::sort(subs.begin(), subs.end(), [](const Submission& a, const Submission& b) {
      return std::tie(a.rac_id, a.digest) < std::tie(b.rac_id, b.digest);
    });
    for (const auto& s : subs) {
      const auto added = st.egress.submit(s);
      if (!added.empty()) {
        log_.add(r, st.id, EventType::Submit, s.digest,
                 "rac=" + s.rac_id + " requested=" + std::to_string(s.egress_ifs.size()) +
                     " new=" + std::to_string(added.size()));
      }
    }
    for (auto& m : st.egress.propagate(r, signer_, &log_)) next[m.to].push_back(std::move(m));

    // (6) purge
    const std::size_t purged = st.ingress.purge(r, cfg_.purge_lookahead);
    if (purged > 0) log_.add(r, st.id, EventType::Purge, Digest{}, "removed=" + std::to_string(purged));
    st.egress.purge(r);
    st.registry.purge(r);
  }

  void pd_phase(AsState& st, Round r, std::map<AsId, std::vector<Message>>& next) {
    if (r == cfg_.pd->start_round) {
      for (const auto& [s, t] : pd_pairs_) {
        if (s != st.id) continue;
        const Pcb* seed = nullptr;
        std::optional<double> best;
        Digest best_digest;
        for (const auto& [key, paths] : st.registry.entries()) {
          if (key.rac_id != cfg_.pd->seed_rac || key.origin != t) continue;
          for (const auto& p : paths) {
            const double d = delay_of(*p.pcb).value_or(std::numeric_limits<double>::infinity());
            if (!seed || d < *best || (d == *best && p.digest < best_digest)) {
              seed = p.pcb.get();
              best = d;
              best_digest = p.digest;
            }
          }
        }
        st.pd.push_back(pd_seed(s, t, seed, cfg_.pd->goal_k, cfg_.pd->timeout_rounds));
        st.pd_hash.emplace_back();
      }
    }
    if (r < cfg_.pd->start_round) return;
    for (std::size_t i = 0; i < st.pd.size(); ++i) {
      PdState& state = st.pd[i];
      std::vector<std::pair<PcbPtr, Digest>> mine;
      if (state.waiting) {
        const std::string id = pd_algorithm_id(state);
        for (const auto& ret : st.returns_in) {
          const auto& alg = ret.first->extensions.algorithm;
          const auto& tgt = ret.first->extensions.target;
          if (alg && alg->algorithm_id == id && alg->code_hash == st.pd_hash[i] && tgt && tgt->target_as == state.target) {
            mine.push_back(ret);
          }
        }
      }
      const PdStepResult res = pd_step(state, mine, r);
      if (!res.originate) continue;
      st.pd_hash[i] = res.originate->code_hash;
      store_.publish(st.id, res.originate->algorithm_id, serialize_program(res.originate->program));
      Extensions exts;
      exts.target = TargetExt{state.target};
      exts.algorithm = AlgorithmExt{res.originate->algorithm_id, res.originate->code_hash};
      for (InterfaceId e : st.view.interfaces()) {
        if (state.avoid_links.count(AsLink(st.id, st.view.neighbor(e)))) continue;
        emit_origin(st, r, e, exts, "PD", next);
      }
    }
  }

  SimResult finish() {
    result_.rounds = cfg_.rounds;
    result_.topology = cfg_.topology;
    std::set<std::string> seen_alg;
    for (const auto& rc : cfg_.racs) {
      if (rc.kind == RacKind::Static && seen_alg.insert(rc.rac_id).second) result_.algorithms.push_back(rc.rac_id);
    }
    std::set<std::string> dynamic_ids;
    for (auto& [id, st] : states_) {
      for (const auto& [key, paths] : st->registry.entries()) {
        if (!seen_alg.count(key.rac_id)) dynamic_ids.insert(key.rac_id);
        for (std::size_t rank = 0; rank < paths.size(); ++rank) {
          const RegisteredPath& p = paths[rank];
          PathRecord rec;
          rec.as = id;
          rec.rac = key.rac_id;
          rec.origin = key.origin;
          rec.group = key.group;
          rec.rank = rank;
          rec.digest = p.digest;
          rec.hops = p.pcb->hops.size();
          rec.delay_ms = delay_of(*p.pcb);
          rec.created = p.pcb->creation_time;
          rec.ases = full_path(*p.pcb, id);
          rec.origin_location = topo_.interface(p.pcb->origin_as, p.pcb->origin_egress_if).location;
          rec.local_location = topo_.interface(id, p.ingress_if).location;
          rec.tags = p.tags;
          result_.registry.push_back(std::move(rec));
        }
      }
      for (const auto& state : st->pd) {
        PdRecord rec;
        rec.source = state.source;
        rec.target = state.target;
        rec.iterations = state.iteration;
        rec.terminated = state.terminated;
        for (const auto& p : state.accepted) {
          if (p->origin_as == state.source) {
            rec.paths.push_back(full_path(*p, state.target));
          } else {
            auto ases = full_path(*p, state.source);
            std::reverse(ases.begin(), ases.end());
            rec.paths.push_back(std::move(ases));
          }
        }
        result_.pd.push_back(std::move(rec));
      }
    }
    for (const auto& d : dynamic_ids) result_.algorithms.push_back(d);
    if (cfg_.pd) result_.algorithms.push_back("PD");

    for (const auto& rc : cfg_.racs) result_.emitters.push_back(rc.rac_id);
    for (const auto& o : cfg_.origins) result_.emitters.push_back(o.name);
    if (cfg_.pd) result_.emitters.push_back("PD");
    if (cfg_.fastpath_interval > 0) result_.emitters.push_back("FASTPATH");
    result_.log = std::move(log_);
    return std::move(result_);
  }

  const SimConfig& cfg_;
  const Topology& topo_;
  KeyedHashSigner signer_;
  std::map<AsId, std::unique_ptr<AsState>> states_;
  std::map<AsId, std::vector<Message>> inbox_;
  std::map<std::string, Digest> static_hash_;
  std::vector<std::pair<AsId, AsId>> pd_pairs_;
  AlgorithmStore store_;
  EventLog log_;
  SimResult result_;
};

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::string join_ases(const std::vector<AsId>& v) {
  std::string out;
  for (AsId a : v) {
    if (!out.empty()) out += ' ';
    out += to_string(a);
  }
  return out;
}

json as_list(const std::vector<AsId>& v) {
  json j = json::array();
  for (AsId a : v) j.push_back(a.value);
  return j;
}

std::vector<AsId> as_vector(const json& j) {
  std::vector<AsId> v;
  for (const auto& x : j) v.emplace_back(x.get<std::uint64_t>());
  return v;
}

json geo(const GeoPoint& g) { return json::array({g.lat_deg, g.lon_deg}); }
GeoPoint geo_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

SimResult run(const SimConfig& config, std::ostream* event_sink) {
  config.validate();
  Engine engine(config, event_sink);
  return engine.run();
}

std::vector<PathRecord> snapshot_registry(const SimResult& result, AsId as) {
  if (!result.topology || !result.topology->has_as(as)) {
    throw Error(ErrorCode::UnknownAs, "AS " + to_string(as) + " is not in the simulated topology");
  }
  std::vector<PathRecord> rows;
  for (const auto& r : result.registry) {
    if (r.as == as) rows.push_back(r);
  }
  return rows;
}

void write_registry_csv(std::ostream& out, const std::vector<PathRecord>& rows) {
  out << "as,rac_id,origin_as,group_id,rank,digest,hops,delay_ms,criteria_tags,path\n";
  std::ostringstream num;
  num.precision(17);
  for (const auto& r : rows) {
    num.str("");
    if (r.delay_ms) num << *r.delay_ms;
    out << r.as.value << ',' << r.rac << ',' << r.origin.value << ',' << r.group << ',' << r.rank << ','
        << to_hex(r.digest) << ',' << r.hops << ',' << num.str() << ',' << join(r.tags, ';') << ','
        << join_ases(r.ases) << '\n';
  }
}

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  const fs::path tmp = path.string() + ".tmp";
  std::error_code ec;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    try {
      writer(out);
    } catch (...) {
      out.close();
      fs::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  write_file_atomic(path, [&](std::ostream& out) { out << content; });
}

void save_result(const SimResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  if (!result.log.streamed()) {
    write_file_atomic(dir / "events.log", [&](std::ostream& out) { result.log.write(out); });
  }
  write_file_atomic(dir / "registry.csv", [&](std::ostream& out) { write_registry_csv(out, result.registry); });
  write_file_atomic(dir / "topology.georel", [&](std::ostream& out) { write_georel(out, *result.topology); });

  json j;
  j["rounds"] = result.rounds;
  j["algorithms"] = result.algorithms;
  j["emitters"] = result.emitters;
  j["warnings"] = result.warnings;
  j["registry"] = json::array();
  for (const auto& r : result.registry) {
    json row = {{"as", r.as.value},       {"rac", r.rac},           {"origin", r.origin.value},
                {"group", r.group},       {"rank", r.rank},         {"digest", to_hex(r.digest)},
                {"hops", r.hops},         {"created", r.created},   {"path", as_list(r.ases)},
                {"origin_location", geo(r.origin_location)},       {"local_location", geo(r.local_location)},
                {"tags", r.tags}};
    row["delay_ms"] = r.delay_ms ? json(*r.delay_ms) : json(nullptr);
    j["registry"].push_back(std::move(row));
  }
  j["returns"] = json::array();
  for (const auto& r : result.returns) {
    j["returns"].push_back({{"round", r.round},
                            {"as", r.as.value},
                            {"target", r.target.value},
                            {"algorithm", r.algorithm_id},
                            {"digest", to_hex(r.digest)},
                            {"path", as_list(r.ases)}});
  }
  j["pd"] = json::array();
  for (const auto& p : result.pd) {
    json paths = json::array();
    for (const auto& path : p.paths) paths.push_back(as_list(path));
    j["pd"].push_back({{"source", p.source.value},
                       {"target", p.target.value},
                       {"iterations", p.iterations},
                       {"terminated", p.terminated},
                       {"paths", std::move(paths)}});
  }
  write_file_atomic(dir / "result.json", [&](std::ostream& out) { out << std::setw(1) << j << '\n'; });
}

SimResult load_result(const fs::path& dir, bool with_events) {
  const fs::path rj = dir / "result.json";
  const fs::path ev = dir / "events.log";
  const fs::path tp = dir / "topology.georel";
  for (const auto& p : {rj, ev, tp}) {
    if (!fs::exists(p)) throw Error(ErrorCode::MissingResult, "missing " + p.string());
  }
  SimResult res;
  {
    std::ifstream in(tp);
    res.topology = std::make_shared<const Topology>(load_georel(in));
  }
  if (with_events) {
    std::ifstream in(ev);
    res.log = EventLog::read(in);
  }
  json j;
  try {
    std::ifstream in(rj);
    j = json::parse(in);
    res.rounds = j.at("rounds").get<Round>();
    res.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    res.emitters = j.at("emitters").get<std::vector<std::string>>();
    res.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& row : j.at("registry")) {
      PathRecord r;
      r.as = AsId(row.at("as").get<std::uint64_t>());
      r.rac = row.at("rac").get<std::string>();
      r.origin = AsId(row.at("origin").get<std::uint64_t>());
      r.group = row.at("group").get<std::uint16_t>();
      r.rank = row.at("rank").get<std::size_t>();
      r.digest = digest_from_hex(row.at("digest").get<std::string>());
      r.hops = row.at("hops").get<std::size_t>();
      if (!row.at("delay_ms").is_null()) r.delay_ms = row.at("delay_ms").get<double>();
      r.created = row.at("created").get<Round>();
      r.ases = as_vector(row.at("path"));
      r.origin_location = geo_from(row.at("origin_location"));
      r.local_location = geo_from(row.at("local_location"));
      r.tags = row.at("tags").get<std::vector<std::string>>();
      res.registry.push_back(std::move(r));
    }
    for (const auto& row : j.at("returns")) {
      ReturnRecord r;
      r.round = row.at("round").get<Round>();
      r.as = AsId(row.at("as").get<std::uint64_t>());
      r.target = AsId(row.at("target").get<std::uint64_t>());
      r.algorithm_id = row.at("algorithm").get<std::string>();
      r.digest = digest_from_hex(row.at("digest").get<std::string>());
      r.ases = as_vector(row.at("path"));
      res.returns.push_back(std::move(r));
    }
    for (const auto& row : j.at("pd")) {
      PdRecord p;
      p.source = AsId(row.at("source").get<std::uint64_t>());
      p.target = AsId(row.at("target").get<std::uint64_t>());
      p.iterations = row.at("iterations").get<std::uint32_t>();
      p.terminated = row.at("terminated").get<bool>();
      for (const auto& path : row.at("paths")) p.paths.push_back(as_vector(path));
      res.pd.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MissingResult, "unreadable " + rj.string() + ": " + e.what());
  }
  return res;
}

}  // namespace irec
