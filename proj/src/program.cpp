#include "irec/program.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>

#include <boost/algorithm/string.hpp>

#include "byte_io.hpp"
#include "irec/crypto.hpp"
#include "irec/error.hpp"

namespace irec {

namespace {

constexpr std::string_view kProgramMagic = "IRECALG1";

enum class FilterTag : std::uint8_t {
  AvoidLinks = 1,
  AvoidAses = 2,
  MaxHops = 3,
  MaxDelayMs = 4,
  MinBandwidthMbps = 5,
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// A candidate seen either as received (local selection) or extended to one
// egress.
struct PathView {
  std::optional<double> delay_ms;
  std::size_t hops = 0;
  double min_bandwidth_mbps = 0.0;
  const std::vector<AsLink>* links = nullptr;
  std::optional<AsLink> extra_link;
  const Candidate* cand = nullptr;
  std::optional<AsId> next_as;

  template <typename F>
  bool any_link(F&& pred) const {
    if (extra_link && pred(*extra_link)) return true;
    return std::any_of(links->begin(), links->end(), pred);
  }
};

PathView received_view(const Candidate& c) {
  PathView v;
  v.delay_ms = c.delay_ms;
  v.hops = c.hops;
  v.min_bandwidth_mbps = c.min_bandwidth_mbps;
  v.links = &c.links;
  v.cand = &c;
  return v;
}

PathView extended_view(const Candidate& c, InterfaceId egress, const TopologyView& topo) {
  const ExtendedMetrics m = extended_metrics(c, egress, topo);
  PathView v;
  v.delay_ms = m.delay_ms;
  v.hops = m.hops;
  v.min_bandwidth_mbps = m.min_bandwidth_mbps;
  v.links = &c.links;
  v.extra_link = AsLink(topo.local_as(), topo.neighbor(egress));
  v.cand = &c;
  v.next_as = topo.neighbor(egress);
  return v;
}

bool filter_passes(const ProgramFilter& f, const PathView& p) {
  return std::visit(
      [&](const auto& flt) -> bool {
        using T = std::decay_t<decltype(flt)>;
        if constexpr (std::is_same_v<T, AvoidLinks>) {
          return !p.any_link([&](const AsLink& l) { return flt.links.count(l) != 0; });
        } else if constexpr (std::is_same_v<T, AvoidAses>) {
          for (AsId a : flt.ases) {
            if (p.cand->visits(a) || (p.next_as && *p.next_as == a)) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, MaxHops>) {
          return p.hops <= flt.hops;
        } else if constexpr (std::is_same_v<T, MaxDelayMs>) {
          return p.delay_ms && *p.delay_ms <= flt.ms;
        } else {
          return p.min_bandwidth_mbps >= flt.mbps;
        }
      },
      f);
}

class Budget {
 public:
  explicit Budget(const ExecutionLimits& limits) : limits_(limits) {}

  void step(std::uint64_t n = 1) {
    steps_ += n;
    if (steps_ > limits_.max_steps) {
      throw Error(ErrorCode::StepBudgetExceeded,
                  "more than " + std::to_string(limits_.max_steps) + " steps");
    }
  }
  void hold(std::size_t live) const {
    if (live > limits_.max_memory_items) {
      throw Error(ErrorCode::MemoryBudgetExceeded,
                  std::to_string(live) + " live records exceed " +
                      std::to_string(limits_.max_memory_items));
    }
  }

 private:
  const ExecutionLimits& limits_;
  std::uint64_t steps_ = 0;
};

struct Work {
  std::size_t index;
  PathView view;
  OrderingKey key;
};

bool has_contextual(const RoutingProgram& p) {
  return std::find(p.objectives.begin(), p.objectives.end(), Objective::MaxFreshLinks) !=
         p.objectives.end();
}

void compute_key(const RoutingProgram& program, Work& w, const std::set<AsLink>& taken, Budget& budget) {
  w.key.values.clear();
  for (Objective o : program.objectives) {
    budget.step();
    switch (o) {
      case Objective::MinSumDelay:
        w.key.values.push_back(w.view.delay_ms.value_or(kInf));
        break;
      case Objective::MinHops:
        w.key.values.push_back(static_cast<double>(w.view.hops));
        break;
      case Objective::MaxMinBandwidth:
        w.key.values.push_back(-w.view.min_bandwidth_mbps);
        break;
      case Objective::MaxFreshLinks: {
        std::size_t fresh = 0;
        auto count = [&](const AsLink& l) {
          if (taken.count(l) == 0) ++fresh;
          return false;
        };
        w.view.any_link(count);
        w.key.values.push_back(-static_cast<double>(fresh));
        break;
      }
    }
  }
  w.key.values.push_back(w.view.delay_ms.value_or(kInf));
  w.key.created = w.view.cand->created;
  w.key.digest = w.view.cand->digest;
}

std::vector<Ranked> rank(const RoutingProgram& program, std::vector<Work>& work, Budget& budget) {
  std::vector<Ranked> out;
  const std::size_t k = program.select_k;
  if (!has_contextual(program)) {
    const std::set<AsLink> none;
    for (auto& w : work) compute_key(program, w, none, budget);
    auto less = [&](const Work& a, const Work& b) {
      budget.step();
      return a.key < b.key;
    };
    const std::size_t take = std::min(k, work.size());
    std::partial_sort(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(take), work.end(), less);
    for (std::size_t i = 0; i < take; ++i) out.push_back({work[i].index, work[i].key});
    return out;
  }

  std::set<AsLink> taken;
  std::vector<bool> used(work.size(), false);
  while (out.size() < k) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < work.size(); ++i) {
      if (used[i]) continue;
      compute_key(program, work[i], taken, budget);
      budget.step();
      if (!best || work[i].key < work[*best].key) best = i;
    }
    if (!best) break;
    used[*best] = true;
    Work& w = work[*best];
    out.push_back({w.index, w.key});
    w.view.any_link([&](const AsLink& l) {
      taken.insert(l);
      return false;
    });
    budget.hold(work.size() + taken.size());
  }
  return out;
}

std::vector<std::size_t> digest_order(std::span<const Candidate> candidates) {
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return candidates[a].digest < candidates[b].digest; });
  return order;
}

void check_finite(detail::ByteReader& r, double v) {
  if (!std::isfinite(v) || v < 0.0) r.fail("filter threshold must be finite and non-negative");
}

}  // namespace

std::string_view objective_name(Objective o) {
  switch (o) {
    case Objective::MinSumDelay: return "MinSumDelay";
    case Objective::MinHops: return "MinHops";
    case Objective::MaxMinBandwidth: return "MaxMinBandwidth";
    case Objective::MaxFreshLinks: return "MaxFreshLinks";
  }
  return "?";
}

Bytes serialize_program(const RoutingProgram& program) {
  Bytes out;
  detail::ByteWriter w(out);
  w.raw(kProgramMagic);
  w.u8(static_cast<std::uint8_t>(program.filters.size()));
  for (const auto& f : program.filters) {
    std::visit(
        [&](const auto& flt) {
          using T = std::decay_t<decltype(flt)>;
          if constexpr (std::is_same_v<T, AvoidLinks>) {
            w.u8(static_cast<std::uint8_t>(FilterTag::AvoidLinks));
            w.u16(static_cast<std::uint16_t>(flt.links.size()));
            for (const auto& l : flt.links) {
              w.u64(l.low.value);
              w.u64(l.high.value);
            }
          } else if constexpr (std::is_same_v<T, AvoidAses>) {
            w.u8(static_cast<std::uint8_t>(FilterTag::AvoidAses));
            w.u16(static_cast<std::uint16_t>(flt.ases.size()));
            for (AsId a : flt.ases) w.u64(a.value);
          } else if constexpr (std::is_same_v<T, MaxHops>) {
            w.u8(static_cast<std::uint8_t>(FilterTag::MaxHops));
            w.u16(flt.hops);
          } else if constexpr (std::is_same_v<T, MaxDelayMs>) {
            w.u8(static_cast<std::uint8_t>(FilterTag::MaxDelayMs));
            w.f64(flt.ms);
          } else {
            w.u8(static_cast<std::uint8_t>(FilterTag::MinBandwidthMbps));
            w.f64(flt.mbps);
          }
        },
        f);
  }
  w.u8(static_cast<std::uint8_t>(program.objectives.size()));
  for (Objective o : program.objectives) w.u8(static_cast<std::uint8_t>(o));
  w.u16(program.select_k);
  return out;
}

RoutingProgram parse_program(ByteView bytes, std::size_t max_program_bytes) {
  if (bytes.size() > max_program_bytes) {
    throw Error(ErrorCode::TooLarge, "program of " + std::to_string(bytes.size()) +
                                         " bytes exceeds " + std::to_string(max_program_bytes));
  }
  detail::ByteReader r(bytes, "routing program");
  r.expect_magic(kProgramMagic);
  RoutingProgram p;
  const std::uint8_t nf = r.u8();
  for (std::uint8_t i = 0; i < nf; ++i) {
    const auto tag = r.u8();
    switch (static_cast<FilterTag>(tag)) {
      case FilterTag::AvoidLinks: {
        AvoidLinks f;
        const std::uint16_t n = r.u16();
        std::optional<AsLink> prev;
        for (std::uint16_t j = 0; j < n; ++j) {
          const AsId a(r.u64());
          const AsId b(r.u64());
          if (!a.valid() || !(a < b)) r.fail("avoid-link pair not normalized");
          const AsLink l(a, b);
          if (prev && !(*prev < l)) r.fail("avoid-link pairs not strictly sorted");
          prev = l;
          f.links.insert(l);
        }
        p.filters.emplace_back(std::move(f));
        break;
      }
      case FilterTag::AvoidAses: {
        AvoidAses f;
        const std::uint16_t n = r.u16();
        std::optional<AsId> prev;
        for (std::uint16_t j = 0; j < n; ++j) {
          const AsId a(r.u64());
          if (!a.valid()) r.fail("zero AS id");
          if (prev && !(*prev < a)) r.fail("avoid-AS list not strictly sorted");
          prev = a;
          f.ases.insert(a);
        }
        p.filters.emplace_back(std::move(f));
        break;
      }
      case FilterTag::MaxHops:
        p.filters.emplace_back(MaxHops{r.u16()});
        break;
      case FilterTag::MaxDelayMs: {
        const double v = r.f64();
        check_finite(r, v);
        p.filters.emplace_back(MaxDelayMs{v});
        break;
      }
      case FilterTag::MinBandwidthMbps: {
        const double v = r.f64();
        check_finite(r, v);
        p.filters.emplace_back(MinBandwidthMbps{v});
        break;
      }
      default:
        r.fail("unknown filter tag " + std::to_string(tag));
    }
  }
  const std::uint8_t no = r.u8();
  if (no == 0) r.fail("empty objective list");
  for (std::uint8_t i = 0; i < no; ++i) {
    const auto tag = r.u8();
    if (tag < 1 || tag > 4) r.fail("unknown objective tag " + std::to_string(tag));
    p.objectives.push_back(static_cast<Objective>(tag));
  }
  p.select_k = r.u16();
  if (p.select_k == 0) r.fail("select_k must be positive");
  if (!r.done()) r.fail("trailing bytes");
  return p;
}

Digest program_hash(const RoutingProgram& program) {
  const Bytes b = serialize_program(program);
  return sha256(b);
}

namespace {

[[noreturn]] void config_fail(const std::string& why) { throw Error(ErrorCode::ConfigError, why); }

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) config_fail("not an integer: '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size() || !std::isfinite(v) || v < 0.0) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    config_fail("not a non-negative number: '" + std::string(s) + "'");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string{}), parts.end());
  return parts;
}

}  // namespace

RoutingProgram parse_program_text(std::string_view text) {
  RoutingProgram p;
  bool have_objectives = false;
  std::vector<std::string> clauses;
  boost::split(clauses, std::string(text), boost::is_any_of(";"));
  for (auto clause : clauses) {
    boost::trim(clause);
    if (clause.empty()) continue;
    const auto eq = clause.find('=');
    if (eq == std::string::npos) config_fail("program clause without '=': " + clause);
    std::string key = clause.substr(0, eq);
    std::string value = clause.substr(eq + 1);
    boost::trim(key);
    boost::trim(value);
    if (key == "avoid_links") {
      AvoidLinks f;
      for (const auto& pair : split_list(value)) {
        const auto dash = pair.find('-');
        if (dash == std::string::npos) config_fail("avoid_links entry must be a-b: " + pair);
        const AsId a(parse_u64(pair.substr(0, dash)));
        const AsId b(parse_u64(pair.substr(dash + 1)));
        if (!a.valid() || !b.valid() || a == b) config_fail("bad avoid_links entry: " + pair);
        f.links.insert(AsLink(a, b));
      }
      p.filters.emplace_back(std::move(f));
    } else if (key == "avoid_ases") {
      AvoidAses f;
      for (const auto& a : split_list(value)) {
        const AsId as(parse_u64(a));
        if (!as.valid()) config_fail("zero AS id in avoid_ases");
        f.ases.insert(as);
      }
      p.filters.emplace_back(std::move(f));
    } else if (key == "max_hops") {
      const auto v = parse_u64(value);
      if (v > 0xFFFF) config_fail("max_hops out of range");
      p.filters.emplace_back(MaxHops{static_cast<std::uint16_t>(v)});
    } else if (key == "max_delay_ms") {
      p.filters.emplace_back(MaxDelayMs{parse_double(value)});
    } else if (key == "min_bandwidth_mbps") {
      p.filters.emplace_back(MinBandwidthMbps{parse_double(value)});
    } else if (key == "objectives") {
      have_objectives = true;
      for (const auto& name : split_list(value)) {
        bool found = false;
        for (std::uint8_t t = 1; t <= 4; ++t) {
          if (objective_name(static_cast<Objective>(t)) == name) {
            p.objectives.push_back(static_cast<Objective>(t));
            found = true;
          }
        }
        if (!found) config_fail("unknown objective '" + name + "'");
      }
    } else if (key == "select_k") {
      const auto v = parse_u64(value);
      if (v == 0 || v > 0xFFFF) config_fail("select_k out of range");
      p.select_k = static_cast<std::uint16_t>(v);
    } else {
      config_fail("unknown program clause '" + key + "'");
    }
  }
  if (!have_objectives || p.objectives.empty()) config_fail("program needs objectives");
  if (p.filters.size() > 0xFF || p.objectives.size() > 0xFF) config_fail("program too long");
  return p;
}

std::string program_to_text(const RoutingProgram& program) {
  std::string out;
  auto clause = [&](const std::string& c) {
    if (!out.empty()) out += "; ";
    out += c;
  };
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  for (const auto& f : program.filters) {
    std::visit(
        [&](const auto& flt) {
          using T = std::decay_t<decltype(flt)>;
          if constexpr (std::is_same_v<T, AvoidLinks>) {
            std::string v;
            for (const auto& l : flt.links) {
              if (!v.empty()) v += ",";
              v += to_string(l.low) + "-" + to_string(l.high);
            }
            clause("avoid_links=" + v);
          } else if constexpr (std::is_same_v<T, AvoidAses>) {
            std::string v;
            for (AsId a : flt.ases) {
              if (!v.empty()) v += ",";
              v += to_string(a);
            }
            clause("avoid_ases=" + v);
          } else if constexpr (std::is_same_v<T, MaxHops>) {
            clause("max_hops=" + std::to_string(flt.hops));
          } else if constexpr (std::is_same_v<T, MaxDelayMs>) {
            clause("max_delay_ms=" + num(flt.ms));
          } else {
            clause("min_bandwidth_mbps=" + num(flt.mbps));
          }
        },
        f);
  }
  std::string objs;
  for (Objective o : program.objectives) {
    if (!objs.empty()) objs += ",";
    objs += objective_name(o);
  }
  clause("objectives=" + objs);
  clause("select_k=" + std::to_string(program.select_k));
  return out;
}

bool passes_filters(const RoutingProgram& program, const Candidate& c, InterfaceId egress,
                    const TopologyView& view) {
  const PathView p = extended_view(c, egress, view);
  return std::all_of(program.filters.begin(), program.filters.end(),
                     [&](const ProgramFilter& f) { return filter_passes(f, p); });
}

Selection execute_program(const RoutingProgram& program, std::span<const Candidate> candidates,
                          const TopologyView& view, const ExecutionLimits& limits) {
  Budget budget(limits);
  Selection sel;
  const auto order = digest_order(candidates);

  auto collect = [&](auto make_view, auto admissible) {
    std::vector<Work> work;
    for (std::size_t idx : order) {
      const Candidate& c = candidates[idx];
      if (!admissible(c)) continue;
      PathView p = make_view(c);
      bool ok = true;
      for (const auto& f : program.filters) {
        budget.step();
        if (!filter_passes(f, p)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      work.push_back({idx, p, {}});
      budget.hold(work.size());
    }
    return rank(program, work, budget);
  };

  for (InterfaceId e : view.interfaces()) {
    auto ranked = collect([&](const Candidate& c) { return extended_view(c, e, view); },
                          [&](const Candidate& c) { return eligible(c, e, view); });
    if (!ranked.empty()) sel.per_egress.emplace(e, std::move(ranked));
  }
  sel.local = collect([](const Candidate& c) { return received_view(c); },
                      [](const Candidate&) { return true; });
  return sel;
}

Selection ProgramAlgorithm::select(std::span<const Candidate> candidates, const TopologyView& view,
                                   const SelectionContext&) {
  return execute_program(program_, candidates, view, limits_);
}

}  // namespace irec
