#include "irec/builtin.hpp"

#include <algorithm>
#include <optional>

#include "irec/error.hpp"

namespace irec {

namespace {

std::vector<Ranked> sorted_by(std::span<const Candidate> cands,
                              const std::function<std::optional<std::vector<double>>(const Candidate&)>& values) {
  std::vector<Ranked> out;
  out.reserve(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    auto v = values(cands[i]);
    if (!v) continue;
    out.push_back({i, OrderingKey{std::move(*v), cands[i].created, cands[i].digest}});
  }
  std::sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) { return a.key < b.key; });
  return out;
}

std::vector<Ranked> take_eligible(const std::vector<Ranked>& ranked, std::span<const Candidate> cands,
                                  InterfaceId egress, const TopologyView& view, std::size_t k) {
  std::vector<Ranked> out;
  for (const auto& r : ranked) {
    if (out.size() >= k) break;
    if (eligible(cands[r.candidate], egress, view)) out.push_back(r);
  }
  return out;
}

double delay_or_inf(const std::optional<double>& d) {
  return d.value_or(std::numeric_limits<double>::infinity());
}

}  // namespace

Selection ShortestPaths::select(std::span<const Candidate> candidates, const TopologyView& view,
                                const SelectionContext& ctx) {
  Selection sel;
  const std::size_t k = std::min(k_, ctx.max_selected);
  const auto ranked = sorted_by(candidates, [](const Candidate& c) {
    return std::vector<double>{static_cast<double>(c.hops), delay_or_inf(c.delay_ms)};
  });
  for (InterfaceId e : view.interfaces()) {
    auto picks = take_eligible(ranked, candidates, e, view, k);
    if (!picks.empty()) sel.per_egress.emplace(e, std::move(picks));
  }
  sel.local.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size())));
  return sel;
}

void HeuristicDisjointness::forget_expired(Round now) {
  for (auto it = memory_.begin(); it != memory_.end();) {
    auto& entries = it->second;
    auto& taken = taken_[it->first];
    std::erase_if(entries, [&](const Remembered& m) {
      if (m.expiry > now) return false;
      for (const auto& l : m.links) {
        if (--taken[l] == 0) taken.erase(l);
      }
      return true;
    });
    if (entries.empty()) {
      taken_.erase(it->first);
      it = memory_.erase(it);
    } else {
      ++it;
    }
  }
  std::erase_if(propagated_, [&](const auto& p) { return p.second <= now; });
}

Selection HeuristicDisjointness::select(std::span<const Candidate> candidates, const TopologyView& view,
                                        const SelectionContext& ctx) {
  forget_expired(ctx.now);
  Selection sel;

  auto greedy = [&](InterfaceId slot, const std::vector<std::size_t>& pool,
                    const std::optional<AsLink>& egress_link) {
    std::vector<Ranked> out;
    std::vector<bool> used(pool.size(), false);
    while (out.size() < ctx.max_selected) {
      std::optional<std::size_t> best;
      OrderingKey best_key;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (used[i]) continue;
        const Candidate& c = candidates[pool[i]];
        const auto found = taken_.find({c.pcb->origin_as, slot});
        auto is_fresh = [&](const AsLink& l) { return found == taken_.end() || found->second.count(l) == 0; };
        std::size_t fresh = 0;
        for (const auto& l : c.links) fresh += is_fresh(l) ? 1 : 0;
        if (egress_link && is_fresh(*egress_link)) ++fresh;
        if (fresh == 0) continue;
        const double hops = static_cast<double>(c.hops + (egress_link ? 1 : 0));
        OrderingKey key{{-static_cast<double>(fresh), hops, delay_or_inf(c.delay_ms)}, c.created, c.digest};
        if (!best || key < best_key) {
          best = i;
          best_key = std::move(key);
        }
      }
      if (!best) break;
      used[*best] = true;
      const Candidate& c = candidates[pool[*best]];
      const Slot key{c.pcb->origin_as, slot};
      Remembered m{c.pcb->expiry_time, c.links};
      if (egress_link) m.links.push_back(*egress_link);
      auto& taken = taken_[key];
      for (const auto& l : m.links) ++taken[l];
      memory_[key].push_back(std::move(m));
      out.push_back({pool[*best], std::move(best_key)});
    }
    return out;
  };

  for (InterfaceId e : view.interfaces()) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!eligible(candidates[i], e, view)) continue;
      if (propagated_.count({candidates[i].digest, e})) continue;
      pool.push_back(i);
    }
    auto picks = greedy(e, pool, AsLink(view.local_as(), view.neighbor(e)));
    for (const auto& r : picks) {
      const Candidate& c = candidates[r.candidate];
      propagated_.emplace(std::make_pair(c.digest, e), c.pcb->expiry_time);
    }
    if (!picks.empty()) sel.per_egress.emplace(e, std::move(picks));
  }

  std::vector<std::size_t> all(candidates.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  sel.local = greedy(kLocal, all, std::nullopt);
  return sel;
}

Selection DelayOptimization::select(std::span<const Candidate> candidates, const TopologyView& view,
                                    const SelectionContext& ctx) {
  Selection sel;
  const std::size_t k = ctx.max_selected;
  const auto received = sorted_by(candidates, [](const Candidate& c) -> std::optional<std::vector<double>> {
    if (!c.delay_ms) return std::nullopt;
    return std::vector<double>{*c.delay_ms};
  });

  if (!extended_) {
    const std::vector<Ranked> top(received.begin(),
                                  received.begin() + static_cast<std::ptrdiff_t>(std::min(k, received.size())));
    for (InterfaceId e : view.interfaces()) {
      auto picks = take_eligible(top, candidates, e, view, k);
      if (!picks.empty()) sel.per_egress.emplace(e, std::move(picks));
    }
  } else {
    for (InterfaceId e : view.interfaces()) {
      const auto ranked = sorted_by(candidates, [&](const Candidate& c) -> std::optional<std::vector<double>> {
        if (!c.delay_ms || !eligible(c, e, view)) return std::nullopt;
        return std::vector<double>{*extended_metrics(c, e, view).delay_ms};
      });
      std::vector<Ranked> picks(ranked.begin(),
                                ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size())));
      if (!picks.empty()) sel.per_egress.emplace(e, std::move(picks));
    }
  }
  sel.local.assign(received.begin(), received.begin() + static_cast<std::ptrdiff_t>(std::min(k, received.size())));
  return sel;
}

bool is_builtin(std::string_view id) {
  return id == "1SP" || id == "5SP" || id == "LEG20" || id == "HD" || id == "DON" || id == "DOB";
}

std::unique_ptr<RoutingAlgorithm> make_builtin(std::string_view id, const std::string& instance_name) {
  if (id == "1SP") return std::make_unique<ShortestPaths>(instance_name, 1);
  if (id == "5SP") return std::make_unique<ShortestPaths>(instance_name, 5);
  if (id == "LEG20") return std::make_unique<ShortestPaths>(instance_name, 20);
  if (id == "HD") return std::make_unique<HeuristicDisjointness>();
  if (id == "DON") return std::make_unique<DelayOptimization>(instance_name, false);
  if (id == "DOB") return std::make_unique<DelayOptimization>(instance_name, true);
  throw Error(ErrorCode::ConfigError, "unknown built-in algorithm '" + std::string(id) + "'");
}

}  // namespace irec
