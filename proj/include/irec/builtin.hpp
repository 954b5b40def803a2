#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "irec/algorithm.hpp"

namespace irec {

/// k minimum-hop paths per origin (1SP, 5SP, LEG20). Ties: delay, then
/// newer, then digest.
class ShortestPaths final : public RoutingAlgorithm {
 public:
  ShortestPaths(std::string name, std::size_t k) : name_(std::move(name)), k_(k) {}

  std::string_view name() const override { return name_; }
  Selection select(std::span<const Candidate> candidates, const TopologyView& view,
                   const SelectionContext& ctx) override;

 private:
  std::string name_;
  std::size_t k_;
};

/// Heuristic disjointness: greedy fresh-link maximization with memory of
/// the links already selected per (origin, egress) across rounds. A
/// selection is forgotten once its PCB expires.
class HeuristicDisjointness final : public RoutingAlgorithm {
 public:
  std::string_view name() const override { return "HD"; }
  Selection select(std::span<const Candidate> candidates, const TopologyView& view,
                   const SelectionContext& ctx) override;

  /// Egress slot used for the memory of the local (registration) selection.
  static constexpr InterfaceId kLocal{0};

 private:
  struct Remembered {
    Round expiry = 0;
    std::vector<AsLink> links;
  };
  using Slot = std::pair<AsId, InterfaceId>;

  void forget_expired(Round now);

  std::map<Slot, std::vector<Remembered>> memory_;
  std::map<Slot, std::map<AsLink, std::size_t>> taken_;  // link -> live selections using it
  std::map<std::pair<Digest, InterfaceId>, Round> propagated_;
};

/// Delay optimization. DON ranks received paths and broadcasts the same
/// choice on every egress; DOB ranks the paths extended to each egress.
class DelayOptimization final : public RoutingAlgorithm {
 public:
  DelayOptimization(std::string name, bool extended) : name_(std::move(name)), extended_(extended) {}

  std::string_view name() const override { return name_; }
  Selection select(std::span<const Candidate> candidates, const TopologyView& view,
                   const SelectionContext& ctx) override;

 private:
  std::string name_;
  bool extended_;
};

/// Reserved algorithm ids: 1SP, 5SP, LEG20, HD, DON, DOB. Throws ConfigError.
std::unique_ptr<RoutingAlgorithm> make_builtin(std::string_view id, const std::string& instance_name);
bool is_builtin(std::string_view id);

}  // namespace irec
