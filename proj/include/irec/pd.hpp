#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "irec/gateways.hpp"
#include "irec/program.hpp"

namespace irec {

/// Pull-based disjointness controller of one (source, target) pair.
struct PdState {
  AsId source;
  AsId target;
  std::vector<PcbPtr> accepted;  // pairwise link-disjoint
  std::set<AsLink> avoid_links;  // union of the accepted paths' links
  std::uint32_t iteration = 0;
  std::size_t goal_k = 20;
  Round timeout_rounds = 16;
  Round iteration_started = 0;
  bool waiting = false;
  bool terminated = false;
};

/// AS-level links of an accepted path (origin = source, last hop before
/// the target).
std::vector<AsLink> pd_path_links(const PdState& state, const Pcb& pcb);

/// Starts a controller, optionally seeded with one known path between the
/// pair (its links become the initial avoid set).
PdState pd_seed(AsId source, AsId target, const Pcb* seed, std::size_t goal_k = 20, Round timeout_rounds = 16);

RoutingProgram pd_program(const PdState& state);
std::string pd_algorithm_id(const PdState& state);

struct PdOrigination {
  std::string algorithm_id;
  RoutingProgram program;
  Digest code_hash;
};

struct PdStepResult {
  std::optional<PdOrigination> originate;
  bool accepted = false;
};

/// Advances the controller by one round. `returned` must hold only PCBs of
/// the current iteration. The first-received rule picks the return with
/// minimum accumulated delay, then minimum digest.
PdStepResult pd_step(PdState& state, const std::vector<std::pair<PcbPtr, Digest>>& returned, Round now);

}  // namespace irec
