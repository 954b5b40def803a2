#include "irec/pd.hpp"

#include <limits>

#include "irec/error.hpp"

namespace irec {

std::vector<AsLink> pd_path_links(const PdState& state, const Pcb& pcb) {
  // Returned PCBs end at the target; seeds registered at the source run
  // from the target to the source.
  const AsId terminal = pcb.origin_as == state.source ? state.target : state.source;
  return path_links(pcb, terminal);
}

PdState pd_seed(AsId source, AsId target, const Pcb* seed, std::size_t goal_k, Round timeout_rounds) {
  PdState s;
  s.source = source;
  s.target = target;
  s.goal_k = goal_k;
  s.timeout_rounds = timeout_rounds;
  if (seed) {
    s.accepted.push_back(std::make_shared<const Pcb>(*seed));
    for (const auto& l : pd_path_links(s, *seed)) s.avoid_links.insert(l);
  }
  return s;
}

RoutingProgram pd_program(const PdState& state) {
  RoutingProgram p;
  if (!state.avoid_links.empty()) p.filters.emplace_back(AvoidLinks{state.avoid_links});
  p.objectives = {Objective::MinHops};
  p.select_k = 1;
  return p;
}

std::string pd_algorithm_id(const PdState& state) {
  return "PD/" + to_string(state.target) + "/" + std::to_string(state.iteration);
}

PdStepResult pd_step(PdState& state, const std::vector<std::pair<PcbPtr, Digest>>& returned, Round now) {
  PdStepResult out;
  if (state.terminated) return out;

  if (!returned.empty() && state.waiting) {
    const std::pair<PcbPtr, Digest>* best = nullptr;
    double best_delay = std::numeric_limits<double>::infinity();
    for (const auto& r : returned) {
      double d = std::numeric_limits<double>::infinity();
      try {
        d = accumulated_delay(*r.first);
      } catch (const Error&) {
      }
      if (!best || d < best_delay || (d == best_delay && r.second < best->second)) {
        best = &r;
        best_delay = d;
      }
    }
    state.accepted.push_back(best->first);
    for (const auto& l : pd_path_links(state, *best->first)) state.avoid_links.insert(l);
    ++state.iteration;
    state.waiting = false;
    out.accepted = true;
  } else if (state.waiting && now >= state.iteration_started + state.timeout_rounds) {
    state.terminated = true;
    state.waiting = false;
    return out;
  }

  if (state.waiting) return out;
  if (state.accepted.size() >= state.goal_k) {
    state.terminated = true;
    return out;
  }
  state.waiting = true;
  state.iteration_started = now;
  PdOrigination o;
  o.algorithm_id = pd_algorithm_id(state);
  o.program = pd_program(state);
  o.code_hash = program_hash(o.program);
  out.originate = std::move(o);
  return out;
}

}  // namespace irec
