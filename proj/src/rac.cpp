#include "irec/rac.hpp"

#include <algorithm>

#include "irec/builtin.hpp"
#include "irec/crypto.hpp"
#include "irec/error.hpp"

namespace irec {

void RacConfig::validate() const {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::ConfigError, "rac '" + rac_id + "': " + why); };
  if (rac_id.empty() || rac_id.size() > kMaxAlgorithmIdBytes) fail("id must be 1-32 bytes");
  if (period == 0) fail("period must be positive");
  if (max_selected == 0) fail("max_selected must be positive");
  if (limits.max_steps == 0 || limits.max_memory_items == 0 || limits.max_program_bytes == 0) {
    fail("execution limits must be positive");
  }
  if (group_km && !(*group_km > 0.0)) fail("group_km must be positive");
  if (kind == RacKind::Static) {
    if (algorithm == "program") {
      if (!program) fail("algorithm=program needs a program");
    } else if (!is_builtin(algorithm)) {
      fail("unknown algorithm '" + algorithm + "'");
    }
  } else if (!algorithm.empty() || program) {
    fail("on-demand RACs take their algorithms from PCBs");
  }
}

std::vector<std::string> RacConfig::tags() const {
  if (!criteria_tags.empty()) return criteria_tags;
  if (kind == RacKind::OnDemand) return {"on-demand"};
  return {algorithm == "program" ? rac_id : algorithm};
}

std::string static_descriptor(const RacConfig& cfg) {
  std::string d = "irec-static:" + cfg.algorithm;
  if (cfg.program) d += ":" + program_to_text(*cfg.program);
  return d;
}

Digest static_code_hash(const RacConfig& cfg) {
  const std::string d = static_descriptor(cfg);
  return sha256(ByteView(reinterpret_cast<const std::uint8_t*>(d.data()), d.size()));
}

void AlgorithmStore::publish(AsId origin, const std::string& algorithm_id, Bytes program,
                             std::size_t max_program_bytes) {
  if (program.size() > max_program_bytes) {
    throw Error(ErrorCode::TooLarge, "program '" + algorithm_id + "' has " + std::to_string(program.size()) + " bytes");
  }
  programs_[{origin, algorithm_id}] = std::move(program);
}

const Bytes& AlgorithmStore::fetch(AsId origin, const std::string& algorithm_id) const {
  ++accesses_;
  auto it = programs_.find({origin, algorithm_id});
  if (it == programs_.end()) {
    throw Error(ErrorCode::NotFound, "AS " + to_string(origin) + " publishes no program '" + algorithm_id + "'");
  }
  return it->second;
}

const RoutingProgram* AlgorithmCache::find(const Key& key) const {
  auto it = programs_.find(key);
  return it == programs_.end() ? nullptr : it->second.get();
}

const RoutingProgram& AlgorithmCache::insert(const Key& key, RoutingProgram program) {
  auto& slot = programs_[key];
  slot = std::make_shared<const RoutingProgram>(std::move(program));
  return *slot;
}

const RoutingProgram& fetch_algorithm(AsId origin, const std::string& algorithm_id, const Digest& expected_hash,
                                      const AlgorithmStore& store, AlgorithmCache& cache,
                                      const ExecutionLimits& limits) {
  const AlgorithmCache::Key key{origin, algorithm_id, expected_hash};
  if (const RoutingProgram* hit = cache.find(key)) return *hit;
  const Bytes& bytes = store.fetch(origin, algorithm_id);
  if (bytes.size() > limits.max_program_bytes) {
    throw Error(ErrorCode::TooLarge, "program '" + algorithm_id + "' has " + std::to_string(bytes.size()) + " bytes");
  }
  if (sha256(bytes) != expected_hash) {
    throw Error(ErrorCode::HashMismatch, "program '" + algorithm_id + "' of AS " + to_string(origin));
  }
  return cache.insert(key, parse_program(bytes, limits.max_program_bytes));
}

std::vector<Partition> partition_candidates(const std::vector<const StoredPcb*>& phi, const RacConfig& cfg) {
  std::map<PartitionKey, std::vector<const StoredPcb*>> groups;
  for (const StoredPcb* sp : phi) {
    const Extensions& ext = sp->pcb->extensions;
    PartitionKey key;
    key.origin = sp->pcb->origin_as;
    if (cfg.partition_by_group && ext.group) key.group = ext.group->group_id;
    if (cfg.partition_by_target && ext.target) key.target = ext.target->target_as;
    if (cfg.kind == RacKind::OnDemand && ext.algorithm) {
      key.algorithm = std::make_pair(ext.algorithm->algorithm_id, ext.algorithm->code_hash);
    }
    groups[key].push_back(sp);
  }
  std::vector<Partition> out;
  out.reserve(groups.size());
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(),
              [](const StoredPcb* a, const StoredPcb* b) { return a->digest < b->digest; });
    out.push_back({key, std::move(members)});
  }
  return out;
}

RacInstance::RacInstance(RacConfig cfg, std::set<std::string> static_tags)
    : cfg_(std::move(cfg)), static_tags_(std::move(static_tags)) {
  cfg_.validate();
  if (cfg_.kind == RacKind::Static) {
    if (cfg_.algorithm == "program") {
      static_alg_ = std::make_unique<ProgramAlgorithm>(cfg_.rac_id, *cfg_.program, cfg_.limits);
    } else {
      static_alg_ = make_builtin(cfg_.algorithm, cfg_.rac_id);
    }
  }
}

bool RacInstance::wants(const Pcb& pcb) const {
  const auto& alg = pcb.extensions.algorithm;
  if (cfg_.kind == RacKind::Static) return alg && alg->algorithm_id == cfg_.rac_id;
  return alg && static_tags_.count(alg->algorithm_id) == 0;
}

std::vector<Submission> RacInstance::tick(const std::vector<const StoredPcb*>& snapshot, const Context& ctx) {
  errors_.clear();
  std::vector<Submission> subs;
  const TopologyView& view = *ctx.view;
  const AsId local = view.local_as();

  std::vector<const StoredPcb*> phi;
  for (const StoredPcb* sp : snapshot) {
    if (wants(*sp->pcb)) phi.push_back(sp);
  }
  if (phi.empty()) return subs;

  for (const Partition& part : partition_candidates(phi, cfg_)) {
    std::vector<Candidate> cands;
    std::vector<const StoredPcb*> origin_of;
    cands.reserve(part.members.size());
    for (const StoredPcb* sp : part.members) {
      if (auto c = make_candidate(*sp->pcb, sp->digest, view)) {
        cands.push_back(std::move(*c));
        origin_of.push_back(sp);
      }
    }
    if (cands.empty()) continue;

    Selection sel;
    std::string reg_id = cfg_.rac_id;
    try {
      if (static_alg_) {
        sel = static_alg_->select(cands, view, {cfg_.max_selected, ctx.now});
      } else {
        const auto& [alg_id, hash] = *part.key.algorithm;
        const RoutingProgram& prog = fetch_algorithm(part.key.origin, alg_id, hash, *ctx.store, *ctx.cache, cfg_.limits);
        ProgramAlgorithm runner(alg_id, prog, cfg_.limits);
        sel = runner.select(cands, view, {cfg_.max_selected, ctx.now});
        reg_id += "/" + alg_id;
      }
    } catch (const Error& e) {
      errors_.push_back("origin " + to_string(part.key.origin) + ": " + e.what());
      continue;
    }

    std::map<std::size_t, std::set<InterfaceId>> per_pcb;
    for (const auto& [egress, ranked] : sel.per_egress) {
      const std::size_t n = std::min(ranked.size(), cfg_.max_selected);
      for (std::size_t i = 0; i < n; ++i) {
        const Candidate& c = cands[ranked[i].candidate];
        if (c.pcb->extensions.target && c.pcb->extensions.target->target_as == local) continue;
        if (!eligible(c, egress, view)) continue;
        per_pcb[ranked[i].candidate].insert(egress);
      }
    }

    std::vector<RegistrationInput> reg;
    const std::size_t nlocal = std::min(sel.local.size(), cfg_.max_selected);
    for (std::size_t i = 0; i < nlocal; ++i) {
      const Ranked& r = sel.local[i];
      const Candidate& c = cands[r.candidate];
      const auto& target = c.pcb->extensions.target;
      if (target && target->target_as == local) {
        auto& ifs = per_pcb[r.candidate];
        ifs.insert(view.interfaces().begin(), view.interfaces().end());
      } else if (!target) {
        reg.push_back({origin_of[r.candidate]->pcb, c.digest, r.key, c.ingress});
      }
    }

    for (auto& [idx, ifs] : per_pcb) {
      if (ifs.empty()) continue;
      const StoredPcb* sp = origin_of[idx];
      subs.push_back({cfg_.rac_id, sp->pcb, sp->digest, cands[idx].ingress, std::move(ifs)});
    }

    if (!reg.empty() && ctx.registry) {
      const std::size_t accepted = ctx.registry->register_paths(reg_id, reg, cfg_.tags());
      if (ctx.log) {
        ctx.log->add(ctx.now, local, EventType::Register, reg.front().digest,
                     "rac=" + reg_id + " origin=" + to_string(part.key.origin) +
                         " offered=" + std::to_string(reg.size()) + " accepted=" + std::to_string(accepted));
      }
    }
  }
  return subs;
}

}  // namespace irec
