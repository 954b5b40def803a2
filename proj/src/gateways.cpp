#include "irec/gateways.hpp"

#include <algorithm>

#include "irec/error.hpp"

namespace irec {

std::string_view reject_name(RejectReason r) {
  switch (r) {
    case RejectReason::BadChain: return "BadChain";
    case RejectReason::Expired: return "Expired";
    case RejectReason::PolicyViolation: return "PolicyViolation";
    case RejectReason::Loop: return "Loop";
  }
  return "?";
}

AcceptResult IngressDb::accept(const Pcb& pcb, Round now, const Signer& verifier,
                               const IngressPolicy& policy) {
  return accept(std::make_shared<const Pcb>(pcb), pcb_digest(pcb), now, verifier, policy);
}

AcceptResult IngressDb::accept(PcbPtr body, const Digest& digest, Round now, const Signer& verifier,
                               const IngressPolicy& policy) {
  using Kind = AcceptResult::Kind;
  const Pcb& pcb = *body;
  if (entries_.count(digest)) return {Kind::Duplicate, std::nullopt};
  if (pcb.expired_at(now)) return {Kind::Rejected, RejectReason::Expired};
  if (has_repeated_as(pcb) || contains_as(pcb, local_)) return {Kind::Rejected, RejectReason::Loop};
  try {
    if (!verify_chain(pcb, verifier).ok) return {Kind::Rejected, RejectReason::BadChain};
  } catch (const Error&) {
    return {Kind::Rejected, RejectReason::BadChain};
  }
  if (policy && !policy(pcb)) return {Kind::Rejected, RejectReason::PolicyViolation};

  const Digest path = path_key(pcb);
  if (auto it = newest_by_path_.find(path); it != newest_by_path_.end()) {
    const Pcb& old = *entries_.at(it->second).pcb;
    if (old.creation_time > pcb.creation_time ||
        (old.creation_time == pcb.creation_time && old.expiry_time >= pcb.expiry_time)) {
      return {Kind::Superseded, std::nullopt};
    }
    entries_.erase(it->second);
    newest_by_path_.erase(it);
  }
  entries_.emplace(digest, StoredPcb{std::move(body), digest, path, now});
  newest_by_path_.emplace(path, digest);
  return {Kind::Stored, std::nullopt};
}

std::vector<const StoredPcb*> IngressDb::query(const IngressQuery& q, Round now) const {
  std::vector<const StoredPcb*> out;
  for (const auto& [d, e] : entries_) {
    const Pcb& p = *e.pcb;
    if (p.expired_at(now) || p.origin_as != q.origin) continue;
    if (q.by_group) {
      const auto g = p.extensions.group ? std::optional<std::uint16_t>(p.extensions.group->group_id)
                                        : std::nullopt;
      if (g != q.group) continue;
    } else if (q.group && (!p.extensions.group || p.extensions.group->group_id != *q.group)) {
      continue;
    }
    if (q.by_target) {
      const auto t = p.extensions.target ? std::optional<AsId>(p.extensions.target->target_as) : std::nullopt;
      if (t != q.target) continue;
    } else if (q.target && (!p.extensions.target || p.extensions.target->target_as != *q.target)) {
      continue;
    }
    out.push_back(&e);
  }
  return out;
}

std::vector<const StoredPcb*> IngressDb::all(Round now) const {
  std::vector<const StoredPcb*> out;
  out.reserve(entries_.size());
  for (const auto& [d, e] : entries_) {
    if (!e.pcb->expired_at(now)) out.push_back(&e);
  }
  return out;
}

std::size_t IngressDb::purge(Round now, Round lookahead) {
  std::size_t removed = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.pcb->expiry_time <= now + lookahead) {
      newest_by_path_.erase(it->second.path);
      it = entries_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::set<InterfaceId> EgressDb::record(const Digest& digest, const std::set<InterfaceId>& egress_ifs,
                                       Round expiry) {
  Entry& e = seen_[digest];
  e.expiry = std::max(e.expiry, expiry);
  std::set<InterfaceId> added;
  for (InterfaceId i : egress_ifs) {
    if (e.ifs.insert(i).second) added.insert(i);
  }
  return added;
}

std::size_t EgressDb::purge(Round now) {
  return std::erase_if(seen_, [&](const auto& kv) { return kv.second.expiry <= now; });
}

const std::set<InterfaceId>* EgressDb::find(const Digest& d) const {
  auto it = seen_.find(d);
  return it == seen_.end() ? nullptr : &it->second.ifs;
}

Pcb originate_on(const Topology& topo, AsId origin, InterfaceId egress, const Extensions& exts, Round now,
                 Round validity, const Signer& signer, Round cap) {
  OriginSpec spec;
  spec.origin = origin;
  spec.egress_if = egress;
  spec.extensions = exts;
  spec.validity = validity;
  spec.now = now;
  spec.static_info = topo.hop_static_info(origin, std::nullopt, egress);
  return originate(spec, signer, cap);
}

std::set<InterfaceId> EgressGateway::submit(const Submission& sub) {
  for (InterfaceId i : sub.egress_ifs) {
    if (!topo_->find_interface(local_, i)) {
      throw Error(ErrorCode::UnknownEgressInterface,
                  "interface " + to_string(i) + " of AS " + to_string(local_));
    }
  }
  auto added = db_.record(sub.digest, sub.egress_ifs, sub.pcb->expiry_time);
  if (!added.empty()) pending_.push_back({sub, added});
  return added;
}

std::vector<Message> EgressGateway::propagate(Round now, const Signer& signer, EventLog* log) {
  std::vector<Message> out;
  std::vector<Pending> work;
  work.swap(pending_);
  ExtendOptions opts;
  opts.verify_existing = false;
  for (const auto& p : work) {
    const Pcb& pcb = *p.sub.pcb;
    if (pcb.extensions.target && pcb.extensions.target->target_as == local_) {
      Message m{Message::Kind::Return, local_, pcb.origin_as, pcb, p.sub.digest};
      if (log) log->add(now, local_, EventType::Return, p.sub.digest, "rac=" + p.sub.rac_id + " to=" + to_string(pcb.origin_as));
      out.push_back(std::move(m));
      continue;
    }
    for (InterfaceId e : p.newly_added) {
      const Interface& itf = topo_->interface(local_, e);
      if (contains_as(pcb, itf.peer_as)) continue;
      Pcb next;
      try {
        HopSpec hop{local_, p.sub.ingress_if, e, topo_->hop_static_info(local_, p.sub.ingress_if, e)};
        next = extend(pcb, hop, signer, opts);
      } catch (const Error&) {
        continue;
      }
      const Digest d = pcb_digest(next);
      if (log) {
        log->add(now, local_, EventType::Propagate, p.sub.digest,
                 "rac=" + p.sub.rac_id + " if=" + to_string(e) + " to=" + to_string(itf.peer_as) +
                     " out=" + to_hex(d));
      }
      out.push_back({Message::Kind::Beacon, local_, itf.peer_as, std::move(next), d});
    }
  }
  return out;
}

std::size_t PathRegistry::register_paths(const std::string& rac_id, const std::vector<RegistrationInput>& paths,
                                         const std::vector<std::string>& tags) {
  if (tags.empty()) throw std::invalid_argument("registration needs at least one criteria tag");
  std::vector<std::pair<RegistryKey, Digest>> touched;
  for (const auto& in : paths) {
    const Pcb& pcb = *in.pcb;
    RegistryKey key{rac_id, pcb.origin_as, pcb.extensions.group ? pcb.extensions.group->group_id : std::uint16_t{0}};
    auto& list = entries_[key];
    if (std::any_of(list.begin(), list.end(), [&](const RegisteredPath& r) { return r.digest == in.digest; })) {
      touched.emplace_back(key, in.digest);
      continue;
    }
    const Digest path = path_key(pcb);
    auto same = std::find_if(list.begin(), list.end(), [&](const RegisteredPath& r) { return r.path == path; });
    if (same != list.end()) {
      if (same->pcb->creation_time > pcb.creation_time) continue;
      list.erase(same);
    }
    RegisteredPath rec{in.pcb, in.digest, path, in.key, tags, in.ingress_if};
    auto pos = std::upper_bound(list.begin(), list.end(), rec,
                                [](const RegisteredPath& a, const RegisteredPath& b) { return a.key < b.key; });
    list.insert(pos, std::move(rec));
    if (list.size() > cap_) list.pop_back();
    touched.emplace_back(key, in.digest);
  }
  std::size_t accepted = 0;
  for (const auto& [key, d] : touched) {
    const auto& list = entries_[key];
    if (std::any_of(list.begin(), list.end(), [&](const RegisteredPath& r) { return r.digest == d; })) ++accepted;
  }
  return accepted;
}

std::size_t PathRegistry::purge(Round now) {
  std::size_t removed = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    removed += std::erase_if(it->second, [&](const RegisteredPath& r) { return r.pcb->expired_at(now); });
    it = it->second.empty() ? entries_.erase(it) : std::next(it);
  }
  return removed;
}

bool PathRegistry::empty() const { return entries_.empty(); }

std::size_t PathRegistry::size() const {
  std::size_t n = 0;
  for (const auto& [k, v] : entries_) n += v.size();
  return n;
}

namespace {

void bootstrap_visit(const Topology& topo, AsId as, std::size_t depth, std::set<AsId>& visited,
                     const std::function<std::vector<Pcb>(AsId)>& registered, std::vector<Pcb>& out) {
  for (AsId n : topo.neighbors(as)) {
    if (!visited.insert(n).second) continue;
    auto paths = registered(n);
    if (!paths.empty()) {
      out.insert(out.end(), paths.begin(), paths.end());
    } else if (depth > 1) {
      bootstrap_visit(topo, n, depth - 1, visited, registered, out);
    }
  }
}

}  // namespace

std::vector<Pcb> bootstrap_request(const Topology& topo, AsId requester, std::size_t depth_limit,
                                   const std::function<std::vector<Pcb>(AsId)>& registered) {
  if (depth_limit == 0) throw std::invalid_argument("depth_limit must be >= 1");
  std::set<AsId> visited{requester};
  std::vector<Pcb> out;
  bootstrap_visit(topo, requester, depth_limit, visited, registered, out);
  if (out.empty()) {
    throw Error(ErrorCode::Disconnected,
                "no paths within " + std::to_string(depth_limit) + " hops of AS " + to_string(requester));
  }
  return out;
}

FastPathLimiter::Decision FastPathLimiter::forward(const Pcb& pcb, Round now) {
  auto it = last_.find(pcb.origin_as);
  if (it != last_.end() && now < it->second + interval_) return Decision::RateLimited;
  last_[pcb.origin_as] = now;
  return Decision::Forward;
}

}  // namespace irec
