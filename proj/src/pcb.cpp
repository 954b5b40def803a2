#include "irec/pcb.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "byte_io.hpp"
#include "irec/error.hpp"

namespace irec {

namespace {

constexpr std::string_view kPcbMagic = "IRECPCB1";
constexpr std::string_view kHopDomain = "IRECHOP1";
constexpr std::string_view kPathDomain = "IRECPATH";

constexpr std::uint8_t kExtTarget = 0x01;
constexpr std::uint8_t kExtAlgorithm = 0x02;
constexpr std::uint8_t kExtGroup = 0x04;

void encode_header(detail::ByteWriter& w, const Pcb& pcb) {
  w.u64(pcb.origin_as.value);
  w.u16(pcb.origin_egress_if.value);
  w.u32(pcb.creation_time);
  w.u32(pcb.expiry_time);
}

void encode_extensions(detail::ByteWriter& w, const Extensions& ext) {
  std::uint8_t presence = 0;
  if (ext.target) presence |= kExtTarget;
  if (ext.algorithm) presence |= kExtAlgorithm;
  if (ext.group) presence |= kExtGroup;
  w.u8(presence);
  if (ext.target) w.u64(ext.target->target_as.value);
  if (ext.algorithm) {
    w.u8(static_cast<std::uint8_t>(ext.algorithm->algorithm_id.size()));
    w.raw(ext.algorithm->algorithm_id);
    w.raw(ext.algorithm->code_hash.bytes);
  }
  if (ext.group) w.u16(ext.group->group_id);
}

void encode_static_info(detail::ByteWriter& w, const StaticInfo& info) {
  w.u8(static_cast<std::uint8_t>(info.entry_count()));
  if (info.link_delay_ms) {
    w.u8(static_cast<std::uint8_t>(MetricId::LinkDelayMs));
    w.f64(*info.link_delay_ms);
  }
  if (info.intra_delay_ms) {
    w.u8(static_cast<std::uint8_t>(MetricId::IntraDelayMs));
    w.f64(*info.intra_delay_ms);
  }
  if (info.bandwidth_mbps) {
    w.u8(static_cast<std::uint8_t>(MetricId::LinkBandwidthMbps));
    w.f64(*info.bandwidth_mbps);
  }
  if (info.location) {
    w.u8(static_cast<std::uint8_t>(MetricId::Location));
    w.f64(info.location->lat_deg);
    w.f64(info.location->lon_deg);
  }
}

/// Hop fields without the signature.
void encode_hop_fields(detail::ByteWriter& w, const HopEntry& hop) {
  w.u64(hop.as_id.value);
  w.u8(hop.ingress_if ? 1 : 0);
  if (hop.ingress_if) w.u16(hop.ingress_if->value);
  w.u16(hop.egress_if.value);
  encode_static_info(w, hop.static_info);
}

/// Bytes covered by hop `index`'s signature.
Bytes signed_message(const Pcb& pcb, std::size_t index, const HopEntry& hop) {
  Bytes msg;
  msg.reserve(128);
  detail::ByteWriter w(msg);
  w.raw(kHopDomain);
  if (index == 0) {
    encode_header(w, pcb);
    encode_extensions(w, pcb.extensions);
  }
  encode_hop_fields(w, hop);
  if (index == 0) {
    w.u16(0);
  } else {
    const Bytes& prev = pcb.hops[index - 1].signature;
    w.u16(static_cast<std::uint16_t>(prev.size()));
    w.raw(prev);
  }
  return msg;
}

void check_algorithm_ext(const Extensions& ext) {
  if (ext.algorithm && ext.algorithm->algorithm_id.size() > kMaxAlgorithmIdBytes) {
    throw Error(ErrorCode::TooLarge, "algorithm id longer than 32 bytes");
  }
}

}  // namespace

std::size_t StaticInfo::entry_count() const {
  return (link_delay_ms ? 1 : 0) + (intra_delay_ms ? 1 : 0) + (bandwidth_mbps ? 1 : 0) +
         (location ? 1 : 0);
}

bool StaticInfo::valid() const {
  auto non_negative = [](const std::optional<double>& v) {
    return !v || (std::isfinite(*v) && *v >= 0.0);
  };
  if (!non_negative(link_delay_ms) || !non_negative(intra_delay_ms)) return false;
  if (bandwidth_mbps && !(std::isfinite(*bandwidth_mbps) && *bandwidth_mbps > 0.0)) return false;
  return !location || location->valid();
}

Bytes canonical_encode(const Pcb& pcb) {
  Bytes out;
  out.reserve(48 + pcb.hops.size() * 96);
  detail::ByteWriter w(out);
  w.raw(kPcbMagic);
  encode_header(w, pcb);
  encode_extensions(w, pcb.extensions);
  w.u16(static_cast<std::uint16_t>(pcb.hops.size()));
  for (const auto& hop : pcb.hops) {
    encode_hop_fields(w, hop);
    w.u16(static_cast<std::uint16_t>(hop.signature.size()));
    w.raw(hop.signature);
  }
  return out;
}

Pcb decode_pcb(ByteView bytes) {
  detail::ByteReader r(bytes, "PCB");
  r.expect_magic(kPcbMagic);
  Pcb pcb;
  pcb.origin_as = AsId(r.u64());
  pcb.origin_egress_if = InterfaceId(r.u16());
  pcb.creation_time = r.u32();
  pcb.expiry_time = r.u32();

  const std::uint8_t presence = r.u8();
  if ((presence & ~(kExtTarget | kExtAlgorithm | kExtGroup)) != 0) r.fail("unknown extension bits");
  if (presence & kExtTarget) pcb.extensions.target = TargetExt{AsId(r.u64())};
  if (presence & kExtAlgorithm) {
    AlgorithmExt alg;
    const std::uint8_t len = r.u8();
    if (len > kMaxAlgorithmIdBytes) r.fail("algorithm id longer than 32 bytes");
    const ByteView id = r.raw(len);
    alg.algorithm_id.assign(id.begin(), id.end());
    const ByteView hash = r.raw(32);
    std::copy(hash.begin(), hash.end(), alg.code_hash.bytes.begin());
    pcb.extensions.algorithm = std::move(alg);
  }
  if (presence & kExtGroup) pcb.extensions.group = InterfaceGroupExt{r.u16()};

  const std::uint16_t hop_count = r.u16();
  if (hop_count == 0) r.fail("PCB without hops");
  pcb.hops.reserve(hop_count);
  for (std::uint16_t i = 0; i < hop_count; ++i) {
    HopEntry hop;
    hop.as_id = AsId(r.u64());
    const std::uint8_t has_ingress = r.u8();
    if (has_ingress > 1) r.fail("bad ingress presence byte");
    if ((has_ingress == 1) != (i > 0)) r.fail("ingress interface must be absent exactly on the origin hop");
    if (has_ingress) hop.ingress_if = InterfaceId(r.u16());
    hop.egress_if = InterfaceId(r.u16());

    const std::uint8_t entries = r.u8();
    int last_id = 0;
    for (std::uint8_t e = 0; e < entries; ++e) {
      const std::uint8_t id = r.u8();
      if (id <= last_id) r.fail("static info entries not strictly sorted");
      last_id = id;
      switch (static_cast<MetricId>(id)) {
        case MetricId::LinkDelayMs: hop.static_info.link_delay_ms = r.f64(); break;
        case MetricId::IntraDelayMs: hop.static_info.intra_delay_ms = r.f64(); break;
        case MetricId::LinkBandwidthMbps: hop.static_info.bandwidth_mbps = r.f64(); break;
        case MetricId::Location: {
          GeoPoint g;
          g.lat_deg = r.f64();
          g.lon_deg = r.f64();
          hop.static_info.location = g;
          break;
        }
        default: r.fail("unknown metric id " + std::to_string(id));
      }
    }
    const std::uint16_t sig_len = r.u16();
    const ByteView sig = r.raw(sig_len);
    hop.signature.assign(sig.begin(), sig.end());
    pcb.hops.push_back(std::move(hop));
  }
  if (!r.done()) r.fail("trailing bytes");
  return pcb;
}

Digest pcb_digest(const Pcb& pcb) { return sha256(canonical_encode(pcb)); }

Digest path_key(const Pcb& pcb) {
  Bytes buf;
  buf.reserve(32 + pcb.hops.size() * 12);
  detail::ByteWriter w(buf);
  w.raw(kPathDomain);
  w.u64(pcb.origin_as.value);
  encode_extensions(w, pcb.extensions);
  for (const auto& hop : pcb.hops) {
    w.u64(hop.as_id.value);
    w.u16(hop.ingress_if ? hop.ingress_if->value : 0);
    w.u16(hop.egress_if.value);
  }
  return sha256(buf);
}

Pcb originate(const OriginSpec& spec, const Signer& signer, Round validity_cap) {
  if (spec.validity > validity_cap) {
    throw Error(ErrorCode::ValidityExceedsCap, "validity " + std::to_string(spec.validity) +
                                                   " exceeds cap " + std::to_string(validity_cap));
  }
  check_algorithm_ext(spec.extensions);
  Pcb pcb;
  pcb.origin_as = spec.origin;
  pcb.origin_egress_if = spec.egress_if;
  pcb.creation_time = spec.now;
  pcb.expiry_time = spec.now + spec.validity;
  pcb.extensions = spec.extensions;

  HopEntry hop;
  hop.as_id = spec.origin;
  hop.egress_if = spec.egress_if;
  hop.static_info = spec.static_info;
  hop.static_info.intra_delay_ms.reset();
  pcb.hops.push_back(hop);
  pcb.hops[0].signature = signer.sign(spec.origin, signed_message(pcb, 0, pcb.hops[0]));
  return pcb;
}

Pcb extend(const Pcb& pcb, const HopSpec& hop_spec, const Signer& signer,
           const ExtendOptions& options) {
  if (options.verify_existing) {
    const ChainStatus status = verify_chain(pcb, signer);
    if (!status.ok) {
      throw Error(ErrorCode::BadChain, "hop " + std::to_string(status.bad_hop) + " fails verification");
    }
  }
  if (contains_as(pcb, hop_spec.as_id)) {
    throw Error(ErrorCode::LoopDetected, "AS " + to_string(hop_spec.as_id) + " already on path");
  }
  const HopEntry& last = pcb.last_hop();
  if (options.link_check &&
      !options.link_check(last.as_id, last.egress_if, hop_spec.as_id, hop_spec.ingress_if)) {
    throw Error(ErrorCode::LinkMismatch, "interface " + to_string(hop_spec.ingress_if) + " of AS " +
                                             to_string(hop_spec.as_id) + " is not linked to AS " +
                                             to_string(last.as_id) + " interface " +
                                             to_string(last.egress_if));
  }

  Pcb out;
  out.origin_as = pcb.origin_as;
  out.origin_egress_if = pcb.origin_egress_if;
  out.creation_time = pcb.creation_time;
  out.expiry_time = pcb.expiry_time;
  out.extensions = pcb.extensions;
  out.hops.reserve(pcb.hops.size() + 1);
  out.hops = pcb.hops;
  HopEntry hop;
  hop.as_id = hop_spec.as_id;
  hop.ingress_if = hop_spec.ingress_if;
  hop.egress_if = hop_spec.egress_if;
  hop.static_info = hop_spec.static_info;
  const std::size_t index = out.hops.size();
  out.hops.push_back(std::move(hop));
  out.hops[index].signature = signer.sign(hop_spec.as_id, signed_message(out, index, out.hops[index]));
  return out;
}

ChainStatus verify_chain(const Pcb& pcb, const Signer& verifier) {
  if (pcb.hops.empty()) return ChainStatus::bad(0);
  for (std::size_t i = 0; i < pcb.hops.size(); ++i) {
    const HopEntry& hop = pcb.hops[i];
    if (i == 0 && (hop.as_id != pcb.origin_as || hop.egress_if != pcb.origin_egress_if ||
                   hop.ingress_if.has_value())) {
      return ChainStatus::bad(0);
    }
    if (i > 0 && !hop.ingress_if) return ChainStatus::bad(i);
    const Bytes msg = signed_message(pcb, i, hop);
    switch (verifier.verify(hop.as_id, msg, hop.signature)) {
      case VerifyStatus::Valid: break;
      case VerifyStatus::Invalid: return ChainStatus::bad(i);
      case VerifyStatus::UnknownKey:
        throw Error(ErrorCode::UnknownAsKey, "no key for AS " + to_string(hop.as_id));
    }
  }
  return ChainStatus::valid();
}

double accumulated_delay(const Pcb& pcb) {
  double total = 0.0;
  for (std::size_t i = 0; i < pcb.hops.size(); ++i) {
    const StaticInfo& info = pcb.hops[i].static_info;
    if (!info.link_delay_ms) {
      throw Error(ErrorCode::MissingMetric, "hop " + std::to_string(i) + " lacks link delay");
    }
    if (i > 0) {
      if (!info.intra_delay_ms) {
        throw Error(ErrorCode::MissingMetric, "hop " + std::to_string(i) + " lacks intra delay");
      }
      total += *info.intra_delay_ms;
    }
    total += *info.link_delay_ms;
  }
  return total;
}

bool contains_as(const Pcb& pcb, AsId as) {
  return std::any_of(pcb.hops.begin(), pcb.hops.end(),
                     [as](const HopEntry& h) { return h.as_id == as; });
}

bool has_repeated_as(const Pcb& pcb) {
  std::set<AsId> seen;
  for (const auto& hop : pcb.hops) {
    if (!seen.insert(hop.as_id).second) return true;
  }
  return false;
}

std::vector<AsId> path_ases(const Pcb& pcb) {
  std::vector<AsId> out;
  out.reserve(pcb.hops.size());
  for (const auto& hop : pcb.hops) out.push_back(hop.as_id);
  return out;
}

std::vector<AsLink> path_links(const Pcb& pcb, AsId terminal) {
  std::vector<AsLink> out;
  out.reserve(pcb.hops.size());
  for (std::size_t i = 0; i + 1 < pcb.hops.size(); ++i) {
    out.emplace_back(pcb.hops[i].as_id, pcb.hops[i + 1].as_id);
  }
  if (!pcb.hops.empty()) out.emplace_back(pcb.hops.back().as_id, terminal);
  return out;
}

}  // namespace irec
