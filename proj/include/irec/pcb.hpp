#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "irec/crypto.hpp"
#include "irec/geo.hpp"
#include "irec/types.hpp"

namespace irec {

/// Default global hard cap on PCB validity: 24 h at a 10-minute round.
inline constexpr Round kDefaultValidityCap = 144;
inline constexpr std::size_t kMaxAlgorithmIdBytes = 32;

/// Metric identifiers as they appear on the wire, in encoding order.
enum class MetricId : std::uint8_t {
  LinkDelayMs = 1,
  IntraDelayMs = 2,
  LinkBandwidthMbps = 3,
  Location = 4,
};

/// Per-hop static info extension. Each metric is optional; present entries
/// are encoded sorted by MetricId.
struct StaticInfo {
  std::optional<double> link_delay_ms;   // egress link
  std::optional<double> intra_delay_ms;  // ingress -> egress crossing
  std::optional<double> bandwidth_mbps;  // egress link
  std::optional<GeoPoint> location;      // egress interface

  std::size_t entry_count() const;
  /// Range checks: delays >= 0, bandwidth > 0, coordinates in range.
  bool valid() const;

  friend bool operator==(const StaticInfo&, const StaticInfo&) = default;
};

struct TargetExt {
  AsId target_as;
  friend bool operator==(const TargetExt&, const TargetExt&) = default;
};

struct AlgorithmExt {
  std::string algorithm_id;  // <= 32 bytes
  Digest code_hash;
  friend bool operator==(const AlgorithmExt&, const AlgorithmExt&) = default;
};

struct InterfaceGroupExt {
  std::uint16_t group_id = 0;
  friend bool operator==(const InterfaceGroupExt&, const InterfaceGroupExt&) = default;
};

struct Extensions {
  std::optional<TargetExt> target;
  std::optional<AlgorithmExt> algorithm;
  std::optional<InterfaceGroupExt> group;

  friend bool operator==(const Extensions&, const Extensions&) = default;
};

struct HopEntry {
  AsId as_id;
  std::optional<InterfaceId> ingress_if;  // absent only on the origin hop
  InterfaceId egress_if;
  StaticInfo static_info;
  Bytes signature;

  friend bool operator==(const HopEntry&, const HopEntry&) = default;
};

/// Path-construction beacon. A value type: every operation returns a new PCB.
struct Pcb {
  AsId origin_as;
  InterfaceId origin_egress_if;
  Round creation_time = 0;
  Round expiry_time = 0;
  Extensions extensions;
  std::vector<HopEntry> hops;

  bool expired_at(Round now) const { return expiry_time <= now; }
  const HopEntry& last_hop() const { return hops.back(); }

  friend bool operator==(const Pcb&, const Pcb&) = default;
};

/// Deterministic binary encoding ("IRECPCB1" format, big-endian).
Bytes canonical_encode(const Pcb& pcb);
/// Strict structural decode of canonical_encode output. Throws ParseError.
Pcb decode_pcb(ByteView bytes);

Digest pcb_digest(const Pcb& pcb);

/// Identity of the path a PCB describes: origin, extensions and the
/// interface-level hop sequence. Copies of the same beacon originated in
/// different rounds share a path key.
Digest path_key(const Pcb& pcb);

struct OriginSpec {
  AsId origin;
  InterfaceId egress_if;
  Extensions extensions;
  Round validity = kDefaultValidityCap;
  Round now = 0;
  StaticInfo static_info;
};

/// Creates a signed one-hop PCB. Throws ValidityExceedsCap.
Pcb originate(const OriginSpec& spec, const Signer& signer, Round validity_cap = kDefaultValidityCap);

struct HopSpec {
  AsId as_id;
  InterfaceId ingress_if;
  InterfaceId egress_if;
  StaticInfo static_info;
};

/// Returns true iff (from_as, from_egress) is linked to (to_as, to_ingress).
using LinkCheck =
    std::function<bool(AsId from_as, InterfaceId from_egress, AsId to_as, InterfaceId to_ingress)>;

struct ExtendOptions {
  LinkCheck link_check;         // skipped when empty
  bool verify_existing = true;  // re-verify the chain before extending
};

/// Appends a signed hop. Throws LoopDetected, LinkMismatch or BadChain.
Pcb extend(const Pcb& pcb, const HopSpec& hop, const Signer& signer,
           const ExtendOptions& options = {});

struct ChainStatus {
  bool ok = true;
  std::size_t bad_hop = 0;  // first failing hop when !ok

  static ChainStatus valid() { return {}; }
  static ChainStatus bad(std::size_t hop) { return {false, hop}; }
};

/// Verifies every hop signature. Throws UnknownAsKey when the verifier has
/// no key for an on-path AS.
ChainStatus verify_chain(const Pcb& pcb, const Signer& verifier);

/// Sum over hops of intra delay (if present) plus egress link delay.
/// Throws MissingMetric.
double accumulated_delay(const Pcb& pcb);

bool contains_as(const Pcb& pcb, AsId as);
bool has_repeated_as(const Pcb& pcb);
std::vector<AsId> path_ases(const Pcb& pcb);
/// AS-level links of the path, including the final link into `terminal`.
std::vector<AsLink> path_links(const Pcb& pcb, AsId terminal);

}  // namespace irec
