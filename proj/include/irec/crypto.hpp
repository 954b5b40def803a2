#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "irec/types.hpp"

namespace irec {

Digest sha256(ByteView data);
Digest hmac_sha256(ByteView key, ByteView data);

enum class VerifyStatus { Valid, Invalid, UnknownKey };

/// Pluggable hop signer. Implementations must be deterministic for a fixed
/// key set so that simulation runs are reproducible.
class Signer {
 public:
  virtual ~Signer() = default;

  virtual Bytes sign(AsId as, ByteView message) const = 0;
  virtual VerifyStatus verify(AsId as, ByteView message, ByteView signature) const = 0;
};

/// Test signer: HMAC-SHA256 under a per-AS secret key.
///
/// Keys are either registered explicitly or, when a master secret is set,
/// derived as HMAC(master, as_id). With neither, unknown ASes report
/// VerifyStatus::UnknownKey.
class KeyedHashSigner final : public Signer {
 public:
  KeyedHashSigner() = default;
  explicit KeyedHashSigner(std::uint64_t master_seed);

  void add_key(AsId as, Bytes key);

  Bytes sign(AsId as, ByteView message) const override;
  VerifyStatus verify(AsId as, ByteView message, ByteView signature) const override;

 private:
  struct PadState;
  std::shared_ptr<const PadState> state_for(AsId as) const;

  std::map<AsId, Bytes> keys_;
  std::optional<Bytes> master_;
  mutable std::mutex states_mutex_;
  mutable std::map<AsId, std::shared_ptr<const PadState>> states_;
};

}  // namespace irec
