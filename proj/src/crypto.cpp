#include "irec/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>
#include <cstring>
#include <stdexcept>

namespace irec {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

MdCtx new_ctx() {
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx) throw std::bad_alloc();
  return ctx;
}

const EVP_MD* sha256_md() {
  // Explicit fetch avoids a provider lookup on every call.
  static EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
  return md;
}

}  // namespace

Digest sha256(ByteView data) {
  thread_local MdCtx ctx = new_ctx();
  Digest out;
  unsigned int len = 0;
  if (EVP_DigestInit_ex(ctx.get(), sha256_md(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.bytes.data(), &len) != 1 || len != 32) {
    throw std::runtime_error("SHA-256 failed");
  }
  return out;
}

// HMAC-SHA256 with the key's inner and outer pad blocks absorbed once.
struct KeyedHashSigner::PadState {
  MdCtx inner = new_ctx();
  MdCtx outer = new_ctx();

  explicit PadState(ByteView key) {
    std::array<std::uint8_t, 64> block{};
    if (key.size() > block.size()) {
      const Digest d = sha256(key);
      std::memcpy(block.data(), d.bytes.data(), d.bytes.size());
    } else if (!key.empty()) {
      std::memcpy(block.data(), key.data(), key.size());
    }
    std::array<std::uint8_t, 64> ipad, opad;
    for (std::size_t i = 0; i < block.size(); ++i) {
      ipad[i] = block[i] ^ 0x36;
      opad[i] = block[i] ^ 0x5c;
    }
    if (EVP_DigestInit_ex(inner.get(), sha256_md(), nullptr) != 1 ||
        EVP_DigestUpdate(inner.get(), ipad.data(), ipad.size()) != 1 ||
        EVP_DigestInit_ex(outer.get(), sha256_md(), nullptr) != 1 ||
        EVP_DigestUpdate(outer.get(), opad.data(), opad.size()) != 1) {
      throw std::runtime_error("HMAC-SHA256 setup failed");
    }
  }

  Digest mac(ByteView data) const {
    thread_local MdCtx work = new_ctx();
    Digest inner_hash, out;
    unsigned int len = 0;
    if (EVP_MD_CTX_copy_ex(work.get(), inner.get()) != 1 ||
        EVP_DigestUpdate(work.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(work.get(), inner_hash.bytes.data(), &len) != 1 ||
        EVP_MD_CTX_copy_ex(work.get(), outer.get()) != 1 ||
        EVP_DigestUpdate(work.get(), inner_hash.bytes.data(), inner_hash.bytes.size()) != 1 ||
        EVP_DigestFinal_ex(work.get(), out.bytes.data(), &len) != 1 || len != 32) {
      throw std::runtime_error("HMAC-SHA256 failed");
    }
    return out;
  }
};

Digest hmac_sha256(ByteView key, ByteView data) {
  Digest out;
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
           out.bytes.data(), &len) == nullptr ||
      len != 32) {
    throw std::runtime_error("HMAC-SHA256 failed");
  }
  return out;
}

KeyedHashSigner::KeyedHashSigner(std::uint64_t master_seed) {
  Bytes m(8);
  for (int i = 0; i < 8; ++i) m[i] = static_cast<std::uint8_t>(master_seed >> (56 - 8 * i));
  const Digest d = sha256(m);
  master_ = Bytes(d.bytes.begin(), d.bytes.end());
}

void KeyedHashSigner::add_key(AsId as, Bytes key) {
  std::lock_guard lock(states_mutex_);
  states_.erase(as);
  keys_[as] = std::move(key);
}

std::shared_ptr<const KeyedHashSigner::PadState> KeyedHashSigner::state_for(AsId as) const {
  std::lock_guard lock(states_mutex_);
  if (auto it = states_.find(as); it != states_.end()) return it->second;
  Bytes key;
  if (auto it = keys_.find(as); it != keys_.end()) {
    key = it->second;
  } else if (master_) {
    Bytes id(8);
    for (int i = 0; i < 8; ++i) id[i] = static_cast<std::uint8_t>(as.value >> (56 - 8 * i));
    const Digest d = hmac_sha256(*master_, id);
    key.assign(d.bytes.begin(), d.bytes.end());
  } else {
    return nullptr;
  }
  return states_.emplace(as, std::make_shared<const PadState>(key)).first->second;
}

Bytes KeyedHashSigner::sign(AsId as, ByteView message) const {
  const auto state = state_for(as);
  if (!state) throw std::invalid_argument("no signing key for AS " + std::to_string(as.value));
  const Digest d = state->mac(message);
  return Bytes(d.bytes.begin(), d.bytes.end());
}

VerifyStatus KeyedHashSigner::verify(AsId as, ByteView message, ByteView signature) const {
  const auto state = state_for(as);
  if (!state) return VerifyStatus::UnknownKey;
  const Digest d = state->mac(message);
  if (signature.size() != d.bytes.size()) return VerifyStatus::Invalid;
  return std::memcmp(signature.data(), d.bytes.data(), d.bytes.size()) == 0 ? VerifyStatus::Valid
                                                                            : VerifyStatus::Invalid;
}

}  // namespace irec
