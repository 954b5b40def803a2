#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace irec {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Simulation round index. One round is one beaconing period.
using Round = std::uint32_t;

struct AsId {
  std::uint64_t value = 0;

  constexpr AsId() = default;
  constexpr explicit AsId(std::uint64_t v) : value(v) {}

  constexpr bool valid() const { return value != 0; }
  friend constexpr auto operator<=>(AsId, AsId) = default;
};

struct InterfaceId {
  std::uint16_t value = 0;

  constexpr InterfaceId() = default;
  constexpr explicit InterfaceId(std::uint16_t v) : value(v) {}

  constexpr bool valid() const { return value != 0; }
  friend constexpr auto operator<=>(InterfaceId, InterfaceId) = default;
};

/// Inter-domain link at AS granularity: an unordered AS pair, stored with
/// the smaller id first.
struct AsLink {
  AsId low;
  AsId high;

  constexpr AsLink() = default;
  constexpr AsLink(AsId a, AsId b) : low(a < b ? a : b), high(a < b ? b : a) {}

  friend constexpr auto operator<=>(const AsLink&, const AsLink&) = default;
};

/// 256-bit digest (SHA-256 output).
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  friend auto operator<=>(const Digest&, const Digest&) = default;
};

std::string to_hex(ByteView bytes);
inline std::string to_hex(const Digest& d) { return to_hex(ByteView{d.bytes}); }
Digest digest_from_hex(const std::string& hex);

std::string to_string(AsId as);
std::string to_string(InterfaceId ifid);

}  // namespace irec

template <>
struct std::hash<irec::AsId> {
  std::size_t operator()(irec::AsId a) const noexcept {
    return std::hash<std::uint64_t>{}(a.value);
  }
};

template <>
struct std::hash<irec::Digest> {
  std::size_t operator()(const irec::Digest& d) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | d.bytes[i];
    return h;
  }
};
