#include <algorithm>
#include <cmath>
#include <numbers>

#include "irec/error.hpp"
#include "irec/geo.hpp"
#include "irec/types.hpp"

namespace irec {

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Digest digest_from_hex(const std::string& hex) {
  if (hex.size() != 64) throw Error(ErrorCode::ParseError, "digest must be 64 hex characters");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorCode::ParseError, std::string("bad hex character '") + c + "'");
  };
  Digest d;
  for (std::size_t i = 0; i < 32; ++i) {
    d.bytes[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return d;
}

std::string to_string(AsId as) { return std::to_string(as.value); }
std::string to_string(InterfaceId ifid) { return std::to_string(ifid.value); }

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownInterface: return "UnknownInterface";
    case ErrorCode::ValidityExceedsCap: return "ValidityExceedsCap";
    case ErrorCode::LoopDetected: return "LoopDetected";
    case ErrorCode::LinkMismatch: return "LinkMismatch";
    case ErrorCode::BadChain: return "BadChain";
    case ErrorCode::UnknownAsKey: return "UnknownAsKey";
    case ErrorCode::MissingMetric: return "MissingMetric";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateLink: return "DuplicateLink";
    case ErrorCode::InfeasibleParameters: return "InfeasibleParameters";
    case ErrorCode::UnknownEgressInterface: return "UnknownEgressInterface";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::HashMismatch: return "HashMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::StepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorCode::MemoryBudgetExceeded: return "MemoryBudgetExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownAs: return "UnknownAs";
    case ErrorCode::MissingResult: return "MissingResult";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return 3;
    case ErrorCode::DuplicateLink: return 3;
    case ErrorCode::ConfigError: return 4;
    case ErrorCode::IoError: return 5;
    case ErrorCode::MissingResult: return 6;
    case ErrorCode::InfeasibleParameters: return 7;
    default: return 1;
  }
}

bool GeoPoint::valid() const {
  return std::isfinite(lat_deg) && std::isfinite(lon_deg) && lat_deg >= -90.0 &&
         lat_deg <= 90.0 && lon_deg >= -180.0 && lon_deg <= 180.0;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double phi1 = a.lat_deg * kRad;
  const double phi2 = b.lat_deg * kRad;
  const double dphi = (b.lat_deg - a.lat_deg) * kRad;
  const double dlambda = (b.lon_deg - a.lon_deg) * kRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

double propagation_delay_ms(const GeoPoint& a, const GeoPoint& b) {
  return haversine_km(a, b) / kFiberSpeedKmPerS * 1000.0;
}

}  // namespace irec
