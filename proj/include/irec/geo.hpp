#pragma once

namespace irec {

inline constexpr double kEarthRadiusKm = 6371.0;
/// Signal speed in fiber, two thirds of c, in km/s.
inline constexpr double kFiberSpeedKmPerS = 299792.458 * 2.0 / 3.0;

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;

  bool valid() const;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Great-circle distance (haversine).
double haversine_km(const GeoPoint& a, const GeoPoint& b);

/// One-way propagation delay along the great circle at fiber speed.
double propagation_delay_ms(const GeoPoint& a, const GeoPoint& b);

}  // namespace irec
