#pragma once

#include <array>
#include <string>
#include <utility>

namespace geopath {

// Degrees/minutes/seconds split of a coordinate with +-1 hemisphere flags.
// Seconds stay fractional so decode() inverts encode() exactly.
struct GeoVector {
  double sign_lat = 1.0;
  double deg_lat = 0.0;
  double min_lat = 0.0;
  double sec_lat = 0.0;
  double sign_lon = 1.0;
  double deg_lon = 0.0;
  double min_lon = 0.0;
  double sec_lon = 0.0;

  std::array<double, 8> to_array() const {
    return {sign_lat, deg_lat, min_lat, sec_lat, sign_lon, deg_lon, min_lon, sec_lon};
  }
};

// lat in [-90, 90], lon in [-180, 180]; out-of-range is rejected.
// Zero coordinates get a +1 flag.
GeoVector encode_geo(double lat, double lon);

std::pair<double, double> decode_geo(const GeoVector& v);

enum class GeoScheme {
  Raw,   // identity
  Unit,  // degrees / 180, minutes / 60, seconds / 60; signs untouched
};

GeoScheme parse_geo_scheme(const std::string& name);  // "raw" | "unit"
std::string geo_scheme_name(GeoScheme scheme);

std::array<double, 8> normalize_geo(const GeoVector& v, GeoScheme scheme);

}  // namespace geopath
