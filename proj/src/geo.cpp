#include "geopath/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace geopath {

namespace {

struct Dms {
  double sign, deg, min, sec;
};

Dms split_axis(double value) {
  Dms d;
  d.sign = value < 0.0 ? -1.0 : 1.0;
  const double a = std::abs(value);
  d.deg = std::floor(a);
  double rem = (a - d.deg) * 60.0;
  d.min = std::floor(rem);
  d.sec = (rem - d.min) * 60.0;
  // Guard the rounding edge where a fractional part lands on 60 exactly.
  if (d.sec >= 60.0) {
    d.sec -= 60.0;
    d.min += 1.0;
  }
  if (d.min >= 60.0) {
    d.min -= 60.0;
    d.deg += 1.0;
  }
  return d;
}

}  // namespace

GeoVector encode_geo(double lat, double lon) {
  if (!(lat >= -90.0 && lat <= 90.0))
    throw std::invalid_argument("encode_geo: latitude " + std::to_string(lat) +
                                " outside [-90, 90]");
  if (!(lon >= -180.0 && lon <= 180.0))
    throw std::invalid_argument("encode_geo: longitude " + std::to_string(lon) +
                                " outside [-180, 180]");
  const Dms a = split_axis(lat);
  const Dms b = split_axis(lon);
  GeoVector v;
  v.sign_lat = a.sign;
  v.deg_lat = a.deg;
  v.min_lat = a.min;
  v.sec_lat = a.sec;
  v.sign_lon = b.sign;
  v.deg_lon = b.deg;
  v.min_lon = b.min;
  v.sec_lon = b.sec;
  return v;
}

std::pair<double, double> decode_geo(const GeoVector& v) {
  const double lat = v.sign_lat * (v.deg_lat + v.min_lat / 60.0 + v.sec_lat / 3600.0);
  const double lon = v.sign_lon * (v.deg_lon + v.min_lon / 60.0 + v.sec_lon / 3600.0);
  return {lat, lon};
}

GeoScheme parse_geo_scheme(const std::string& name) {
  if (name == "raw") return GeoScheme::Raw;
  if (name == "unit") return GeoScheme::Unit;
  throw std::invalid_argument("unknown geo scheme '" + name + "' (expected raw or unit)");
}

std::string geo_scheme_name(GeoScheme scheme) {
  return scheme == GeoScheme::Raw ? "raw" : "unit";
}

std::array<double, 8> normalize_geo(const GeoVector& v, GeoScheme scheme) {
  std::array<double, 8> out = v.to_array();
  if (scheme == GeoScheme::Unit) {
    out[1] /= 180.0;
    out[2] /= 60.0;
    out[3] /= 60.0;
    out[5] /= 180.0;
    out[6] /= 60.0;
    out[7] /= 60.0;
  }
  return out;
}

}  // namespace geopath
