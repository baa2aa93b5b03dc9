#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "geopath/geo.hpp"
#include "geopath/rng.hpp"

using namespace geopath;

TEST_CASE("origin encodes to zeros with +1 flags") {
  const GeoVector v = encode_geo(0.0, 0.0);
  const auto a = v.to_array();
  CHECK(a == std::array<double, 8>{1, 0, 0, 0, 1, 0, 0, 0});
}

TEST_CASE("DMS split of a real coordinate") {
  // 40.6892 N, 74.0445 W
  const GeoVector v = encode_geo(40.6892, -74.0445);
  CHECK(v.sign_lat == 1.0);
  CHECK(v.deg_lat == 40.0);
  CHECK(v.min_lat == 41.0);
  CHECK(v.sec_lat == doctest::Approx(21.12).epsilon(1e-9));
  CHECK(v.sign_lon == -1.0);
  CHECK(v.deg_lon == 74.0);
  CHECK(v.min_lon == 2.0);
  CHECK(v.sec_lon == doctest::Approx(40.2).epsilon(1e-9));
}

TEST_CASE("boundary coordinates decompose cleanly") {
  const GeoVector v = encode_geo(-90.0, 180.0);
  const auto a = v.to_array();
  CHECK(a == std::array<double, 8>{-1, 90, 0, 0, 1, 180, 0, 0});
}

TEST_CASE("out-of-range coordinates are rejected") {
  CHECK_THROWS_AS(encode_geo(90.0001, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(encode_geo(-91.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(encode_geo(0.0, 180.5), std::invalid_argument);
  CHECK_THROWS_AS(encode_geo(0.0, -200.0), std::invalid_argument);
  CHECK_THROWS_AS(encode_geo(std::nan(""), 0.0), std::invalid_argument);
}

TEST_CASE("round trip over random coordinates") {
  Rng rng(3141);
  for (int i = 0; i < 10000; ++i) {
    const double lat = uniform_range(rng, -90.0, 90.0);
    const double lon = uniform_range(rng, -180.0, 180.0);
    const GeoVector v = encode_geo(lat, lon);

    CHECK(v.deg_lat <= 90.0);
    CHECK(v.deg_lon <= 180.0);
    CHECK(v.min_lat >= 0.0);
    CHECK(v.min_lat < 60.0);
    CHECK(v.sec_lat >= 0.0);
    CHECK(v.sec_lat < 60.0);
    CHECK(v.min_lon < 60.0);
    CHECK(v.sec_lon < 60.0);
    CHECK(v.deg_lat == std::floor(v.deg_lat));
    CHECK(v.min_lat == std::floor(v.min_lat));

    const auto [rlat, rlon] = decode_geo(v);
    CHECK(std::abs(rlat - lat) < 1e-9);
    CHECK(std::abs(rlon - lon) < 1e-9);

    CHECK(v.sign_lat == (lat < 0.0 ? -1.0 : 1.0));
    CHECK(v.sign_lon == (lon < 0.0 ? -1.0 : 1.0));
  }
}

TEST_CASE("encode is pure") {
  const auto a = encode_geo(12.3456789, -98.7654321).to_array();
  const auto b = encode_geo(12.3456789, -98.7654321).to_array();
  CHECK(a == b);
}

TEST_CASE("raw scheme is the identity") {
  const GeoVector v = encode_geo(51.4778, -0.0015);
  CHECK(normalize_geo(v, GeoScheme::Raw) == v.to_array());
}

TEST_CASE("unit scheme divides out the component scales") {
  GeoVector v;
  v.sign_lat = 1;
  v.deg_lat = 180;  // synthetic: exercises the full degree range
  v.min_lat = 30;
  v.sec_lat = 30;
  v.sign_lon = 1;
  const auto n = normalize_geo(v, GeoScheme::Unit);
  CHECK(n == std::array<double, 8>{1, 1, 0.5, 0.5, 1, 0, 0, 0});
}

TEST_CASE("unit scheme output stays within [-1, 1]") {
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    const auto n = normalize_geo(
        encode_geo(uniform_range(rng, -90.0, 90.0), uniform_range(rng, -180.0, 180.0)),
        GeoScheme::Unit);
    for (double x : n) {
      CHECK(x >= -1.0);
      CHECK(x <= 1.0);
    }
  }
}

TEST_CASE("unknown scheme names are rejected") {
  CHECK_THROWS_AS(parse_geo_scheme("degrees"), std::invalid_argument);
  CHECK(parse_geo_scheme("raw") == GeoScheme::Raw);
  CHECK(parse_geo_scheme("unit") == GeoScheme::Unit);
}
