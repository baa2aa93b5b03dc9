#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geopath/geo.hpp"
#include "geopath/rng.hpp"
#include "geopath/tensor.hpp"

namespace geopath {

struct LandmarkSample {
  long long id = 0;
  int label = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::vector<double> features;
};

struct Dataset {
  int feature_dim = 0;
  int classes = 0;  // max label + 1
  std::vector<LandmarkSample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }

  // Bxd feature matrix for the given sample indices.
  Tensor2 feature_matrix(const std::vector<std::size_t>& idx) const;
  // Bx8 normalized geo matrix.
  Tensor2 geo_matrix(const std::vector<std::size_t>& idx, GeoScheme scheme) const;
  std::vector<int> labels(const std::vector<std::size_t>& idx) const;
};

// Synthetic geo-landmark generator: every class gets a visual centroid and a
// geographic cluster; a configurable share of classes is arranged in
// confusable pairs that share one visual centroid but sit in geo clusters at
// least 10 cluster radii apart.
struct GenSpec {
  int classes = 20;
  double pair_fraction = 0.5;
  int feature_dim = 32;
  double visual_noise = 0.05;       // sigma of the Gaussian feature jitter
  double geo_radius_deg = 1.0;      // half-width of the uniform geo jitter
  int samples_per_class = 60;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GeneratedData {
  Dataset train;
  Dataset eval;
  // Class index -> partner class for confusable pairs; -1 when unpaired.
  std::vector<int> pair_partner;
};

GeneratedData generate(const GenSpec& spec);

// CSV with exact header id,label,lat,lon,f0,...,f{d-1}; LF line endings,
// 17 significant digits.
void save_csv(const Dataset& ds, const std::string& path);

// Rejects malformed rows, wrong column counts and out-of-range coordinates,
// reporting the offending 1-based row number.
Dataset load_csv(const std::string& path);

}  // namespace geopath
