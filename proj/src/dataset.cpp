#include "geopath/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "geopath/geo.hpp"

namespace geopath {

Tensor2 Dataset::feature_matrix(const std::vector<std::size_t>& idx) const {
  Tensor2 x(static_cast<int>(idx.size()), feature_dim);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& f = samples[idx[i]].features;
    for (int j = 0; j < feature_dim; ++j) x.at(static_cast<int>(i), j) = f[static_cast<std::size_t>(j)];
  }
  return x;
}

Tensor2 Dataset::geo_matrix(const std::vector<std::size_t>& idx, GeoScheme scheme) const {
  Tensor2 x(static_cast<int>(idx.size()), 8);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& s = samples[idx[i]];
    const auto v = normalize_geo(encode_geo(s.lat, s.lon), scheme);
    for (int j = 0; j < 8; ++j) x.at(static_cast<int>(i), j) = v[static_cast<std::size_t>(j)];
  }
  return x;
}

std::vector<int> Dataset::labels(const std::vector<std::size_t>& idx) const {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = samples[idx[i]].label;
  return out;
}

void GenSpec::validate() const {
  if (classes < 1) throw std::invalid_argument("GenSpec: classes must be >= 1");
  if (!(pair_fraction >= 0.0 && pair_fraction <= 1.0))
    throw std::invalid_argument("GenSpec: infeasible, pair_fraction must lie in [0, 1]");
  if (feature_dim < 1) throw std::invalid_argument("GenSpec: feature_dim must be >= 1");
  if (!(visual_noise > 0.0)) throw std::invalid_argument("GenSpec: visual_noise must be > 0");
  if (!(geo_radius_deg > 0.0)) throw std::invalid_argument("GenSpec: geo_radius_deg must be > 0");
  if (samples_per_class < 1)
    throw std::invalid_argument("GenSpec: samples_per_class must be >= 1");
}

GeneratedData generate(const GenSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  const int c = spec.classes;
  const int d = spec.feature_dim;
  // Even count of paired classes; pair_fraction in [0,1] cannot exceed C.
  const int n_paired = 2 * static_cast<int>(std::floor(c * spec.pair_fraction / 2.0 + 1e-9));

  // Visual centroids: paired classes share one, everyone else is distinct.
  std::vector<std::vector<double>> vis(static_cast<std::size_t>(c));
  std::vector<int> partner(static_cast<std::size_t>(c), -1);
  for (int k = 0; k < n_paired; k += 2) {
    std::vector<double> centroid(static_cast<std::size_t>(d));
    for (auto& v : centroid) v = uniform_range(rng, -1.0, 1.0);
    vis[static_cast<std::size_t>(k)] = centroid;
    vis[static_cast<std::size_t>(k + 1)] = centroid;
    partner[static_cast<std::size_t>(k)] = k + 1;
    partner[static_cast<std::size_t>(k + 1)] = k;
  }
  for (int k = n_paired; k < c; ++k) {
    std::vector<double> centroid(static_cast<std::size_t>(d));
    for (auto& v : centroid) v = uniform_range(rng, -1.0, 1.0);
    vis[static_cast<std::size_t>(k)] = centroid;
  }

  // Geo centroids, margined away from the poles/antimeridian so jittered
  // samples stay in range. Pair partners must sit >= 10 radii apart.
  const double margin = std::max(1.0, spec.geo_radius_deg);
  const double lat_lo = -90.0 + margin, lat_hi = 90.0 - margin;
  const double lon_lo = -180.0 + margin, lon_hi = 180.0 - margin;
  const double min_pair_dist = 10.0 * spec.geo_radius_deg;
  std::vector<std::pair<double, double>> geo(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) {
    double lat = uniform_range(rng, lat_lo, lat_hi);
    double lon = uniform_range(rng, lon_lo, lon_hi);
    if (partner[static_cast<std::size_t>(k)] >= 0 && partner[static_cast<std::size_t>(k)] < k) {
      const auto& other = geo[static_cast<std::size_t>(partner[static_cast<std::size_t>(k)])];
      while (std::hypot(lat - other.first, lon - other.second) < min_pair_dist) {
        lat = uniform_range(rng, lat_lo, lat_hi);
        lon = uniform_range(rng, lon_lo, lon_hi);
      }
    }
    geo[static_cast<std::size_t>(k)] = {lat, lon};
  }

  const int n_eval = std::max(1, static_cast<int>(std::lround(spec.samples_per_class * 0.10)));
  if (n_eval >= spec.samples_per_class && spec.samples_per_class > 1)
    throw std::invalid_argument("GenSpec: infeasible eval split");

  GeneratedData out;
  out.train.feature_dim = d;
  out.train.classes = c;
  out.eval.feature_dim = d;
  out.eval.classes = c;
  out.pair_partner = partner;

  long long next_id = 0;
  for (int k = 0; k < c; ++k) {
    for (int i = 0; i < spec.samples_per_class; ++i) {
      LandmarkSample s;
      s.id = next_id++;
      s.label = k;
      s.features.resize(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j)
        s.features[static_cast<std::size_t>(j)] =
            vis[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] +
            spec.visual_noise * normal01(rng);
      s.lat = geo[static_cast<std::size_t>(k)].first +
              uniform_range(rng, -spec.geo_radius_deg, spec.geo_radius_deg);
      s.lon = geo[static_cast<std::size_t>(k)].second +
              uniform_range(rng, -spec.geo_radius_deg, spec.geo_radius_deg);
      // Last tenth of each class goes to eval (stratified 90/10).
      if (spec.samples_per_class == 1 || i < spec.samples_per_class - n_eval)
        out.train.samples.push_back(std::move(s));
      else
        out.eval.samples.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, std::size_t row, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("row " + std::to_string(row) + ": malformed " + what + " '" +
                             field + "'");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  out << "id,label,lat,lon";
  for (int j = 0; j < ds.feature_dim; ++j) out << ",f" << j;
  out << "\n";
  for (const auto& s : ds.samples) {
    out << s.id << "," << s.label << "," << format_number(s.lat) << "," << format_number(s.lon);
    for (double f : s.features) out << "," << format_number(f);
    out << "\n";
  }
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("row 1: missing header in " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "label" || header[2] != "lat" ||
      header[3] != "lon")
    throw std::runtime_error("row 1: malformed header '" + line + "'");
  const int d = static_cast<int>(header.size()) - 4;
  for (int j = 0; j < d; ++j)
    if (header[static_cast<std::size_t>(4 + j)] != "f" + std::to_string(j))
      throw std::runtime_error("row 1: malformed header, expected f" + std::to_string(j));

  Dataset ds;
  ds.feature_dim = d;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != static_cast<std::size_t>(4 + d))
      throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                               std::to_string(4 + d) + " columns, got " +
                               std::to_string(fields.size()));
    LandmarkSample s;
    s.id = static_cast<long long>(parse_double(fields[0], row, "id"));
    const double label = parse_double(fields[1], row, "label");
    if (label < 0 || label != std::floor(label))
      throw std::runtime_error("row " + std::to_string(row) + ": label must be a non-negative integer");
    s.label = static_cast<int>(label);
    s.lat = parse_double(fields[2], row, "lat");
    s.lon = parse_double(fields[3], row, "lon");
    if (!(s.lat >= -90.0 && s.lat <= 90.0))
      throw std::runtime_error("row " + std::to_string(row) + ": latitude " + fields[2] +
                               " outside [-90, 90]");
    if (!(s.lon >= -180.0 && s.lon <= 180.0))
      throw std::runtime_error("row " + std::to_string(row) + ": longitude " + fields[3] +
                               " outside [-180, 180]");
    s.features.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      s.features.push_back(parse_double(fields[static_cast<std::size_t>(4 + j)], row,
                                        "f" + std::to_string(j)));
    ds.classes = std::max(ds.classes, s.label + 1);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace geopath
