#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "geopath/dataset.hpp"
#include "geopath/geo.hpp"
#include "geopath/policy.hpp"
#include "geopath/rewards.hpp"
#include "geopath/rng.hpp"

namespace py = pybind11;
using namespace geopath;

namespace {

Policy to_policy(const std::vector<int>& bits) {
  Policy p;
  p.bits.reserve(bits.size());
  for (int b : bits) p.bits.push_back(b ? 1 : 0);
  return p;
}

std::vector<int> from_policy(const Policy& p) {
  return std::vector<int>(p.bits.begin(), p.bits.end());
}

std::vector<Policy> to_policies(const std::vector<std::vector<int>>& ps) {
  std::vector<Policy> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(to_policy(p));
  return out;
}

}  // namespace

PYBIND11_MODULE(_geopath, m) {
  m.doc() = "Geo-conditioned dynamic inference-path selection: core operations";

  m.def(
      "encode_geo",
      [](double lat, double lon) {
        const auto a = encode_geo(lat, lon).to_array();
        return std::vector<double>(a.begin(), a.end());
      },
      py::arg("lat"), py::arg("lon"),
      "Encode decimal degrees as [sign, D, M, S] per axis (8 values).");

  m.def(
      "decode_geo",
      [](const std::vector<double>& v) {
        if (v.size() != 8) throw std::invalid_argument("decode_geo: expected 8 values");
        GeoVector g{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
        return decode_geo(g);
      },
      py::arg("vector"));

  m.def(
      "normalize_geo",
      [](const std::vector<double>& v, const std::string& scheme) {
        if (v.size() != 8) throw std::invalid_argument("normalize_geo: expected 8 values");
        GeoVector g{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
        const auto a = normalize_geo(g, parse_geo_scheme(scheme));
        return std::vector<double>(a.begin(), a.end());
      },
      py::arg("vector"), py::arg("scheme") = "unit");

  m.def(
      "sample_policy",
      [](const std::vector<double>& s, std::uint64_t seed) {
        Rng rng(seed);
        return from_policy(sample_policy(KeepProbs{s}, rng));
      },
      py::arg("keep_probs"), py::arg("seed"),
      "Bernoulli keep/skip draw per block; one rng draw per bit in index order.");

  m.def(
      "greedy_policy",
      [](const std::vector<double>& s) { return from_policy(greedy_policy(KeepProbs{s})); },
      py::arg("keep_probs"), "Bit n is 1 iff keep_probs[n] > 0.5.");

  m.def(
      "log_likelihood",
      [](const std::vector<double>& s, const std::vector<int>& bits) {
        return log_likelihood_value(KeepProbs{s}, to_policy(bits));
      },
      py::arg("keep_probs"), py::arg("policy"));

  m.def(
      "hamming_norm",
      [](const std::vector<int>& a, const std::vector<int>& b) {
        return hamming_norm(to_policy(a), to_policy(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "uniqueness",
      [](const std::vector<std::vector<int>>& ps, bool include_self) {
        return uniqueness(to_policies(ps), include_self);
      },
      py::arg("policies"), py::arg("include_self") = true);

  m.def(
      "diversity",
      [](const std::vector<std::vector<int>>& ps) { return diversity(to_policies(ps)); },
      py::arg("policies"), "Number of distinct policies in the set.");

  m.def(
      "unique_policies",
      [](const std::vector<std::vector<int>>& ps) {
        std::vector<std::vector<int>> out;
        for (const auto& p : unique_policies(to_policies(ps))) out.push_back(from_policy(p));
        return out;
      },
      py::arg("policies"));

  m.def(
      "reward",
      [](const std::vector<int>& p, double u, bool correct, double theta_s, double theta_d,
         double lam) {
        return reward(to_policy(p), u, correct, RewardConfig{theta_s, theta_d, lam});
      },
      py::arg("policy"), py::arg("u"), py::arg("correct"), py::arg("theta_s") = 0.5,
      py::arg("theta_d") = 0.5, py::arg("lambda") = 1.0);

  m.def("max_unique", &max_unique, py::arg("n"), py::arg("k"),
        "Exact binomial coefficient C(n, k).");

  m.def(
      "generate_dataset",
      [](const std::string& out_dir, int classes, double pair_fraction, int feature_dim,
         double visual_noise, double geo_radius_deg, int samples_per_class, std::uint64_t seed) {
        GenSpec spec;
        spec.classes = classes;
        spec.pair_fraction = pair_fraction;
        spec.feature_dim = feature_dim;
        spec.visual_noise = visual_noise;
        spec.geo_radius_deg = geo_radius_deg;
        spec.samples_per_class = samples_per_class;
        spec.seed = seed;
        const GeneratedData data = generate(spec);
        std::filesystem::create_directories(out_dir);
        const auto dir = std::filesystem::path(out_dir);
        save_csv(data.train, (dir / "train.csv").string());
        save_csv(data.eval, (dir / "eval.csv").string());
        py::dict out;
        out["train_rows"] = data.train.size();
        out["eval_rows"] = data.eval.size();
        std::vector<std::pair<int, int>> pairs;
        for (int c = 0; c < classes; ++c)
          if (data.pair_partner[static_cast<std::size_t>(c)] > c)
            pairs.emplace_back(c, data.pair_partner[static_cast<std::size_t>(c)]);
        out["pairs"] = pairs;
        return out;
      },
      py::arg("out_dir"), py::arg("classes") = 20, py::arg("pair_fraction") = 0.5,
      py::arg("feature_dim") = 32, py::arg("visual_noise") = 0.05,
      py::arg("geo_radius_deg") = 1.0, py::arg("samples_per_class") = 60, py::arg("seed") = 1,
      "Generate train/eval CSVs for the confusable geo-landmark benchmark.");

  m.attr("__version__") = "0.1.0";
}
