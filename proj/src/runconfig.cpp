#include "geopath/runconfig.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace geopath {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& prefix) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw std::runtime_error("invalid config key: " + prefix + item.key());
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& prefix) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("invalid config value for " + prefix + key);
  }
}

}  // namespace

void RunConfig::validate() const {
  dataset.validate();
  if (n_blocks < 1) throw std::invalid_argument("RunConfig: n_blocks must be >= 1");
  if (hidden_dim < 1) throw std::invalid_argument("RunConfig: hidden_dim must be >= 1");
  if (img_hidden < 1) throw std::invalid_argument("RunConfig: img_hidden must be >= 1");
  train.validate();
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  check_keys(j, {"seed", "remove_mlp", "remove_u", "geo_scheme", "dataset", "network", "policy",
                 "reward", "train"},
             "");

  std::uint64_t seed = cfg.train.seed;
  read(j, "seed", seed, "");
  cfg.train.seed = seed;
  cfg.dataset.seed = seed;
  read(j, "remove_mlp", cfg.train.remove_mlp, "");
  read(j, "remove_u", cfg.train.remove_u, "");
  if (j.contains("geo_scheme")) {
    std::string scheme;
    read(j, "geo_scheme", scheme, "");
    cfg.train.geo_scheme = parse_geo_scheme(scheme);
  }

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    check_keys(d, {"classes", "pair_fraction", "feature_dim", "visual_noise", "geo_radius_deg",
                   "samples_per_class"},
               "dataset.");
    read(d, "classes", cfg.dataset.classes, "dataset.");
    read(d, "pair_fraction", cfg.dataset.pair_fraction, "dataset.");
    read(d, "feature_dim", cfg.dataset.feature_dim, "dataset.");
    read(d, "visual_noise", cfg.dataset.visual_noise, "dataset.");
    read(d, "geo_radius_deg", cfg.dataset.geo_radius_deg, "dataset.");
    read(d, "samples_per_class", cfg.dataset.samples_per_class, "dataset.");
  }
  if (j.contains("network")) {
    const auto& n = j.at("network");
    check_keys(n, {"n_blocks", "hidden_dim", "img_hidden"}, "network.");
    read(n, "n_blocks", cfg.n_blocks, "network.");
    read(n, "hidden_dim", cfg.hidden_dim, "network.");
    read(n, "img_hidden", cfg.img_hidden, "network.");
  }
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    check_keys(p, {"alpha", "epsilon"}, "policy.");
    read(p, "alpha", cfg.train.alpha, "policy.");
    read(p, "epsilon", cfg.train.epsilon, "policy.");
  }
  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    check_keys(r, {"theta_s", "theta_d", "lambda"}, "reward.");
    read(r, "theta_s", cfg.train.reward.theta_s, "reward.");
    read(r, "theta_d", cfg.train.reward.theta_d, "reward.");
    read(r, "lambda", cfg.train.reward.lambda, "reward.");
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t, {"pretrain_epochs", "policy_epochs", "finetune_epochs", "batch_size",
                   "lr_pretrain", "lr_policy", "lr_finetune", "momentum", "beta",
                   "uniqueness_include_self"},
               "train.");
    read(t, "pretrain_epochs", cfg.train.pretrain_epochs, "train.");
    read(t, "policy_epochs", cfg.train.policy_epochs, "train.");
    read(t, "finetune_epochs", cfg.train.finetune_epochs, "train.");
    read(t, "batch_size", cfg.train.batch_size, "train.");
    read(t, "lr_pretrain", cfg.train.lr_pretrain, "train.");
    read(t, "lr_policy", cfg.train.lr_policy, "train.");
    read(t, "lr_finetune", cfg.train.lr_finetune, "train.");
    read(t, "momentum", cfg.train.momentum, "train.");
    read(t, "beta", cfg.train.beta, "train.");
    read(t, "uniqueness_include_self", cfg.train.uniqueness_include_self, "train.");
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = train.seed;
  j["remove_mlp"] = train.remove_mlp;
  j["remove_u"] = train.remove_u;
  j["geo_scheme"] = geo_scheme_name(train.geo_scheme);
  j["dataset"] = {{"classes", dataset.classes},
                  {"pair_fraction", dataset.pair_fraction},
                  {"feature_dim", dataset.feature_dim},
                  {"visual_noise", dataset.visual_noise},
                  {"geo_radius_deg", dataset.geo_radius_deg},
                  {"samples_per_class", dataset.samples_per_class}};
  j["network"] = {{"n_blocks", n_blocks},
                  {"hidden_dim", hidden_dim},
                  {"img_hidden", img_hidden}};
  j["policy"] = {{"alpha", train.alpha}, {"epsilon", train.epsilon}};
  j["reward"] = {{"theta_s", train.reward.theta_s},
                 {"theta_d", train.reward.theta_d},
                 {"lambda", train.reward.lambda}};
  j["train"] = {{"pretrain_epochs", train.pretrain_epochs},
                {"policy_epochs", train.policy_epochs},
                {"finetune_epochs", train.finetune_epochs},
                {"batch_size", train.batch_size},
                {"lr_pretrain", train.lr_pretrain},
                {"lr_policy", train.lr_policy},
                {"lr_finetune", train.lr_finetune},
                {"momentum", train.momentum},
                {"beta", train.beta},
                {"uniqueness_include_self", train.uniqueness_include_self}};
  return j;
}

}  // namespace geopath
