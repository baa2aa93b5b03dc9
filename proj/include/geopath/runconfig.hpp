#pragma once

#include <string>

#include <json.hpp>

#include "geopath/dataset.hpp"
#include "geopath/trainer.hpp"

namespace geopath {

// Resolved configuration for a whole run: dataset generation, network sizes
// and the training schedule. Unknown keys are rejected so typos cannot pass
// silently; every artifact a run writes embeds the resolved form.
struct RunConfig {
  GenSpec dataset;
  int n_blocks = 9;
  int hidden_dim = 64;
  int img_hidden = 64;
  TrainConfig train;

  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::ordered_json to_json() const;
};

}  // namespace geopath
