#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geopath/blocknet.hpp"
#include "geopath/dataset.hpp"
#include "geopath/geo.hpp"
#include "geopath/optim.hpp"
#include "geopath/policy.hpp"
#include "geopath/rewards.hpp"

namespace geopath {

struct TrainConfig {
  int pretrain_epochs = 30;
  int policy_epochs = 30;
  int finetune_epochs = 20;
  int batch_size = 64;
  double lr_pretrain = 0.01;
  double lr_policy = 0.005;
  double lr_finetune = 0.001;
  double momentum = 0.9;
  RewardConfig reward;
  double alpha = 0.7;
  double epsilon = 0.05;
  double beta = 1.0;  // weight of the cross-entropy term during finetuning
  std::uint64_t seed = 1;
  bool remove_mlp = false;
  bool remove_u = false;
  bool uniqueness_include_self = true;
  GeoScheme geo_scheme = GeoScheme::Unit;

  void validate() const;
  // Reward config with the diversity term dropped under remove_u.
  RewardConfig effective_reward() const;
};

struct EpochMetrics {
  int epoch = 0;
  std::string stage;
  double mean_reward = 0.0;
  double accuracy_sampled = 0.0;
  double accuracy_greedy = 0.0;
  double mean_pr = 0.0;
  int diversity = 0;
  double mean_uniqueness = 0.0;
  std::optional<double> mean_ce;

  nlohmann::ordered_json to_json() const;
};

using MetricsSink = std::function<void(const EpochMetrics&)>;

enum class EvalMode { Greedy, Sample };
EvalMode parse_eval_mode(const std::string& name);  // "greedy" | "sample"

enum class ForcedPolicy { None, Ones, Zeros };
ForcedPolicy parse_forced_policy(const std::string& name);  // "ones" | "zeros"

struct SampleRecord {
  long long id = 0;
  int label = 0;
  int prediction = 0;
  bool correct = false;
  Policy policy;
  double pr = 0.0;
  double cost_units = 0.0;
};

struct EvalReport {
  std::string mode;
  int n_samples = 0;
  double accuracy = 0.0;
  double mean_pr = 0.0;
  int diversity = 0;
  double mean_uniqueness = 0.0;
  double mean_reward = 0.0;
  double cost_mean = 0.0;
  double cost_std = 0.0;
  std::vector<SampleRecord> records;

  nlohmann::ordered_json summary_json() const;
};

// Stage 1: trains the recognition network with every gate on.
std::vector<EpochMetrics> pretrain_recognition(const Dataset& train, BlockNet& net,
                                               const TrainConfig& cfg,
                                               const MetricsSink& sink = {});

struct BatchStats {
  double mean_reward = 0.0;
  double accuracy_sampled = 0.0;
  double accuracy_greedy = 0.0;
  double mean_pr = 0.0;
  std::vector<Policy> sampled;
};

// One self-critical policy-gradient step over a batch: sample policies from
// the fused keep probabilities, reward them against the greedy baseline and
// ascend mean(A * log-likelihood). Recognition stays frozen. A non-null
// `forced_sample` replaces the Bernoulli draw (used by tests).
BatchStats policy_step(const Dataset& data, const std::vector<std::size_t>& batch,
                       PolicyNetwork& policy, BlockNet& net, const TrainConfig& cfg,
                       SgdMomentum& opt, Rng& rng,
                       const std::vector<Policy>* forced_sample = nullptr);

// Stage 2: policy-gradient training against the frozen recognition network.
// Epoch rows combine training-pass statistics (reward, sampled accuracy,
// mean Pr) with a greedy evaluation pass over `eval` (greedy accuracy,
// diversity, uniqueness); an empty eval set falls back to the train set.
std::vector<EpochMetrics> train_policy(const Dataset& train, const Dataset& eval,
                                       PolicyNetwork& policy, BlockNet& net,
                                       const TrainConfig& cfg, const MetricsSink& sink = {});

// Stage 3: joint update. Per batch the loss is -mean(A * log-likelihood)
// + beta * cross-entropy of the sampled-path logits; both networks step.
std::vector<EpochMetrics> joint_finetune(const Dataset& train, const Dataset& eval,
                                         PolicyNetwork& policy, BlockNet& net,
                                         const TrainConfig& cfg, const MetricsSink& sink = {});

// Deterministic evaluation pass. `policy` may be null when `force` is not
// None; `seed` only matters in sample mode.
EvalReport evaluate(const Dataset& data, PolicyNetwork* policy, BlockNet& net,
                    const TrainConfig& cfg, EvalMode mode,
                    ForcedPolicy force = ForcedPolicy::None, std::uint64_t seed = 0);

}  // namespace geopath
