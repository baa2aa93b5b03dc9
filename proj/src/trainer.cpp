#include "geopath/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace geopath {

namespace {

constexpr std::uint64_t kPretrainSalt = 0x11;
constexpr std::uint64_t kPolicySalt = 0x22;
constexpr std::uint64_t kFinetuneSalt = 0x33;
constexpr std::uint64_t kEvalSalt = 0x44;

std::vector<std::size_t> all_indices(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t> idx, int batch_size,
                                                   std::size_t min_batch) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(idx.size(), start + static_cast<std::size_t>(batch_size));
    if (end - start < min_batch) break;  // trailing fragment too small to use
    batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(start),
                         idx.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

double population_std(const std::vector<double>& xs, double mean) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

void TrainConfig::validate() const {
  if (pretrain_epochs < 0 || policy_epochs < 0 || finetune_epochs < 0)
    throw std::invalid_argument("TrainConfig: epoch counts must be >= 0");
  if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch size must be >= 2");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("TrainConfig: alpha must lie in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("TrainConfig: epsilon must lie in (0, 0.5)");
  if (!(beta >= 0.0)) throw std::invalid_argument("TrainConfig: beta must be >= 0");
  effective_reward().validate();
}

RewardConfig TrainConfig::effective_reward() const {
  RewardConfig rc = reward;
  if (remove_u) rc.theta_d = 0.0;
  return rc;
}

nlohmann::ordered_json EpochMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["stage"] = stage;
  j["mean_reward"] = mean_reward;
  j["accuracy_sampled"] = accuracy_sampled;
  j["accuracy_greedy"] = accuracy_greedy;
  j["mean_pr"] = mean_pr;
  j["diversity"] = diversity;
  j["mean_uniqueness"] = mean_uniqueness;
  if (mean_ce) j["mean_ce"] = *mean_ce;
  return j;
}

EvalMode parse_eval_mode(const std::string& name) {
  if (name == "greedy") return EvalMode::Greedy;
  if (name == "sample") return EvalMode::Sample;
  throw std::invalid_argument("unknown eval mode '" + name + "' (expected greedy or sample)");
}

ForcedPolicy parse_forced_policy(const std::string& name) {
  if (name == "ones") return ForcedPolicy::Ones;
  if (name == "zeros") return ForcedPolicy::Zeros;
  throw std::invalid_argument("unknown forced policy '" + name + "' (expected ones or zeros)");
}

nlohmann::ordered_json EvalReport::summary_json() const {
  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["n_samples"] = n_samples;
  j["accuracy"] = accuracy;
  j["mean_pr"] = mean_pr;
  j["diversity"] = diversity;
  j["mean_uniqueness"] = mean_uniqueness;
  j["mean_reward"] = mean_reward;
  j["cost_mean"] = cost_mean;
  j["cost_std"] = cost_std;
  return j;
}

std::vector<EpochMetrics> pretrain_recognition(const Dataset& train, BlockNet& net,
                                               const TrainConfig& cfg, const MetricsSink& sink) {
  cfg.validate();
  if (train.empty()) throw std::invalid_argument("pretrain_recognition: empty dataset");

  Rng rng(mix_seed(cfg.seed, kPretrainSalt));
  SgdMomentum opt(cfg.lr_pretrain, cfg.momentum);
  auto params = net.parameters();
  std::vector<EpochMetrics> history;

  for (int epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    auto idx = all_indices(train);
    shuffle_indices(idx, rng);
    auto batches = make_batches(std::move(idx), cfg.batch_size, 1);

    double ce_sum = 0.0;
    std::size_t correct = 0, seen = 0;
    for (const auto& batch : batches) {
      Tape tape;
      ValueId x = tape.input(train.feature_matrix(batch));
      const Tensor2 gates = net.gates_for(Policy{std::vector<std::uint8_t>(
                                              static_cast<std::size_t>(net.n_blocks()), 1)},
                                          static_cast<int>(batch.size()));
      ValueId logits = net.infer(tape, x, gates);
      const auto labels = train.labels(batch);
      ValueId loss = tape.softmax_cross_entropy(logits, labels);

      const Tensor2& lv = tape.value(logits);
      for (std::size_t i = 0; i < batch.size(); ++i)
        correct += BlockNet::predict_row(lv, static_cast<int>(i)) == labels[i];
      seen += batch.size();
      ce_sum += tape.value(loss).data[0] * static_cast<double>(batch.size());

      SgdMomentum::zero_grad(params);
      tape.backward(loss);
      opt.step(params);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.stage = "pretrain";
    const double acc = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    m.accuracy_sampled = acc;
    m.accuracy_greedy = acc;
    // All gates on: Pr = 1, one distinct policy, zero uniqueness, and the
    // reward collapses to 0 when correct / -lambda otherwise.
    m.mean_pr = 1.0;
    m.diversity = 1;
    m.mean_uniqueness = 0.0;
    m.mean_reward = -cfg.effective_reward().lambda * (1.0 - acc);
    m.mean_ce = seen ? ce_sum / static_cast<double>(seen) : 0.0;
    history.push_back(m);
    if (sink) sink(m);
  }
  return history;
}

BatchStats policy_step(const Dataset& data, const std::vector<std::size_t>& batch,
                       PolicyNetwork& policy, BlockNet& net, const TrainConfig& cfg,
                       SgdMomentum& opt, Rng& rng, const std::vector<Policy>* forced_sample) {
  if (batch.empty()) throw std::invalid_argument("policy_step: empty batch");
  if (forced_sample && forced_sample->size() != batch.size())
    throw std::invalid_argument("policy_step: forced sample count mismatch");

  const int b = static_cast<int>(batch.size());
  const Tensor2 x_img = data.feature_matrix(batch);
  const Tensor2 x_loc = data.geo_matrix(batch, cfg.geo_scheme);
  const auto labels = data.labels(batch);

  policy.alpha = cfg.alpha;
  policy.epsilon = cfg.epsilon;
  policy.remove_loc = cfg.remove_mlp;

  Tape tape;
  ValueId s_id = policy.fuse(tape, tape.input(x_loc), tape.input(x_img));
  const Tensor2& s = tape.value(s_id);

  std::vector<Policy> sampled(static_cast<std::size_t>(b));
  std::vector<Policy> greedy(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    const KeepProbs kp = keep_probs_row(s, i);
    sampled[static_cast<std::size_t>(i)] =
        forced_sample ? (*forced_sample)[static_cast<std::size_t>(i)] : sample_policy(kp, rng);
    greedy[static_cast<std::size_t>(i)] = greedy_policy(kp);
  }
  const Tensor2 gates_sampled = BlockNet::gates_from(sampled);
  const Tensor2 gates_greedy = BlockNet::gates_from(greedy);

  // Frozen recognition network: forward passes live on their own tapes and
  // are never differentiated.
  Tape fwd_s, fwd_g;
  const Tensor2& logits_s = fwd_s.value(net.infer(fwd_s, fwd_s.input(x_img), gates_sampled));
  const Tensor2& logits_g = fwd_g.value(net.infer(fwd_g, fwd_g.input(x_img), gates_greedy));

  // Each policy is rewarded with its uniqueness inside its own batch: the
  // sampled batch for R(p), the greedy batch for the baseline R(p~). Sharing
  // the sampled u with the baseline would cancel the diversity term out of
  // the advantage whenever both predictions are correct.
  const auto u = uniqueness(sampled, cfg.uniqueness_include_self);
  const auto u_greedy = uniqueness(greedy, cfg.uniqueness_include_self);
  const RewardConfig rc = cfg.effective_reward();

  BatchStats stats;
  stats.sampled = sampled;
  std::vector<double> advantage(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    const bool correct_s = BlockNet::predict_row(logits_s, i) == labels[si];
    const bool correct_g = BlockNet::predict_row(logits_g, i) == labels[si];
    const double r_s = reward(sampled[si], u[si], correct_s, rc);
    const double r_g = reward(greedy[si], u_greedy[si], correct_g, rc);
    advantage[si] = r_s - r_g;
    stats.mean_reward += r_s;
    stats.accuracy_sampled += correct_s;
    stats.accuracy_greedy += correct_g;
    stats.mean_pr += static_cast<double>(sampled[si].active_blocks()) /
                     static_cast<double>(net.n_blocks());
  }
  stats.mean_reward /= b;
  stats.accuracy_sampled /= b;
  stats.accuracy_greedy /= b;
  stats.mean_pr /= b;

  ValueId ll = tape.bernoulli_log_likelihood(s_id, gates_sampled);
  ValueId objective = tape.sum(tape.row_scale(ll, advantage));
  ValueId loss = tape.scale(objective, -1.0 / static_cast<double>(b));

  auto params = policy.parameters();
  SgdMomentum::zero_grad(params);
  tape.backward(loss);
  opt.step(params);
  return stats;
}

namespace {

// Shared evaluation pass; used by evaluate() and for epoch-end metrics.
EvalReport run_eval_pass(const Dataset& data, PolicyNetwork* policy, BlockNet& net,
                         const TrainConfig& cfg, EvalMode mode, ForcedPolicy force,
                         std::uint64_t seed) {
  EvalReport rep;
  rep.mode = force == ForcedPolicy::None
                 ? (mode == EvalMode::Greedy ? "greedy" : "sample")
                 : (force == ForcedPolicy::Ones ? "forced-ones" : "forced-zeros");
  rep.n_samples = static_cast<int>(data.size());
  if (data.empty()) return rep;

  Rng rng(mix_seed(seed, kEvalSalt));
  const int chunk = 256;
  std::vector<Policy> policies;
  policies.reserve(data.size());
  std::vector<int> preds(data.size());

  auto idx = all_indices(data);
  for (std::size_t start = 0; start < idx.size(); start += chunk) {
    const std::size_t end = std::min(idx.size(), start + chunk);
    std::vector<std::size_t> batch(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                   idx.begin() + static_cast<std::ptrdiff_t>(end));
    const int b = static_cast<int>(batch.size());
    const Tensor2 x_img = data.feature_matrix(batch);

    std::vector<Policy> batch_policies(static_cast<std::size_t>(b));
    if (force != ForcedPolicy::None) {
      Policy p;
      p.bits.assign(static_cast<std::size_t>(net.n_blocks()),
                    force == ForcedPolicy::Ones ? 1 : 0);
      for (auto& bp : batch_policies) bp = p;
    } else {
      if (!policy)
        throw std::invalid_argument("evaluate: policy network required unless a policy is forced");
      policy->alpha = cfg.alpha;
      policy->epsilon = cfg.epsilon;
      policy->remove_loc = cfg.remove_mlp;
      Tape ptape;
      const Tensor2 x_loc = data.geo_matrix(batch, cfg.geo_scheme);
      ValueId s_id = policy->fuse(ptape, ptape.input(x_loc), ptape.input(x_img));
      const Tensor2& s = ptape.value(s_id);
      for (int i = 0; i < b; ++i) {
        const KeepProbs kp = keep_probs_row(s, i);
        batch_policies[static_cast<std::size_t>(i)] =
            mode == EvalMode::Greedy ? greedy_policy(kp) : sample_policy(kp, rng);
      }
    }

    Tape tape;
    ValueId logits = net.infer(tape, tape.input(x_img), BlockNet::gates_from(batch_policies));
    const Tensor2& lv = tape.value(logits);
    for (int i = 0; i < b; ++i) {
      preds[start + static_cast<std::size_t>(i)] = BlockNet::predict_row(lv, i);
      policies.push_back(std::move(batch_policies[static_cast<std::size_t>(i)]));
    }
  }

  const auto u = uniqueness(policies, cfg.uniqueness_include_self);
  const RewardConfig rc = cfg.effective_reward();
  std::vector<double> costs(data.size());
  double acc = 0.0, pr_sum = 0.0, reward_sum = 0.0, u_sum = 0.0;
  rep.records.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    SampleRecord r;
    r.id = s.id;
    r.label = s.label;
    r.prediction = preds[i];
    r.correct = r.prediction == s.label;
    r.policy = policies[i];
    const CostReport cost = net.sparsity(r.policy);
    r.pr = cost.pr;
    r.cost_units = cost.cost_units;
    costs[i] = cost.cost_units;
    acc += r.correct;
    pr_sum += r.pr;
    u_sum += u[i];
    reward_sum += reward(r.policy, u[i], r.correct, rc);
    rep.records.push_back(std::move(r));
  }
  const double n = static_cast<double>(data.size());
  rep.accuracy = acc / n;
  rep.mean_pr = pr_sum / n;
  rep.diversity = diversity(policies);
  rep.mean_uniqueness = u_sum / n;
  rep.mean_reward = reward_sum / n;
  rep.cost_mean = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
  rep.cost_std = population_std(costs, rep.cost_mean);
  return rep;
}

// Common epoch loop for the policy and finetune stages.
template <class StepFn>
std::vector<EpochMetrics> run_stage(const Dataset& train, const Dataset& eval,
                                    PolicyNetwork& policy, BlockNet& net, const TrainConfig& cfg,
                                    const MetricsSink& sink, const std::string& stage,
                                    int epochs, Rng& rng, StepFn step) {
  const Dataset& eval_set = eval.empty() ? train : eval;
  std::vector<EpochMetrics> history;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    auto idx = all_indices(train);
    shuffle_indices(idx, rng);
    auto batches = make_batches(std::move(idx), cfg.batch_size, 2);
    if (batches.empty())
      throw std::invalid_argument(stage + ": dataset smaller than the minimum batch of 2");

    double reward_sum = 0.0, acc_s = 0.0, pr_sum = 0.0, ce_sum = 0.0;
    std::size_t seen = 0;
    bool have_ce = false;
    for (const auto& batch : batches) {
      const auto r = step(batch, rng);
      const double bn = static_cast<double>(batch.size());
      reward_sum += r.first.mean_reward * bn;
      acc_s += r.first.accuracy_sampled * bn;
      pr_sum += r.first.mean_pr * bn;
      if (r.second) {
        ce_sum += *r.second * bn;
        have_ce = true;
      }
      seen += batch.size();
    }

    const EvalReport ev = run_eval_pass(eval_set, &policy, net, cfg, EvalMode::Greedy,
                                        ForcedPolicy::None, cfg.seed);
    EpochMetrics m;
    m.epoch = epoch;
    m.stage = stage;
    m.mean_reward = reward_sum / static_cast<double>(seen);
    m.accuracy_sampled = acc_s / static_cast<double>(seen);
    m.accuracy_greedy = ev.accuracy;
    m.mean_pr = pr_sum / static_cast<double>(seen);
    m.diversity = ev.diversity;
    m.mean_uniqueness = ev.mean_uniqueness;
    if (have_ce) m.mean_ce = ce_sum / static_cast<double>(seen);
    history.push_back(m);
    if (sink) sink(m);
  }
  return history;
}

}  // namespace

std::vector<EpochMetrics> train_policy(const Dataset& train, const Dataset& eval,
                                       PolicyNetwork& policy, BlockNet& net,
                                       const TrainConfig& cfg, const MetricsSink& sink) {
  cfg.validate();
  if (train.empty()) throw std::invalid_argument("train_policy: empty dataset");

  Rng rng(mix_seed(cfg.seed, kPolicySalt));
  SgdMomentum opt(cfg.lr_policy, cfg.momentum);
  return run_stage(train, eval, policy, net, cfg, sink, "policy", cfg.policy_epochs, rng,
                   [&](const std::vector<std::size_t>& batch, Rng& r)
                       -> std::pair<BatchStats, std::optional<double>> {
                     return {policy_step(train, batch, policy, net, cfg, opt, r), std::nullopt};
                   });
}

std::vector<EpochMetrics> joint_finetune(const Dataset& train, const Dataset& eval,
                                         PolicyNetwork& policy, BlockNet& net,
                                         const TrainConfig& cfg, const MetricsSink& sink) {
  cfg.validate();
  if (train.empty()) throw std::invalid_argument("joint_finetune: empty dataset");

  Rng rng(mix_seed(cfg.seed, kFinetuneSalt));
  SgdMomentum opt(cfg.lr_finetune, cfg.momentum);
  auto policy_params = policy.parameters();
  auto net_params = net.parameters();
  std::vector<Parameter*> all_params = policy_params;
  all_params.insert(all_params.end(), net_params.begin(), net_params.end());

  auto step = [&](const std::vector<std::size_t>& batch,
                  Rng& r) -> std::pair<BatchStats, std::optional<double>> {
    const int b = static_cast<int>(batch.size());
    const Tensor2 x_img = train.feature_matrix(batch);
    const Tensor2 x_loc = train.geo_matrix(batch, cfg.geo_scheme);
    const auto labels = train.labels(batch);

    policy.alpha = cfg.alpha;
    policy.epsilon = cfg.epsilon;
    policy.remove_loc = cfg.remove_mlp;

    Tape tape;
    ValueId x_img_id = tape.input(x_img);
    ValueId s_id = policy.fuse(tape, tape.input(x_loc), x_img_id);
    const Tensor2& s = tape.value(s_id);

    std::vector<Policy> sampled(static_cast<std::size_t>(b));
    std::vector<Policy> greedy(static_cast<std::size_t>(b));
    for (int i = 0; i < b; ++i) {
      const KeepProbs kp = keep_probs_row(s, i);
      sampled[static_cast<std::size_t>(i)] = sample_policy(kp, r);
      greedy[static_cast<std::size_t>(i)] = greedy_policy(kp);
    }
    const Tensor2 gates_sampled = BlockNet::gates_from(sampled);

    // Sampled-path logits stay on the main tape so the cross-entropy term
    // reaches the recognition parameters; the greedy baseline is value-only.
    ValueId logits_id = net.infer(tape, x_img_id, gates_sampled);
    const Tensor2& logits_s = tape.value(logits_id);
    Tape fwd_g;
    const Tensor2& logits_g =
        fwd_g.value(net.infer(fwd_g, fwd_g.input(x_img), BlockNet::gates_from(greedy)));

    const auto u = uniqueness(sampled, cfg.uniqueness_include_self);
    const auto u_greedy = uniqueness(greedy, cfg.uniqueness_include_self);
    const RewardConfig rc = cfg.effective_reward();
    BatchStats stats;
    stats.sampled = sampled;
    std::vector<double> advantage(static_cast<std::size_t>(b));
    for (int i = 0; i < b; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const bool correct_s = BlockNet::predict_row(logits_s, i) == labels[si];
      const bool correct_g = BlockNet::predict_row(logits_g, i) == labels[si];
      const double r_s = reward(sampled[si], u[si], correct_s, rc);
      const double r_g = reward(greedy[si], u_greedy[si], correct_g, rc);
      advantage[si] = r_s - r_g;
      stats.mean_reward += r_s;
      stats.accuracy_sampled += correct_s;
      stats.accuracy_greedy += correct_g;
      stats.mean_pr += static_cast<double>(sampled[si].active_blocks()) /
                       static_cast<double>(net.n_blocks());
    }
    stats.mean_reward /= b;
    stats.accuracy_sampled /= b;
    stats.accuracy_greedy /= b;
    stats.mean_pr /= b;

    ValueId ll = tape.bernoulli_log_likelihood(s_id, gates_sampled);
    ValueId j_term = tape.scale(tape.sum(tape.row_scale(ll, advantage)),
                                -1.0 / static_cast<double>(b));
    ValueId ce = tape.softmax_cross_entropy(logits_id, labels);
    ValueId loss = tape.add(j_term, tape.scale(ce, cfg.beta));

    SgdMomentum::zero_grad(all_params);
    tape.backward(loss);
    opt.step(all_params);
    return {stats, tape.value(ce).data[0]};
  };

  return run_stage(train, eval, policy, net, cfg, sink, "finetune", cfg.finetune_epochs, rng,
                   step);
}

EvalReport evaluate(const Dataset& data, PolicyNetwork* policy, BlockNet& net,
                    const TrainConfig& cfg, EvalMode mode, ForcedPolicy force,
                    std::uint64_t seed) {
  cfg.validate();
  return run_eval_pass(data, policy, net, cfg, mode, force, seed);
}

}  // namespace geopath
