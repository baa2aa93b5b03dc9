#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "geopath/trainer.hpp"

using namespace geopath;

namespace {

std::vector<Tensor2> snapshot(const std::vector<Parameter*>& ps) {
  std::vector<Tensor2> out;
  for (const Parameter* p : ps) out.push_back(p->value);
  return out;
}

bool identical(const std::vector<Parameter*>& ps, const std::vector<Tensor2>& snap) {
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (!(ps[i]->value == snap[i])) return false;
  return true;
}

GenSpec easy_spec(int classes, int samples_per_class, std::uint64_t seed) {
  GenSpec spec;
  spec.classes = classes;
  spec.pair_fraction = 0.0;
  spec.feature_dim = 8;
  spec.visual_noise = 0.05;
  spec.samples_per_class = samples_per_class;
  spec.seed = seed;
  return spec;
}

std::vector<Policy> all_policies(int n) {
  std::vector<Policy> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Policy p;
    for (int j = 0; j < n; ++j) p.bits.push_back((mask >> j) & 1);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("pretraining separates an easy synthetic set") {
  const auto data = generate(easy_spec(3, 40, 5));
  Rng rng(100);
  BlockNet net(9, 8, 32, 3, rng);
  TrainConfig cfg;
  cfg.pretrain_epochs = 15;
  cfg.batch_size = 16;
  cfg.seed = 5;
  const auto history = pretrain_recognition(data.train, net, cfg);
  REQUIRE(history.size() == 15);
  CHECK(history.back().accuracy_greedy >= 0.95);
  CHECK(history.back().mean_pr == 1.0);
  CHECK(history.back().diversity == 1);
}

TEST_CASE("zero pretraining epochs leave parameters untouched") {
  const auto data = generate(easy_spec(3, 10, 6));
  Rng rng(101);
  BlockNet net(4, 8, 16, 3, rng);
  const auto before = snapshot(net.parameters());
  TrainConfig cfg;
  cfg.pretrain_epochs = 0;
  const auto history = pretrain_recognition(data.train, net, cfg);
  CHECK(history.empty());
  CHECK(identical(net.parameters(), before));
}

TEST_CASE("pretraining is deterministic under a fixed seed") {
  const auto data = generate(easy_spec(3, 20, 7));
  TrainConfig cfg;
  cfg.pretrain_epochs = 4;
  cfg.batch_size = 8;
  cfg.seed = 11;

  Rng r1(200);
  BlockNet n1(5, 8, 16, 3, r1);
  pretrain_recognition(data.train, n1, cfg);
  Rng r2(200);
  BlockNet n2(5, 8, 16, 3, r2);
  pretrain_recognition(data.train, n2, cfg);

  const auto p1 = n1.parameters();
  const auto p2 = n2.parameters();
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->value == p2[i]->value);
}

TEST_CASE("pretraining rejects an empty dataset") {
  Dataset empty;
  empty.feature_dim = 8;
  Rng rng(102);
  BlockNet net(4, 8, 16, 3, rng);
  CHECK_THROWS_AS(pretrain_recognition(empty, net, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("a sampled policy equal to the greedy baseline yields no update") {
  const auto data = generate(easy_spec(4, 10, 8));
  Rng rng(103);
  BlockNet net(4, 8, 16, 4, rng);
  PolicyNetwork policy(4, 8, 16, rng);
  TrainConfig cfg;
  cfg.batch_size = 8;

  // Compute the batch's greedy policies, then force them as the sample.
  std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5, 6, 7};
  Tape tape;
  policy.alpha = cfg.alpha;
  policy.epsilon = cfg.epsilon;
  ValueId s = policy.fuse(tape, tape.input(data.train.geo_matrix(batch, cfg.geo_scheme)),
                          tape.input(data.train.feature_matrix(batch)));
  std::vector<Policy> forced;
  for (int i = 0; i < 8; ++i) forced.push_back(greedy_policy(keep_probs_row(tape.value(s), i)));

  const auto before = snapshot(policy.parameters());
  SgdMomentum opt(cfg.lr_policy, cfg.momentum);
  Rng step_rng(1);
  policy_step(data.train, batch, policy, net, cfg, opt, step_rng, &forced);
  CHECK(identical(policy.parameters(), before));
}

TEST_CASE("enumerated expected reward for s=[0.6, 0.7] with R=|p|0") {
  const KeepProbs kp{{0.6, 0.7}};
  double expected = 0.0;
  for (const Policy& p : all_policies(2))
    expected += std::exp(log_likelihood_value(kp, p)) * p.active_blocks();
  CHECK(expected == doctest::Approx(1.3).epsilon(1e-15));
}

TEST_CASE("mean sampled update direction approaches the enumerated gradient") {
  // N=3, frozen reward table; compare the self-critical estimator's mean
  // direction over draws against the exact gradient of sum_p pi(p) R(p).
  Rng rng(300);
  PolicyNetwork policy(3, 4, 8, rng);
  policy.alpha = 0.7;
  policy.epsilon = 0.05;
  const Tensor2 x_loc(1, 8, {1, 0.2, 0.5, 0.25, -1, 0.4, 0.3, 0.7});
  const Tensor2 x_img(1, 4, {0.6, -0.2, 0.9, 0.15});
  const auto table = all_policies(3);
  auto reward_of = [](const Policy& p) {
    return 0.35 + 0.8 * p.bits[0] - 0.45 * p.bits[1] + 0.3 * p.bits[2] +
           0.25 * p.bits[0] * p.bits[2];
  };

  auto params = policy.parameters();
  auto flatten = [&]() {
    std::vector<double> flat;
    for (Parameter* p : params)
      flat.insert(flat.end(), p->grad.data.begin(), p->grad.data.end());
    return flat;
  };

  // Exact ascent direction by enumeration through the tape.
  SgdMomentum::zero_grad(params);
  {
    Tape tape;
    ValueId s = policy.fuse(tape, tape.input(x_loc), tape.input(x_img));
    ValueId total = tape.input(Tensor2::scalar(0.0));
    for (const Policy& p : table) {
      Tensor2 bits(1, 3);
      for (int j = 0; j < 3; ++j) bits.at(0, j) = p.bits[static_cast<std::size_t>(j)];
      ValueId prob = tape.exp(tape.bernoulli_log_likelihood(s, bits));
      total = tape.add(total, tape.scale(prob, reward_of(p)));
    }
    tape.backward(total);
  }
  const std::vector<double> exact = flatten();

  // Monte-Carlo mean of A * grad log pi with the greedy baseline.
  std::vector<double> mean(exact.size(), 0.0);
  Rng sample_rng(301);
  const int steps = 6000;
  for (int t = 0; t < steps; ++t) {
    Tape tape;
    ValueId s = policy.fuse(tape, tape.input(x_loc), tape.input(x_img));
    const KeepProbs kp = keep_probs_row(tape.value(s), 0);
    const Policy sampled = sample_policy(kp, sample_rng);
    const Policy greedy = greedy_policy(kp);
    const double advantage = reward_of(sampled) - reward_of(greedy);
    Tensor2 bits(1, 3);
    for (int j = 0; j < 3; ++j) bits.at(0, j) = sampled.bits[static_cast<std::size_t>(j)];
    SgdMomentum::zero_grad(params);
    tape.backward(tape.scale(tape.bernoulli_log_likelihood(s, bits), advantage));
    const std::vector<double> g = flatten();
    for (std::size_t i = 0; i < g.size(); ++i) mean[i] += g[i] / steps;
  }

  double dot = 0.0, ne = 0.0, nm = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    dot += exact[i] * mean[i];
    ne += exact[i] * exact[i];
    nm += mean[i] * mean[i];
  }
  CHECK(dot / std::sqrt(ne * nm) > 0.95);
}

TEST_CASE("self-critical baseline reduces estimator variance on an enumerable case") {
  Rng rng(310);
  Mlp head("probe", {2, 3}, rng);
  const Tensor2 x(1, 2, {0.8, -0.4});
  auto reward_of = [](const Policy& p) {
    return 1.0 + 0.5 * p.active_blocks();
  };

  auto params = head.parameters();
  std::vector<double> mean_sc, m2_sc, mean_plain, m2_plain;
  Rng draw_rng(311);
  const int draws = 4000;
  for (int t = 0; t < draws; ++t) {
    Tape tape;
    ValueId s = tape.clamp(tape.sigmoid(head.forward(tape, tape.input(x))), 0.05, 0.95);
    const KeepProbs kp = keep_probs_row(tape.value(s), 0);
    const Policy sampled = sample_policy(kp, draw_rng);
    const Policy greedy = greedy_policy(kp);
    Tensor2 bits(1, 3);
    for (int j = 0; j < 3; ++j) bits.at(0, j) = sampled.bits[static_cast<std::size_t>(j)];
    SgdMomentum::zero_grad(params);
    tape.backward(tape.bernoulli_log_likelihood(s, bits));

    std::vector<double> score;
    for (Parameter* p : params)
      score.insert(score.end(), p->grad.data.begin(), p->grad.data.end());
    if (mean_sc.empty()) {
      mean_sc.assign(score.size(), 0.0);
      m2_sc.assign(score.size(), 0.0);
      mean_plain.assign(score.size(), 0.0);
      m2_plain.assign(score.size(), 0.0);
    }
    const double a = reward_of(sampled) - reward_of(greedy);
    const double r = reward_of(sampled);
    for (std::size_t i = 0; i < score.size(); ++i) {
      mean_sc[i] += a * score[i];
      m2_sc[i] += a * a * score[i] * score[i];
      mean_plain[i] += r * score[i];
      m2_plain[i] += r * r * score[i] * score[i];
    }
  }
  double var_sc = 0.0, var_plain = 0.0;
  for (std::size_t i = 0; i < mean_sc.size(); ++i) {
    var_sc += m2_sc[i] / draws - (mean_sc[i] / draws) * (mean_sc[i] / draws);
    var_plain += m2_plain[i] / draws - (mean_plain[i] / draws) * (mean_plain[i] / draws);
  }
  CHECK(var_sc <= var_plain);
}

TEST_CASE("remove_mlp makes the policy a function of image features alone") {
  const auto data = generate(easy_spec(3, 10, 9));
  Rng rng(104);
  PolicyNetwork policy(5, 8, 16, rng);
  policy.remove_loc = true;

  Tensor2 x_img(1, 8, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  Tape t1, t2;
  ValueId s1 = policy.fuse(t1, t1.input(Tensor2(1, 8, {1, 0.1, 0.1, 0.1, 1, 0.1, 0.1, 0.1})),
                           t1.input(x_img));
  ValueId s2 = policy.fuse(t2, t2.input(Tensor2(1, 8, {-1, 0.4, 0.5, 0.9, -1, 0.8, 0.2, 0.3})),
                           t2.input(x_img));
  CHECK(t1.value(s1) == t2.value(s2));

  // And no gradient reaches the location branch.
  t1.backward(t1.sum(s1));
  for (Parameter* p : policy.loc_parameters())
    for (double g : p->grad.data) CHECK(g == 0.0);
}

TEST_CASE("remove_u drops the diversity term from the reward") {
  TrainConfig cfg;
  cfg.reward = RewardConfig{0.4, 0.6, 2.0};
  cfg.remove_u = true;
  const RewardConfig rc = cfg.effective_reward();
  CHECK(rc.theta_d == 0.0);
  CHECK(rc.theta_s == 0.4);
  Policy p{{1, 0, 1, 0}};
  CHECK(reward(p, 0.9, true, rc) == doctest::Approx(0.4 * (1.0 - 0.25)).epsilon(1e-12));
}

TEST_CASE("sparsity pressure drives mean Pr down on an easy dataset") {
  const auto data = generate(easy_spec(3, 40, 10));
  Rng rng(105);
  // Long pretraining makes the net robust to drops, so the sparsity term
  // dominates the advantage from the first policy epoch.
  BlockNet net(6, 8, 32, 3, rng);
  PolicyNetwork policy(6, 8, 16, rng);
  TrainConfig cfg;
  cfg.pretrain_epochs = 25;
  cfg.policy_epochs = 7;
  cfg.batch_size = 18;
  cfg.lr_policy = 0.05;
  cfg.reward = RewardConfig{0.5, 0.0, 1.0};  // theta_d = 0: pure sparsity
  cfg.seed = 10;
  pretrain_recognition(data.train, net, cfg);
  const auto history = train_policy(data.train, data.eval, policy, net, cfg);
  REQUIRE(history.size() == 7);
  for (std::size_t e = 1; e < history.size(); ++e)
    CHECK(history[e].mean_pr <= history[e - 1].mean_pr + 0.01);
  CHECK(history.back().mean_pr < history.front().mean_pr - 0.15);
}

TEST_CASE("policy training never touches the recognition network") {
  const auto data = generate(easy_spec(3, 20, 11));
  Rng rng(106);
  BlockNet net(5, 8, 16, 3, rng);
  PolicyNetwork policy(5, 8, 16, rng);
  TrainConfig cfg;
  cfg.pretrain_epochs = 3;
  cfg.policy_epochs = 3;
  cfg.batch_size = 10;
  cfg.seed = 12;
  pretrain_recognition(data.train, net, cfg);
  const auto before = snapshot(net.parameters());
  const auto history = train_policy(data.train, data.eval, policy, net, cfg);
  CHECK(identical(net.parameters(), before));

  // Every emitted row respects the reward bounds.
  for (const auto& m : history) {
    CHECK(m.mean_reward <= cfg.reward.theta_s + cfg.reward.theta_d);
    CHECK(m.mean_reward >= -cfg.reward.lambda);
    CHECK(m.accuracy_sampled >= 0.0);
    CHECK(m.accuracy_sampled <= 1.0);
    CHECK(m.mean_pr >= 0.0);
    CHECK(m.mean_pr <= 1.0);
  }
}

TEST_CASE("train_policy rejects batches too small for uniqueness") {
  const auto data = generate(easy_spec(3, 10, 13));
  Rng rng(107);
  BlockNet net(4, 8, 16, 3, rng);
  PolicyNetwork policy(4, 8, 16, rng);
  TrainConfig cfg;
  cfg.batch_size = 1;
  CHECK_THROWS_AS(train_policy(data.train, data.eval, policy, net, cfg), std::invalid_argument);
}

TEST_CASE("finetuning with beta=0 leaves the recognition network unchanged") {
  const auto data = generate(easy_spec(3, 20, 14));
  Rng rng(108);
  BlockNet net(5, 8, 16, 3, rng);
  PolicyNetwork policy(5, 8, 16, rng);
  TrainConfig cfg;
  cfg.pretrain_epochs = 2;
  cfg.finetune_epochs = 2;
  cfg.batch_size = 10;
  cfg.beta = 0.0;
  cfg.seed = 15;
  pretrain_recognition(data.train, net, cfg);
  const auto before = snapshot(net.parameters());
  joint_finetune(data.train, data.eval, policy, net, cfg);
  CHECK(identical(net.parameters(), before));
}

TEST_CASE("one finetune epoch is bitwise reproducible") {
  const auto data = generate(easy_spec(3, 20, 16));
  TrainConfig cfg;
  cfg.pretrain_epochs = 2;
  cfg.finetune_epochs = 1;
  cfg.batch_size = 10;
  cfg.seed = 17;

  auto run = [&]() {
    Rng rng(400);
    BlockNet net(5, 8, 16, 3, rng);
    PolicyNetwork policy(5, 8, 16, rng);
    pretrain_recognition(data.train, net, cfg);
    joint_finetune(data.train, data.eval, policy, net, cfg);
    std::vector<Tensor2> out = snapshot(net.parameters());
    const auto ps = snapshot(policy.parameters());
    out.insert(out.end(), ps.begin(), ps.end());
    return out;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("image-only training cannot exceed the Bayes ceiling on fully paired data") {
  GenSpec spec;
  spec.classes = 10;
  spec.pair_fraction = 1.0;
  spec.feature_dim = 16;
  spec.visual_noise = 0.01;
  spec.samples_per_class = 80;
  spec.seed = 21;
  const auto data = generate(spec);

  Rng rng(109);
  BlockNet net(5, 16, 32, 10, rng);
  TrainConfig cfg;
  cfg.pretrain_epochs = 20;
  cfg.batch_size = 32;
  cfg.seed = 21;
  pretrain_recognition(data.train, net, cfg);

  const EvalReport rep =
      evaluate(data.eval, nullptr, net, cfg, EvalMode::Greedy, ForcedPolicy::Ones);
  CHECK(rep.accuracy <= 0.55);
}

TEST_CASE("evaluate is deterministic and self-consistent") {
  const auto data = generate(easy_spec(4, 20, 18));
  Rng rng(110);
  BlockNet net(5, 8, 16, 4, rng);
  PolicyNetwork policy(5, 8, 16, rng);
  TrainConfig cfg;
  cfg.pretrain_epochs = 3;
  cfg.batch_size = 12;
  cfg.seed = 19;
  pretrain_recognition(data.train, net, cfg);

  const EvalReport a = evaluate(data.eval, &policy, net, cfg, EvalMode::Greedy);
  const EvalReport b = evaluate(data.eval, &policy, net, cfg, EvalMode::Greedy);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].prediction == b.records[i].prediction);
    CHECK(a.records[i].policy == b.records[i].policy);
  }

  // Reported diversity is the unique count of the emitted policies.
  std::vector<Policy> emitted;
  for (const auto& r : a.records) emitted.push_back(r.policy);
  CHECK(a.diversity == diversity(emitted));

  // Forced all-ones equals the plain pretrained network.
  const EvalReport forced =
      evaluate(data.eval, nullptr, net, cfg, EvalMode::Greedy, ForcedPolicy::Ones);
  std::vector<std::size_t> idx(data.eval.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Tape tape;
  Policy ones{std::vector<std::uint8_t>(5, 1)};
  const Tensor2& plain = tape.value(net.infer(tape, tape.input(data.eval.feature_matrix(idx)),
                                              net.gates_for(ones, static_cast<int>(idx.size()))));
  for (std::size_t i = 0; i < idx.size(); ++i)
    CHECK(forced.records[i].prediction == BlockNet::predict_row(plain, static_cast<int>(i)));

  CHECK_THROWS_AS(parse_eval_mode("argmax"), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(data.eval, nullptr, net, cfg, EvalMode::Greedy),
                  std::invalid_argument);
}

TEST_CASE("different locations steer the fused keep probabilities apart") {
  const auto data = generate(easy_spec(4, 30, 22));
  Rng rng(111);
  BlockNet net(6, 8, 24, 4, rng);
  PolicyNetwork policy(6, 8, 16, rng);
  TrainConfig cfg;
  cfg.pretrain_epochs = 5;
  cfg.policy_epochs = 4;
  cfg.batch_size = 18;
  cfg.seed = 23;
  pretrain_recognition(data.train, net, cfg);
  train_policy(data.train, data.eval, policy, net, cfg);

  // Same image features, two distant locations.
  const Tensor2 x_img = data.eval.feature_matrix({0});
  Tape t1, t2;
  ValueId s1 = policy.fuse(t1, t1.input(data.eval.geo_matrix({0}, cfg.geo_scheme)),
                           t1.input(x_img));
  ValueId s2 = policy.fuse(t2, t2.input(data.eval.geo_matrix({data.eval.size() - 1}, cfg.geo_scheme)),
                           t2.input(x_img));
  double max_diff = 0.0;
  for (int j = 0; j < 6; ++j)
    max_diff = std::max(max_diff, std::abs(t1.value(s1).at(0, j) - t2.value(s2).at(0, j)));
  CHECK(max_diff > 1e-9);
}
