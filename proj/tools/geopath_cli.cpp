// geopath: geo-conditioned dynamic inference-path selection.
//
// Subcommands cover the full pipeline: generate -> pretrain -> train-policy
// -> finetune -> evaluate, plus analyze for policy logs. Every artifact
// embeds the resolved configuration, and a fixed --seed makes the whole
// pipeline byte-reproducible.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "geopath/checkpoint.hpp"
#include "geopath/runconfig.hpp"
#include "geopath/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace geopath;

namespace {

constexpr std::uint64_t kNetInitSalt = 0x6e65;     // recognition weights
constexpr std::uint64_t kPolicyInitSalt = 0x706f;  // policy weights

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha, theta_s, theta_d, lambda;
  bool remove_mlp = false;
  bool remove_u = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--seed", f.seed, "Run seed (overrides config)");
  cmd->add_option("--alpha", f.alpha, "Fusion factor in [0,1]");
  cmd->add_option("--theta-s", f.theta_s, "Sparsity reward weight");
  cmd->add_option("--theta-d", f.theta_d, "Diversity reward weight");
  cmd->add_option("--lambda", f.lambda, "Penalty for incorrect predictions");
  cmd->add_flag("--remove-mlp", f.remove_mlp, "Ablation: drop the location branch");
  cmd->add_flag("--remove-u", f.remove_u, "Ablation: drop the uniqueness reward term");
}

// Config file first, then flag overrides.
RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg = f.config_path.empty() ? RunConfig{} : RunConfig::load(f.config_path);
  if (f.seed) {
    cfg.train.seed = *f.seed;
    cfg.dataset.seed = *f.seed;
  }
  if (f.alpha) cfg.train.alpha = *f.alpha;
  if (f.theta_s) cfg.train.reward.theta_s = *f.theta_s;
  if (f.theta_d) cfg.train.reward.theta_d = *f.theta_d;
  if (f.lambda) cfg.train.reward.lambda = *f.lambda;
  if (f.remove_mlp) cfg.train.remove_mlp = true;
  if (f.remove_u) cfg.train.remove_u = true;
  cfg.validate();
  return cfg;
}

std::string report_dir() {
  const char* env = std::getenv("GEOPATH_REPORT_DIR");
  return env && *env ? env : ".";
}

std::string default_path(const std::string& name) {
  return (fs::path(report_dir()) / name).string();
}

std::ofstream open_out(const std::string& path) {
  if (const fs::path dir = fs::path(path).parent_path(); !dir.empty())
    fs::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

struct LoadedData {
  Dataset train;
  Dataset eval;
};

LoadedData load_data(const std::string& dir, const RunConfig& cfg) {
  LoadedData d;
  d.train = load_csv((fs::path(dir) / "train.csv").string());
  const std::string eval_path = (fs::path(dir) / "eval.csv").string();
  if (fs::exists(eval_path)) d.eval = load_csv(eval_path);
  for (const Dataset* ds : {&d.train, &d.eval}) {
    if (ds->empty()) continue;
    if (ds->feature_dim != cfg.dataset.feature_dim)
      throw std::runtime_error("dataset shape mismatch: csv has " +
                               std::to_string(ds->feature_dim) + " features, config declares " +
                               std::to_string(cfg.dataset.feature_dim));
    if (ds->classes > cfg.dataset.classes)
      throw std::runtime_error("dataset shape mismatch: csv has label " +
                               std::to_string(ds->classes - 1) + ", config declares " +
                               std::to_string(cfg.dataset.classes) + " classes");
  }
  return d;
}

BlockNet make_net(const RunConfig& cfg) {
  Rng rng(mix_seed(cfg.train.seed, kNetInitSalt));
  return BlockNet(cfg.n_blocks, cfg.dataset.feature_dim, cfg.hidden_dim, cfg.dataset.classes,
                  rng);
}

PolicyNetwork make_policy(const RunConfig& cfg) {
  Rng rng(mix_seed(cfg.train.seed, kPolicyInitSalt));
  PolicyNetwork p(cfg.n_blocks, cfg.dataset.feature_dim, cfg.img_hidden, rng);
  p.alpha = cfg.train.alpha;
  p.epsilon = cfg.train.epsilon;
  p.remove_loc = cfg.train.remove_mlp;
  return p;
}

ModuleParams net_modules(BlockNet& net) { return {{"recognition", net.parameters()}}; }

ModuleParams all_modules(BlockNet& net, PolicyNetwork& policy) {
  return {{"recognition", net.parameters()},
          {"policy.loc", policy.loc_parameters()},
          {"policy.img", policy.img_parameters()}};
}

ordered_json make_meta(const RunConfig& cfg, const std::string& stage) {
  ordered_json meta;
  meta["format"] = "geopath-checkpoint-v1";
  meta["stage"] = stage;
  meta["seed"] = cfg.train.seed;
  meta["config"] = cfg.to_json();
  return meta;
}

// Metrics stream: a config line for provenance, then one object per epoch.
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, const RunConfig& cfg) : out_(open_out(path)) {
    ordered_json header;
    header["config"] = cfg.to_json();
    out_ << header.dump() << "\n";
  }
  void operator()(const EpochMetrics& m) {
    out_ << m.to_json().dump() << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

void write_curves(const std::string& metrics_path, const std::vector<EpochMetrics>& history,
                  const RunConfig& cfg) {
  const fs::path base = fs::path(metrics_path).parent_path();
  const std::string provenance = "# config " + ordered_json(cfg.to_json()).dump();
  {
    auto out = open_out((base / "diversity_vs_epoch.tsv").string());
    out << provenance << "\n";
    out << "epoch\tdiversity\n";
    for (const auto& m : history) out << m.epoch << "\t" << m.diversity << "\n";
  }
  {
    auto out = open_out((base / "accuracy_vs_pr.tsv").string());
    out << provenance << "\n";
    out << "mean_pr\taccuracy_greedy\n";
    for (const auto& m : history) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g\t%.17g", m.mean_pr, m.accuracy_greedy);
      out << buf << "\n";
    }
  }
}

int cmd_generate(const CommonFlags& flags, const std::string& out_dir) {
  const RunConfig cfg = resolve_config(flags);
  const GeneratedData data = generate(cfg.dataset);
  fs::create_directories(out_dir);
  save_csv(data.train, (fs::path(out_dir) / "train.csv").string());
  save_csv(data.eval, (fs::path(out_dir) / "eval.csv").string());

  ordered_json manifest;
  manifest["config"] = cfg.to_json();
  manifest["train_rows"] = data.train.size();
  manifest["eval_rows"] = data.eval.size();
  ordered_json pairs = ordered_json::array();
  for (int c = 0; c < cfg.dataset.classes; ++c)
    if (data.pair_partner[static_cast<std::size_t>(c)] > c)
      pairs.push_back({c, data.pair_partner[static_cast<std::size_t>(c)]});
  manifest["pairs"] = pairs;
  open_out((fs::path(out_dir) / "manifest.json").string()) << manifest.dump(2) << "\n";
  std::cout << "generated " << data.train.size() << " train / " << data.eval.size()
            << " eval samples in " << out_dir << "\n";
  return 0;
}

int cmd_pretrain(const CommonFlags& flags, const std::string& data_dir,
                 const std::string& ckpt_out, const std::string& metrics_path) {
  const RunConfig cfg = resolve_config(flags);
  const LoadedData data = load_data(data_dir, cfg);
  BlockNet net = make_net(cfg);
  MetricsWriter sink(metrics_path, cfg);
  const auto history = pretrain_recognition(data.train, net, cfg.train, std::ref(sink));
  save_checkpoint(ckpt_out, net_modules(net), make_meta(cfg, "pretrain"));
  std::cout << "pretrain done: final train accuracy "
            << (history.empty() ? 0.0 : history.back().accuracy_greedy) << ", checkpoint "
            << ckpt_out << "\n";
  return 0;
}

int cmd_train_policy(const CommonFlags& flags, const std::string& data_dir,
                     const std::string& ckpt_in, const std::string& ckpt_out,
                     const std::string& metrics_path) {
  const RunConfig cfg = resolve_config(flags);
  const LoadedData data = load_data(data_dir, cfg);
  BlockNet net = make_net(cfg);
  load_checkpoint(ckpt_in, net_modules(net));
  PolicyNetwork policy = make_policy(cfg);
  MetricsWriter sink(metrics_path, cfg);
  const auto history =
      train_policy(data.train, data.eval, policy, net, cfg.train, std::ref(sink));
  write_curves(metrics_path, history, cfg);
  save_checkpoint(ckpt_out, all_modules(net, policy), make_meta(cfg, "policy"));
  std::cout << "policy training done: checkpoint " << ckpt_out << "\n";
  return 0;
}

int cmd_finetune(const CommonFlags& flags, const std::string& data_dir,
                 const std::string& ckpt_in, const std::string& ckpt_out,
                 const std::string& metrics_path) {
  const RunConfig cfg = resolve_config(flags);
  const LoadedData data = load_data(data_dir, cfg);
  BlockNet net = make_net(cfg);
  PolicyNetwork policy = make_policy(cfg);
  load_checkpoint(ckpt_in, all_modules(net, policy));
  MetricsWriter sink(metrics_path, cfg);
  const auto history =
      joint_finetune(data.train, data.eval, policy, net, cfg.train, std::ref(sink));
  write_curves(metrics_path, history, cfg);
  save_checkpoint(ckpt_out, all_modules(net, policy), make_meta(cfg, "finetune"));
  std::cout << "finetune done: checkpoint " << ckpt_out << "\n";
  return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& data_dir, const std::string& ckpt,
                 const std::string& mode_name, const std::string& force_name,
                 const std::string& split, const std::string& report_path,
                 const std::string& records_path) {
  const RunConfig cfg = resolve_config(flags);
  const LoadedData data = load_data(data_dir, cfg);
  const Dataset& ds = split == "train" ? data.train : data.eval;
  if (split != "train" && split != "eval")
    throw std::runtime_error("unknown split '" + split + "' (expected train or eval)");

  const EvalMode mode = parse_eval_mode(mode_name);
  const ForcedPolicy force =
      force_name.empty() ? ForcedPolicy::None : parse_forced_policy(force_name);

  BlockNet net = make_net(cfg);
  PolicyNetwork policy = make_policy(cfg);
  const bool need_policy = force == ForcedPolicy::None;
  if (need_policy) {
    load_checkpoint(ckpt, all_modules(net, policy));
  } else {
    load_checkpoint(ckpt, net_modules(net));
  }

  const EvalReport rep = evaluate(ds, need_policy ? &policy : nullptr, net, cfg.train, mode,
                                  force, cfg.train.seed);

  ordered_json report;
  report["config"] = cfg.to_json();
  report["split"] = split;
  report["summary"] = rep.summary_json();
  open_out(report_path) << report.dump(2) << "\n";

  auto records = open_out(records_path);
  ordered_json header;
  header["config"] = cfg.to_json();
  records << header.dump() << "\n";
  for (const auto& r : rep.records) {
    ordered_json line;
    line["id"] = r.id;
    line["label"] = r.label;
    line["prediction"] = r.prediction;
    line["correct"] = r.correct;
    std::string bits;
    for (auto b : r.policy.bits) bits.push_back(b ? '1' : '0');
    line["policy"] = bits;
    line["pr"] = r.pr;
    line["cost_units"] = r.cost_units;
    records << line.dump() << "\n";
  }
  std::cout << "evaluate (" << rep.mode << ", " << split << "): accuracy " << rep.accuracy
            << ", mean Pr " << rep.mean_pr << ", diversity " << rep.diversity << "\n";
  return 0;
}

int cmd_analyze(const std::string& log_path, const std::string& report_path,
                const std::string& curve_path) {
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("missing file: " + log_path);

  std::vector<Policy> policies;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw std::runtime_error("row " + std::to_string(row) + ": malformed JSON in " + log_path);
    }
    if (!j.contains("policy")) continue;  // provenance or summary lines
    const std::string bits = j.at("policy").get<std::string>();
    Policy p;
    for (char c : bits) {
      if (c != '0' && c != '1')
        throw std::runtime_error("row " + std::to_string(row) + ": bad policy string '" + bits +
                                 "'");
      p.bits.push_back(c == '1' ? 1 : 0);
    }
    policies.push_back(std::move(p));
  }
  if (policies.empty()) throw std::runtime_error("no policies found in " + log_path);
  const int n = static_cast<int>(policies.front().bits.size());

  const auto u = uniqueness(policies);
  double u_mean = 0.0, pr_mean = 0.0;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    u_mean += u[i];
    pr_mean += static_cast<double>(policies[i].active_blocks()) / n;
  }
  u_mean /= static_cast<double>(policies.size());
  pr_mean /= static_cast<double>(policies.size());

  ordered_json report;
  report["log"] = log_path;
  report["n_policies"] = policies.size();
  report["n_blocks"] = n;
  report["diversity"] = diversity(policies);
  report["mean_uniqueness"] = u_mean;
  report["mean_pr"] = pr_mean;
  ordered_json curve = ordered_json::array();
  for (int k = 0; k <= n; ++k)
    curve.push_back({{"k", k},
                     {"pr", static_cast<double>(k) / n},
                     {"max_unique", max_unique(n, k)}});
  report["max_unique_curve"] = curve;
  open_out(report_path) << report.dump(2) << "\n";

  auto tsv = open_out(curve_path);
  tsv << "k\tpr\tmax_unique\n";
  for (int k = 0; k <= n; ++k) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d\t%.17g\t", k, static_cast<double>(k) / n);
    tsv << buf << max_unique(n, k) << "\n";
  }
  std::cout << "analyze: " << policies.size() << " policies, diversity "
            << diversity(policies) << ", mean uniqueness " << u_mean << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geo-conditioned dynamic inference-path selection"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string out_dir, data_dir;
  std::string ckpt_in, ckpt_out, ckpt;
  std::string metrics_path, report_path, records_path, log_path, curve_path;
  std::string mode_name = "greedy", force_name, split = "eval";

  auto* gen = app.add_subcommand("generate", "Generate a synthetic geo-landmark dataset");
  add_common(gen, flags);
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* pre = app.add_subcommand("pretrain", "Train the recognition network with all gates on");
  add_common(pre, flags);
  pre->add_option("--data", data_dir, "Dataset directory")->required();
  pre->add_option("--ckpt-out", ckpt_out, "Checkpoint output path");
  pre->add_option("--metrics", metrics_path, "Metrics JSONL path");

  auto* pol = app.add_subcommand("train-policy",
                                 "Policy-gradient training against the frozen recognition net");
  add_common(pol, flags);
  pol->add_option("--data", data_dir, "Dataset directory")->required();
  pol->add_option("--ckpt-in", ckpt_in, "Recognition checkpoint")->required();
  pol->add_option("--ckpt-out", ckpt_out, "Checkpoint output path");
  pol->add_option("--metrics", metrics_path, "Metrics JSONL path");

  auto* fin = app.add_subcommand("finetune", "Jointly finetune both networks");
  add_common(fin, flags);
  fin->add_option("--data", data_dir, "Dataset directory")->required();
  fin->add_option("--ckpt-in", ckpt_in, "Combined checkpoint")->required();
  fin->add_option("--ckpt-out", ckpt_out, "Checkpoint output path");
  fin->add_option("--metrics", metrics_path, "Metrics JSONL path");

  auto* ev = app.add_subcommand("evaluate", "Evaluate a trained checkpoint");
  add_common(ev, flags);
  ev->add_option("--data", data_dir, "Dataset directory")->required();
  ev->add_option("--ckpt", ckpt, "Checkpoint to evaluate")->required();
  ev->add_option("--mode", mode_name, "greedy|sample");
  ev->add_option("--force-policy", force_name, "ones|zeros");
  ev->add_option("--split", split, "train|eval");
  ev->add_option("--report", report_path, "Summary JSON path");
  ev->add_option("--records", records_path, "Per-sample JSONL path");

  auto* an = app.add_subcommand("analyze", "Diversity/uniqueness report for a policy log");
  an->add_option("--log", log_path, "Per-sample records JSONL")->required();
  an->add_option("--report", report_path, "Report JSON path");
  an->add_option("--curve", curve_path, "C(N,k) curve TSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(flags, out_dir);
    if (pre->parsed())
      return cmd_pretrain(flags, data_dir,
                          ckpt_out.empty() ? default_path("recognition.json") : ckpt_out,
                          metrics_path.empty() ? default_path("pretrain_metrics.jsonl")
                                               : metrics_path);
    if (pol->parsed())
      return cmd_train_policy(flags, data_dir, ckpt_in,
                              ckpt_out.empty() ? default_path("policy.json") : ckpt_out,
                              metrics_path.empty() ? default_path("policy_metrics.jsonl")
                                                   : metrics_path);
    if (fin->parsed())
      return cmd_finetune(flags, data_dir, ckpt_in,
                          ckpt_out.empty() ? default_path("final.json") : ckpt_out,
                          metrics_path.empty() ? default_path("finetune_metrics.jsonl")
                                               : metrics_path);
    if (ev->parsed())
      return cmd_evaluate(flags, data_dir, ckpt, mode_name, force_name, split,
                          report_path.empty() ? default_path("eval_report.json") : report_path,
                          records_path.empty() ? default_path("eval_records.jsonl")
                                               : records_path);
    if (an->parsed())
      return cmd_analyze(log_path,
                         report_path.empty() ? default_path("analysis.json") : report_path,
                         curve_path.empty() ? default_path("cnk_curve.tsv") : curve_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
