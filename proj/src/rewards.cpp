#include "geopath/rewards.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace geopath {

void RewardConfig::validate() const {
  if (!(theta_s >= 0.0) || !std::isfinite(theta_s))
    throw std::invalid_argument("RewardConfig: theta_s must be finite and >= 0");
  if (!(theta_d >= 0.0) || !std::isfinite(theta_d))
    throw std::invalid_argument("RewardConfig: theta_d must be finite and >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("RewardConfig: lambda must be finite and > 0");
  if (!(theta_s + theta_d > 0.0))
    throw std::invalid_argument("RewardConfig: theta_s + theta_d must be > 0");
}

double hamming_norm(const Policy& a, const Policy& b) {
  if (a.bits.size() != b.bits.size())
    throw std::invalid_argument("hamming_norm: length mismatch, " +
                                std::to_string(a.bits.size()) + " vs " +
                                std::to_string(b.bits.size()));
  if (a.bits.empty()) throw std::invalid_argument("hamming_norm: empty policy");
  int diff = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) diff += a.bits[i] != b.bits[i];
  return static_cast<double>(diff) / static_cast<double>(a.bits.size());
}

std::vector<double> uniqueness(const std::vector<Policy>& policies, bool include_self) {
  if (policies.empty()) throw std::invalid_argument("uniqueness: empty policy set");
  const std::size_t m = policies.size();
  std::vector<double> u(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += hamming_norm(policies[i], policies[j]);
    const double denom = include_self ? static_cast<double>(m)
                                      : static_cast<double>(m > 1 ? m - 1 : 1);
    u[i] = total / denom;
  }
  return u;
}

std::vector<Policy> unique_policies(const std::vector<Policy>& policies) {
  std::unordered_set<std::string> seen;
  std::vector<Policy> out;
  for (const auto& p : policies) {
    std::string key(p.bits.begin(), p.bits.end());
    if (seen.insert(std::move(key)).second) out.push_back(p);
  }
  return out;
}

double reward(const Policy& p, double u, bool correct, const RewardConfig& cfg) {
  cfg.validate();
  if (!(u >= 0.0 && u <= 1.0))
    throw std::invalid_argument("reward: uniqueness " + std::to_string(u) + " outside [0, 1]");
  if (!correct) return -cfg.lambda;
  const double pr = static_cast<double>(p.active_blocks()) / static_cast<double>(p.bits.size());
  return cfg.theta_s * (1.0 - pr * pr) + cfg.theta_d * (1.0 - (1.0 - u) * (1.0 - u));
}

std::uint64_t max_unique(int n, int k) {
  if (n < 0) throw std::invalid_argument("max_unique: n must be >= 0");
  if (k < 0 || k > n)
    throw std::invalid_argument("max_unique: k=" + std::to_string(k) +
                                " outside [0, " + std::to_string(n) + "]");
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (r > static_cast<unsigned __int128>(UINT64_MAX))
      throw std::overflow_error("max_unique: C(" + std::to_string(n) + "," + std::to_string(k) +
                                ") exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace geopath
