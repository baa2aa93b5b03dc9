#pragma once

#include <cstdint>
#include <vector>

namespace geopath {

// One keep/skip decision per residual block; 1 keeps the block.
struct Policy {
  std::vector<std::uint8_t> bits;

  int active_blocks() const {
    int n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }
  bool operator==(const Policy& o) const { return bits == o.bits; }
};

struct RewardConfig {
  double theta_s = 0.5;  // sparsity weight
  double theta_d = 0.5;  // diversity weight
  double lambda = 1.0;   // penalty for incorrect predictions

  void validate() const;
};

// Fraction of differing bits; both policies must have equal length.
double hamming_norm(const Policy& a, const Policy& b);

// u_i = (1/M) sum_j Hamming(p_i, p_j). The sum runs over all j including
// j = i; include_self=false rescales to the M-1 other policies instead.
std::vector<double> uniqueness(const std::vector<Policy>& policies, bool include_self = true);

// Distinct policies, first occurrence order preserved.
std::vector<Policy> unique_policies(const std::vector<Policy>& policies);

inline int diversity(const std::vector<Policy>& policies) {
  return static_cast<int>(unique_policies(policies).size());
}

// theta_s*(1 - (|p|0/N)^2) + theta_d*(1 - (1-u)^2) when correct, -lambda
// otherwise.
double reward(const Policy& p, double u, bool correct, const RewardConfig& cfg);

// Exact binomial coefficient C(n, k): the most unique policies attainable at
// a fixed number of kept blocks.
std::uint64_t max_unique(int n, int k);

}  // namespace geopath
