#include <cstdint>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "geopath/rewards.hpp"
#include "geopath/rng.hpp"

using namespace geopath;

namespace {

Policy make(std::vector<std::uint8_t> bits) { return Policy{std::move(bits)}; }

// Independent Pascal-triangle oracle for C(n, k).
std::vector<std::vector<std::uint64_t>> pascal(int n) {
  std::vector<std::vector<std::uint64_t>> c(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    c[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(i + 1), 1);
    for (int j = 1; j < i; ++j)
      c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] +
          c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
  }
  return c;
}

}  // namespace

TEST_CASE("normalized hamming distance") {
  const Policy p = make({1, 1, 0});
  CHECK(hamming_norm(p, p) == 0.0);
  CHECK(hamming_norm(p, make({1, 0, 1})) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(hamming_norm(p, make({0, 0, 1})) == 1.0);
  CHECK_THROWS_AS(hamming_norm(p, make({1, 0})), std::invalid_argument);
}

TEST_CASE("uniqueness over a batch includes the self term") {
  const std::vector<Policy> p{make({1, 0, 1}), make({1, 0, 1}), make({0, 1, 1})};
  const auto u = uniqueness(p);
  CHECK(u[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK(u[2] == doctest::Approx(4.0 / 9.0).epsilon(1e-15));

  const std::vector<Policy> same{make({1, 1}), make({1, 1}), make({1, 1})};
  for (double v : uniqueness(same)) CHECK(v == 0.0);
}

TEST_CASE("uniqueness is bounded by (M-1)/M") {
  Rng rng(5);
  std::vector<Policy> p;
  for (int i = 0; i < 12; ++i) {
    Policy q;
    for (int j = 0; j < 6; ++j) q.bits.push_back(uniform_index(rng, 2) ? 1 : 0);
    p.push_back(q);
  }
  for (double v : uniqueness(p)) {
    CHECK(v >= 0.0);
    CHECK(v <= 11.0 / 12.0);
  }
}

TEST_CASE("uniqueness is permutation-equivariant") {
  Rng rng(17);
  std::vector<Policy> p;
  for (int i = 0; i < 9; ++i) {
    Policy q;
    for (int j = 0; j < 5; ++j) q.bits.push_back(uniform_index(rng, 2) ? 1 : 0);
    p.push_back(q);
  }
  std::vector<std::size_t> perm(p.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  shuffle_indices(perm, rng);

  std::vector<Policy> permuted(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) permuted[i] = p[perm[i]];
  const auto u = uniqueness(p);
  const auto up = uniqueness(permuted);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(up[i] == doctest::Approx(u[perm[i]]).epsilon(1e-15));
}

TEST_CASE("excluding the self term rescales by M/(M-1)") {
  const std::vector<Policy> p{make({1, 0}), make({0, 1}), make({1, 1})};
  const auto with_self = uniqueness(p, true);
  const auto without = uniqueness(p, false);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(without[i] == doctest::Approx(with_self[i] * 3.0 / 2.0).epsilon(1e-15));
}

TEST_CASE("unique policies and diversity") {
  const std::vector<Policy> p{make({1, 0, 1}), make({0, 1, 1}), make({1, 0, 1}), make({0, 1, 1}),
                              make({1, 1, 1})};
  CHECK(diversity(p) == 3);
  const auto uniq = unique_policies(p);
  REQUIRE(uniq.size() == 3);
  CHECK(uniq[0] == make({1, 0, 1}));  // first-occurrence order
  CHECK(uniq[1] == make({0, 1, 1}));
  CHECK(uniq[2] == make({1, 1, 1}));

  CHECK(diversity({make({1, 0}), make({1, 0})}) == 1);
  CHECK(diversity({make({1, 0}), make({0, 1}), make({1, 1})}) == 3);
}

TEST_CASE("reward values") {
  RewardConfig cfg{0.5, 0.5, 1.0};

  Policy p15;
  p15.bits.assign(21, 0);
  for (int i = 0; i < 15; ++i) p15.bits[static_cast<std::size_t>(i)] = 1;
  CHECK(reward(p15, 0.4, true, cfg) == doctest::Approx(0.5649).epsilon(2e-4));

  CHECK(reward(p15, 0.4, false, cfg) == -1.0);
  CHECK(reward(make({1, 1, 1}), 0.9, false, RewardConfig{0.2, 0.3, 2.5}) == -2.5);

  // All blocks skipped with maximal uniqueness: both quadratic terms vanish.
  CHECK(reward(make({0, 0, 0}), 1.0, true, cfg) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("reward is monotone on the correct branch") {
  RewardConfig cfg{0.5, 0.5, 1.0};
  double prev = 2.0;
  for (int k = 0; k <= 8; ++k) {
    Policy p;
    p.bits.assign(8, 0);
    for (int i = 0; i < k; ++i) p.bits[static_cast<std::size_t>(i)] = 1;
    const double r = reward(p, 0.3, true, cfg);
    CHECK(r < prev);  // strictly decreasing in |p|0
    CHECK(r <= cfg.theta_s + cfg.theta_d);
    prev = r;
  }
  const Policy p = make({1, 0, 1, 0});
  double prev_u = -1.0;
  for (double u = 0.0; u < 0.999; u += 0.1) {
    const double r = reward(p, u, true, cfg);
    CHECK(r > prev_u);  // strictly increasing in u below 1
    prev_u = r;
  }
}

TEST_CASE("reward validates its inputs") {
  RewardConfig cfg{0.5, 0.5, 1.0};
  CHECK_THROWS_AS(reward(make({1}), 1.5, true, cfg), std::invalid_argument);
  CHECK_THROWS_AS(reward(make({1}), 0.5, true, RewardConfig{0.0, 0.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(reward(make({1}), 0.5, true, RewardConfig{0.5, 0.5, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("binomial bound on unique policies") {
  CHECK(max_unique(21, 0) == 1);
  CHECK(max_unique(21, 21) == 1);
  CHECK(max_unique(21, 10) == 352716);

  const auto table = pascal(21);
  for (int k = 0; k <= 21; ++k)
    CHECK(max_unique(21, k) == table[21][static_cast<std::size_t>(k)]);

  // The peak sits at k in {10, 11}, i.e. around Pr = 10/21.
  std::uint64_t best = 0;
  for (int k = 0; k <= 21; ++k) best = std::max(best, max_unique(21, k));
  CHECK(best == max_unique(21, 10));
  CHECK(best == max_unique(21, 11));
  for (int k = 0; k <= 21; ++k)
    if (k != 10 && k != 11) CHECK(max_unique(21, k) < best);

  CHECK_THROWS_AS(max_unique(21, 22), std::invalid_argument);
  CHECK_THROWS_AS(max_unique(5, -1), std::invalid_argument);
}

TEST_CASE("binomial symmetry") {
  for (int n = 0; n <= 24; ++n)
    for (int k = 0; k <= n; ++k) CHECK(max_unique(n, k) == max_unique(n, n - k));
}
