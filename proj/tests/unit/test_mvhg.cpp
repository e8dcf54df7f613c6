#include <doctest.h>

#include <cmath>
#include <map>

#include "drpm/errors.hpp"
#include "drpm/mvhg.hpp"
#include "oracles.hpp"

using namespace drpm;

namespace {

MvhgParams make(std::vector<int> m, int n, std::vector<double> omega) {
  MvhgParams p;
  p.m = std::move(m);
  p.n = n;
  p.omega = std::move(omega);
  return p;
}

MvhgParams random_params(Rng& rng, int groups, int n) {
  std::vector<int> m;
  int cap = 0;
  for (int k = 0; k < groups; ++k) {
    m.push_back(rng.uniform_int(n + 1));
    cap += m.back();
  }
  m[0] += std::max(0, n - cap);
  std::vector<double> omega;
  for (int k = 0; k < groups; ++k) omega.push_back(std::exp(rng.normal()));
  return make(m, n, omega);
}

}  // namespace

TEST_CASE("mvhg log-pmf worked examples") {
  CHECK(std::exp(mvhg_log_pmf(make({3, 3}, 3, {1, 1}), SubsetSizes({2, 1}))) == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(mvhg_log_pmf(make({5}, 5, {1}), SubsetSizes({5})) == doctest::Approx(0.0));
  CHECK(std::exp(mvhg_log_pmf(make({3, 3}, 3, {2, 2}), SubsetSizes({2, 1}))) == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("mvhg log-pmf matches the direct product formula") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_params(rng, 1 + trial % 4, 1 + trial % 7);
    for (const auto& c : oracle::count_vectors(p.m, p.n)) {
      const double want = oracle::mvhg_pmf(p.m, p.n, p.omega, c);
      CHECK(std::exp(mvhg_log_pmf(p, SubsetSizes(c))) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("mvhg off-support counts give -inf, bad params throw") {
  const auto p = make({3, 3}, 3, {1, 1});
  CHECK(mvhg_log_pmf(p, SubsetSizes({4, 0})) == -INFINITY);
  CHECK(mvhg_log_pmf(p, SubsetSizes({1, 1})) == -INFINITY);
  CHECK(mvhg_log_pmf(make({1, 3}, 3, {1, 1}), SubsetSizes({2, 1})) == -INFINITY);
  CHECK_THROWS_AS(mvhg_log_pmf(make({1, 1}, 3, {1, 1}), SubsetSizes({1, 2})), ValidationError);
  CHECK_THROWS_AS(make({3, 3}, 3, {1, 0}).validate(), ValidationError);
  CHECK_THROWS_AS(make({3}, 3, {1, 1}).validate(), ValidationError);
  CHECK_THROWS_AS(make({}, 0, {}).validate(), ValidationError);
  CHECK(MvhgParams::with_full_capacity(4, {1, 2, 3}).m == std::vector<int>{4, 4, 4});
}

TEST_CASE("mvhg support enumeration") {
  const auto s = mvhg_support(make({3, 3}, 3, {1, 1}));
  REQUIRE(s.size() == 4);
  CHECK(s[0] == SubsetSizes({0, 3}));
  CHECK(s[1] == SubsetSizes({1, 2}));
  CHECK(s[2] == SubsetSizes({2, 1}));
  CHECK(s[3] == SubsetSizes({3, 0}));
  CHECK(mvhg_support(make({4}, 4, {1})).size() == 1);
  CHECK(mvhg_support(make({2, 2, 2}, 2, {1, 1, 1})).size() == oracle::count_vectors({2, 2, 2}, 2).size());
  CHECK(mvhg_support(make({2, 2, 2}, 2, {1, 1, 1})).size() == 6);
  CHECK_THROWS_AS(mvhg_support(MvhgParams::with_full_capacity(40, std::vector<double>(8, 1.0))), CapacityError);
}

TEST_CASE("property: mvhg normalization for K <= 4, n <= 8") {
  Rng rng(5);
  for (int groups = 1; groups <= 4; ++groups) {
    for (int n = 0; n <= 8; ++n) {
      const auto p = random_params(rng, groups, n);
      double total = 0.0;
      for (const auto& c : mvhg_support(p)) total += std::exp(mvhg_log_pmf(p, c));
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: mvhg scale invariance in omega") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_params(rng, 3, 6);
    auto q = p;
    const double c = std::exp(3.0 * rng.normal());
    for (double& w : q.omega) w *= c;
    for (const auto& s : mvhg_support(p)) {
      const double a = mvhg_log_pmf(p, s);
      const double b = mvhg_log_pmf(q, s);
      CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("mvhg conditional weights") {
  const auto p = make({3, 3}, 3, {1, 1});
  const auto w = mvhg_conditional_weights(p, 0, {});
  REQUIRE(w.size() == 4);
  const std::vector<double> want = {1, 9, 9, 1};
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::exp(w[j]) == doctest::Approx(want[j]));
  const auto last = mvhg_conditional_weights(p, 1, {1});
  CHECK(std::isinf(last[0]));
  CHECK(std::isinf(last[1]));
  CHECK(std::isfinite(last[2]));
  CHECK_THROWS_AS(mvhg_conditional_weights(p, 2, {1, 2}), IndexError);

  SUBCASE("vanishing tail weight forces the first group") {
    const auto skew = make({3, 3}, 3, {1, 1e-12});
    const auto v = mvhg_conditional_weights(skew, 0, {});
    double z = 0.0;
    for (double x : v) z += std::exp(x);
    CHECK(std::exp(v[3]) / z > 1.0 - 1e-9);
  }
}

TEST_CASE("property: product of conditionals equals the joint pmf") {
  Rng rng(9);
  for (int groups = 1; groups <= 3; ++groups) {
    for (int n = 0; n <= 6; ++n) {
      const auto p = random_params(rng, groups, n);
      for (const auto& c : mvhg_support(p)) {
        double log_prod = 0.0;
        std::vector<int> prior;
        for (int k = 0; k < groups; ++k) {
          const auto w = mvhg_conditional_weights(p, k, prior);
          double z = 0.0;
          for (double x : w) z += std::isinf(x) ? 0.0 : std::exp(x);
          log_prod += w[static_cast<std::size_t>(c[k])] - std::log(z);
          prior.push_back(c[k]);
        }
        const double joint = mvhg_log_pmf(p, c);
        CHECK(std::abs(std::exp(log_prod) - std::exp(joint)) <= 1e-10 * std::exp(joint));
      }
    }
  }
}

TEST_CASE("mvhg hard sampler") {
  SUBCASE("single group is forced") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) CHECK(mvhg_sample_hard(make({5}, 5, {2}), rng) == SubsetSizes({5}));
  }
  SUBCASE("empirical frequency of (2,1) at 10^6 draws") {
    const auto p = make({3, 3}, 3, {1, 1});
    Rng rng(2);
    int hits = 0;
    const int draws = 1'000'000;
    for (int i = 0; i < draws; ++i) hits += mvhg_sample_hard(p, rng) == SubsetSizes({2, 1});
    CHECK(std::abs(hits / double(draws) - 0.45) < 0.002);
  }
  SUBCASE("heavily skewed weights") {
    const auto p = make({3, 3}, 3, {1e6, 1});
    Rng rng(3);
    int hits = 0;
    for (int i = 0; i < 100'000; ++i) hits += mvhg_sample_hard(p, rng) == SubsetSizes({3, 0});
    CHECK(hits / 1e5 > 0.999);
  }
  SUBCASE("TV below 0.01 at K=3, m=(4,4,4), n=4, 10^6 draws") {
    Rng prng(4);
    const auto p = make({4, 4, 4}, 4, {std::exp(prng.normal()), std::exp(prng.normal()), std::exp(prng.normal())});
    const Mvhg mv(p);
    std::map<std::vector<int>, int> hist;
    Rng rng(12);
    const int draws = 1'000'000;
    for (int i = 0; i < draws; ++i) ++hist[mv.sample(FixedNoise::draw(p.m, 0, rng).count_gumbels).counts()];
    double tv = 0.0;
    for (const auto& c : mvhg_support(p)) tv += std::abs(hist[c.counts()] / double(draws) - std::exp(mv.log_pmf(c)));
    CHECK(0.5 * tv < 0.01);
  }
}

TEST_CASE("mvhg relaxed sampler") {
  const auto p = make({3, 4, 2}, 5, {0.5, 1.5, 2.0});
  SUBCASE("simplices are normalized and the hard twin is valid") {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
      const auto r = mvhg_sample_relaxed(p, 0.7, rng);
      CHECK(r.hard.total() == 5);
      for (std::size_t k = 0; k < r.simplex.size(); ++k) {
        double z = 0.0;
        for (double x : r.simplex[k]) {
          CHECK(x >= 0.0);
          z += x;
        }
        CHECK(z == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.hard[static_cast<int>(k)] <= p.m[k]);
      }
    }
  }
  SUBCASE("shared noise: hard twin equals the hard sampler, for any tau") {
    for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
      const auto noise = FixedNoise::from_seed(seed, p.m, 0);
      const auto hard = mvhg_sample_hard(p, noise);
      CHECK(mvhg_sample_relaxed(p, 1.0, noise).hard == hard);
      CHECK(mvhg_sample_relaxed(p, 0.5, noise).hard == hard);
    }
  }
  SUBCASE("sharp temperature converges to the one-hot") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto noise = FixedNoise::from_seed(seed, p.m, 0);
      const auto r = mvhg_sample_relaxed(p, 0.01, noise);
      // Only draws whose perturbed top-two gap exceeds ~0.2 are sharp at tau = 0.01.
      const auto stages = relax_counts<double>(p.m, p.n, p.log_omega(), noise.count_gumbels, 0.01, Forward::relaxed);
      if (stages.min_margin < 0.2) continue;
      ++checked;
      for (std::size_t k = 0; k < r.simplex.size(); ++k) {
        const auto hot = r.hard.one_hot(static_cast<int>(k), p.m[k]);
        for (std::size_t j = 0; j < hot.size(); ++j) CHECK(std::abs(r.simplex[k][j] - hot[j]) < 1e-6);
      }
    }
    CHECK(checked > 30);
  }
  SUBCASE("single group is exactly one-hot") {
    Rng rng(3);
    const auto r = mvhg_sample_relaxed(make({4}, 4, {1}), 2.0, rng);
    CHECK(r.simplex[0] == std::vector<double>{0, 0, 0, 0, 1});
    CHECK(r.expected()[0] == 4.0);
  }
  CHECK_THROWS_AS(mvhg_sample_relaxed(p, 0.0, FixedNoise::zero(p.m, 0)), DomainError);
}
