#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "drpm/errors.hpp"
#include "drpm/grad.hpp"

using namespace drpm;

namespace {

ParamPoint flat_point(int groups, int n) {
  ParamPoint p;
  p.log_omega.assign(static_cast<std::size_t>(groups), 0.0);
  p.log_scores.assign(static_cast<std::size_t>(n), 0.0);
  return p;
}

ParamPoint random_point(Rng& rng, int groups, int n) {
  ParamPoint p;
  for (int k = 0; k < groups; ++k) p.log_omega.push_back(rng.normal());
  for (int i = 0; i < n; ++i) p.log_scores.push_back(rng.normal());
  return p;
}

double sum_range(const std::vector<double>& g, std::size_t from, std::size_t to) {
  return std::accumulate(g.begin() + static_cast<long>(from), g.begin() + static_cast<long>(to), 0.0);
}

}  // namespace

TEST_CASE("param point flattening and names") {
  ParamPoint p;
  p.log_omega = {0.1, 0.2};
  p.log_scores = {1, 2, 3};
  const auto flat = p.flat();
  CHECK(flat == std::vector<double>{0.1, 0.2, 1, 2, 3});
  const auto q = ParamPoint::from_flat(flat, 2);
  CHECK(q.log_omega == p.log_omega);
  CHECK(q.log_scores == p.log_scores);
  CHECK(p.coordinate_name(1) == "log_omega[1]");
  CHECK(p.coordinate_name(2) == "log_scores[0]");
  const auto params = p.to_params({3, 3}, 1.0);
  CHECK(params.mvhg.omega[1] == doctest::Approx(std::exp(0.2)));
  CHECK(params.scores.s[2] == doctest::Approx(std::exp(3.0)));
  p.log_scores[0] = NAN;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("registered objectives") {
  const auto& names = registered_objectives();
  CHECK(names.size() == 9);
  for (const auto& name : names) CHECK(make_objective(name, {3, 3}, 3).name == name);
  try {
    make_objective("nope", {3, 3}, 3);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("pl_log_pmf") != std::string::npos);
  }
}

TEST_CASE("hand-derived PL gradient at s=(1,1,1), identity") {
  auto obj = make_objective("pl_log_pmf", {3, 3}, 3);
  obj.perm = PermutationMatrix::identity(3);
  const auto point = flat_point(2, 3);
  const auto noise = FixedNoise::zero(obj.m, 3);
  const auto vg = eval_scalar_with_gradient(obj, point, noise, 1.0);
  CHECK(vg.value == doctest::Approx(std::log(1.0 / 6)).epsilon(1e-12));
  CHECK(std::abs(vg.gradient[2] - 2.0 / 3.0) < 1e-6);
  // d/dlog s_2 = 1 - 1/3 - 1/2 and d/dlog s_3 = 1 - 1/3 - 1/2 - 1.
  CHECK(std::abs(vg.gradient[3] - 1.0 / 6.0) < 1e-12);
  CHECK(std::abs(vg.gradient[4] + 5.0 / 6.0) < 1e-12);
  CHECK(vg.gradient[0] == 0.0);
  const auto fd = finite_diff_gradient(obj, point, noise, 1.0);
  for (std::size_t i = 0; i < fd.size(); ++i) CHECK(std::abs(fd[i] - vg.gradient[i]) <= 1e-4 * std::max({std::abs(fd[i]), std::abs(vg.gradient[i]), 1e-8}));
  const auto report = gradcheck(obj, point, noise, 1.0);
  CHECK(report.passed);
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("mvhg log-pmf gradient vanishes along a uniform shift of log omega") {
  auto obj = make_objective("mvhg_log_pmf", {3, 3, 3}, 3);
  obj.counts = SubsetSizes({2, 0, 1});
  const auto point = flat_point(3, 3);
  const auto vg = eval_scalar_with_gradient(obj, point, FixedNoise::zero(obj.m, 3), 1.0);
  CHECK(std::abs(sum_range(vg.gradient, 0, 3)) < 1e-12);
  // The zero component sits below the central-difference truncation error, so compare absolutely here.
  CHECK(gradcheck(obj, point, FixedNoise::zero(obj.m, 3), 1.0).max_abs_err < 1e-10);
}

TEST_CASE("property: gradients along all-ones log-parameter directions vanish") {
  Rng rng(41);
  for (const auto& name : registered_objectives()) {
    for (int trial = 0; trial < 5; ++trial) {
      auto obj = make_objective(name, {4, 4, 4}, 4);
      randomize_objective(obj, rng);
      const auto point = random_point(rng, 3, 4);
      const auto noise = FixedNoise::draw(obj.m, 4, rng);
      const auto vg = eval_scalar_with_gradient(obj, point, noise, 0.7);
      INFO(name);
      CHECK(std::abs(sum_range(vg.gradient, 0, 3)) < 1e-8);
      CHECK(std::abs(sum_range(vg.gradient, 3, 7)) < 1e-8);
    }
  }
}

TEST_CASE("finite differences converge quadratically in the step") {
  Rng rng(42);
  auto obj = make_objective("exact_log_pmf", {4, 4}, 4);
  randomize_objective(obj, rng);
  const auto point = random_point(rng, 2, 4);
  const auto noise = FixedNoise::zero(obj.m, 4);
  const auto exact = eval_scalar_with_gradient(obj, point, noise, 1.0).gradient;
  auto err = [&](double step) {
    const auto fd = finite_diff_gradient(obj, point, noise, 1.0, step);
    double e = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) e = std::max(e, std::abs(fd[i] - exact[i]));
    return e;
  };
  const double e3 = err(1e-3);
  const double e4 = err(1e-4);
  const double e5 = err(1e-5);
  CHECK(e3 / e4 > 50.0);
  CHECK(e3 / e4 < 200.0);
  CHECK(e4 / e5 > 50.0);
  CHECK(e4 / e5 < 200.0);
  CHECK(err(1e-6) < 1e-10);
}

TEST_CASE("fixed noise is reproducible bit for bit") {
  const std::vector<int> m = {3, 2, 4};
  const auto a = FixedNoise::from_seed(99, m, 5);
  const auto b = FixedNoise::from_seed(99, m, 5);
  CHECK(a.count_gumbels == b.count_gumbels);
  CHECK(a.score_gumbels == b.score_gumbels);
  CHECK(a.count_gumbels.size() == 4 + 3 + 5);
  CHECK(a.score_gumbels.size() == 5);
  CHECK_FALSE(FixedNoise::from_seed(100, m, 5).score_gumbels == a.score_gumbels);

  Rng rng(43);
  for (const auto& name : registered_objectives()) {
    auto obj = make_objective(name, m, 5);
    randomize_objective(obj, rng);
    const auto point = random_point(rng, 3, 5);
    const double v1 = eval_scalar_with_gradient(obj, point, a, 0.5).value;
    const double v2 = eval_scalar_with_gradient(obj, point, b, 0.5).value;
    CHECK(std::memcmp(&v1, &v2, sizeof(double)) == 0);
  }
}

TEST_CASE("gradcheck trials pass for every objective on a small model") {
  for (const auto& name : registered_objectives()) {
    for (double tau : {1.0, 0.5}) {
      const auto t = run_gradcheck_trials(name, {3, 3}, 3, 1.0, flat_point(2, 3), tau, 5, 7);
      INFO(name << " tau=" << tau);
      CHECK(t.reports.size() == 5);
      CHECK(t.all_passed());
    }
  }
}

TEST_CASE("gradient csv") {
  auto obj = make_objective("pl_log_pmf", {2, 2}, 2);
  obj.perm = PermutationMatrix::identity(2);
  const auto r = gradcheck(obj, flat_point(2, 2), FixedNoise::zero(obj.m, 2), 1.0);
  std::ostringstream out;
  write_gradient_csv(out, {r});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "objective,coordinate,analytic,fd,rel_err");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind("pl_log_pmf,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("temperature annealing schedule") {
  CHECK(anneal_tau(0, 100) == doctest::Approx(1.0));
  CHECK(anneal_tau(100, 100) == doctest::Approx(0.5));
  CHECK(anneal_tau(250, 100) == doctest::Approx(0.5));
  CHECK(anneal_tau(50, 100) == doctest::Approx(std::exp(-std::log(2.0) / 2)).epsilon(1e-12));
  CHECK(anneal_tau(50, 100) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(anneal_tau(10, 2.0, 2.0, 5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(anneal_tau(0, 0.5, 1.0, 10), DomainError);
  CHECK_THROWS_AS(anneal_tau(0, 1.0, 0.0, 10), DomainError);
  CHECK_THROWS_AS(anneal_tau(0, 1.0, 0.5, 0), DomainError);
}

TEST_CASE("adaptive-moment optimizer") {
  SUBCASE("zero gradient leaves the point unchanged") {
    const std::vector<double> p = {0.3, -2.0};
    const std::vector<double> g = {0.0, 0.0};
    const auto s = optimizer_step(AdamState::zeros(2), g, p);
    CHECK(s.point == p);
    CHECK(s.state.t == 1);
  }
  SUBCASE("constant gradient gives steps of size lr") {
    std::vector<double> p = {0.0};
    const std::vector<double> g = {3.7};
    auto state = AdamState::zeros(1);
    double last = 0.0;
    for (int i = 0; i < 500; ++i) {
      const auto s = optimizer_step(state, g, p);
      last = p[0] - s.point[0];
      p = s.point;
      state = s.state;
    }
    CHECK(last == doctest::Approx(0.01).epsilon(1e-6));
  }
  SUBCASE("quadratic bowl from (1,1) reaches norm below 1e-3 within 2000 steps") {
    std::vector<double> p = {1.0, 1.0};
    auto state = AdamState::zeros(2);
    double best = 1e9;
    for (int i = 0; i < 2000; ++i) {
      const std::vector<double> g = {2 * p[0], 2 * p[1]};
      const auto s = optimizer_step(state, g, p);
      p = s.point;
      state = s.state;
      best = std::min(best, std::hypot(p[0], p[1]));
    }
    CHECK(std::hypot(p[0], p[1]) < 1e-3);
    CHECK(best < 1e-3);
  }
  SUBCASE("deterministic") {
    const std::vector<double> p = {0.5};
    const std::vector<double> g = {0.25};
    CHECK(optimizer_step(AdamState::zeros(1), g, p).point == optimizer_step(AdamState::zeros(1), g, p).point);
  }
}
