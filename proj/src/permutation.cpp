#include "drpm/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drpm/errors.hpp"

namespace drpm {

void PlScores::validate() const {
  if (s.empty()) throw ValidationError("scores: need at least one element");
  for (double v : s) {
    if (!std::isfinite(v) || v <= 0.0) throw ValidationError("scores: every score must be finite and > 0");
  }
  if (!std::isfinite(beta) || beta <= 0.0) throw ValidationError("beta: must be finite and > 0");
}

std::vector<double> PlScores::log_scores() const {
  std::vector<double> out;
  out.reserve(s.size());
  for (double v : s) out.push_back(std::log(v));
  return out;
}

std::vector<int> argsort_descending(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
  });
  return order;
}

double pl_log_pmf(const PlScores& scores, const PermutationMatrix& perm) {
  scores.validate();
  if (perm.size() != scores.size()) throw ValidationError("permutation size does not match scores");
  const auto log_s = scores.log_scores();
  return pl_log_pmf_t<double>(log_s, perm);
}

PermutationMatrix pl_sample(const PlScores& scores, std::span<const double> gumbels) {
  scores.validate();
  const auto log_s = scores.log_scores();
  const auto perturbed = perturbed_log_scores<double>(log_s, gumbels, scores.beta);
  return PermutationMatrix(argsort_descending(perturbed));
}

PermutationMatrix pl_sample(const PlScores& scores, Rng& rng) {
  std::vector<double> g(scores.s.size());
  for (double& x : g) x = rng.gumbel();
  return pl_sample(scores, g);
}

PermutationMatrix pl_max_perm(const PlScores& scores) {
  scores.validate();
  return PermutationMatrix(argsort_descending(scores.s));
}

double subset_perm_log_prob(const PlScores& scores, const SubsetPermutation& sp,
                            const std::vector<std::vector<int>>& prior_subsets) {
  scores.validate();
  if (sp.cols() != scores.size()) throw ValidationError("subset permutation width does not match scores");
  std::vector<char> used(scores.s.size(), 0);
  for (const auto& subset : prior_subsets) {
    for (int j : subset) {
      if (j < 0 || j >= scores.size()) throw ValidationError("prior subset element out of range");
      used[static_cast<std::size_t>(j)] = 1;
    }
  }
  for (int j : sp.selected()) {
    if (used[static_cast<std::size_t>(j)]) {
      throw ValidationError("subset permutation selects element " + std::to_string(j + 1) +
                            " already in a prior subset");
    }
  }
  std::vector<int> pool;
  for (int j = 0; j < scores.size(); ++j) {
    if (!used[static_cast<std::size_t>(j)]) pool.push_back(j);
  }
  const auto log_s = scores.log_scores();
  return sequential_choice_log_prob<double>(log_s, sp.selected(), std::move(pool));
}

PermutationMatrix neuralsort_hard(std::span<const double> values) {
  const Matrix<double> logits = neuralsort_logits(values);
  const std::size_t n = values.size();
  std::vector<char> claimed(n, 0);
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (claimed[j]) continue;
      if (best < 0 || logits(i, j) > logits(i, static_cast<std::size_t>(best))) best = static_cast<int>(j);
    }
    claimed[static_cast<std::size_t>(best)] = 1;
    order.push_back(best);
  }
  return PermutationMatrix(std::move(order));
}

RelaxedPermutation neuralsort_relaxed(std::span<const double> values, double tau) {
  if (!(tau > 0.0)) throw DomainError("tau must be > 0");
  RelaxedPermutation out;
  out.values = neuralsort_relaxed_t<double>(values, tau);
  out.tau = tau;
  out.hard = neuralsort_hard(values);
  return out;
}

}  // namespace drpm
