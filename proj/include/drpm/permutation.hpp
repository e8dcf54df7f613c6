#ifndef DRPM_PERMUTATION_HPP
#define DRPM_PERMUTATION_HPP

// Plackett-Luce distribution over orderings and the sort relaxation used to
// reparameterize it.
//
//   p(pi; s) = prod_i (pi s)_i / (Z - sum_{j<i} (pi s)_j),   Z = sum_i s_i.
//
// Sampling perturbs beta * log s with Gumbel(0, beta) noise and sorts in
// decreasing order. The hard sort is written as a row-wise argmax over
// (n + 1 - 2i) * v - A 1 with A[i, j] = |v_i - v_j|; the relaxation replaces
// that argmax with a tempered softmax.

#include <algorithm>
#include <span>
#include <vector>

#include "drpm/logmath.hpp"
#include "drpm/noise.hpp"
#include "drpm/rng.hpp"
#include "drpm/types.hpp"

namespace drpm {

struct PlScores {
  std::vector<double> s;
  double beta = 1.0;

  int size() const { return static_cast<int>(s.size()); }
  void validate() const;
  std::vector<double> log_scores() const;
};

/// Row-stochastic relaxation of a permutation matrix with its hard twin.
struct RelaxedPermutation {
  Matrix<double> values;
  double tau = 1.0;
  PermutationMatrix hard;
};

/// Log-probability of drawing `chosen` in order, one at a time with
/// probability proportional to score, from the candidates in `pool`. With
/// pool = all elements and a full ordering this is the PL log-probability.
template <class Real>
Real sequential_choice_log_prob(std::span<const Real> log_s, std::span<const int> chosen,
                                std::vector<int> pool) {
  Real acc(0.0);
  for (int pick : chosen) {
    std::vector<Real> remaining;
    remaining.reserve(pool.size());
    for (int j : pool) remaining.push_back(log_s[static_cast<std::size_t>(j)]);
    acc += log_s[static_cast<std::size_t>(pick)] - log_sum_exp(std::span<const Real>(remaining));
    pool.erase(std::find(pool.begin(), pool.end(), pick));
  }
  return acc;
}

template <class Real>
Real pl_log_pmf_t(std::span<const Real> log_s, const PermutationMatrix& perm) {
  std::vector<int> pool(log_s.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
  return sequential_choice_log_prob<Real>(log_s, perm.order(), std::move(pool));
}

/// PL log-probability of a row-stochastic (possibly relaxed) permutation.
/// Denominators are suffix sums of the selected scores, sum_{l >= i} (pi s)_l,
/// which equal Z - sum_{j<i} (pi s)_j on hard permutations and stay positive
/// on relaxed ones.
template <class Real>
Real pl_log_pmf_relaxed_t(const Matrix<Real>& pi, std::span<const Real> log_s) {
  using std::exp;
  using std::log;
  const std::size_t n = log_s.size();
  double top = kNegInf;
  for (const Real& x : log_s) top = std::max(top, value_of(x));
  std::vector<Real> scaled;
  for (const Real& x : log_s) scaled.push_back(exp(x - Real(top)));
  std::vector<Real> selected(n, Real(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) selected[i] += pi(i, j) * scaled[j];
  }
  Real acc(0.0);
  Real suffix(0.0);
  for (std::size_t i = n; i-- > 0;) {
    suffix += selected[i];
    acc += log(selected[i]) - log(suffix);
  }
  return acc;
}

/// Row logits (n + 1 - 2i) * v_j - sum_l |v_j - v_l| (i is 1-based).
template <class Real>
Matrix<Real> neuralsort_logits(std::span<const Real> values) {
  using std::abs;
  const std::size_t n = values.size();
  std::vector<Real> spread(n, Real(0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) spread[j] += abs(values[j] - values[l]);
  }
  Matrix<Real> logits(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double coeff = static_cast<double>(n) + 1.0 - 2.0 * static_cast<double>(i + 1);
    for (std::size_t j = 0; j < n; ++j) logits(i, j) = Real(coeff) * values[j] - spread[j];
  }
  return logits;
}

template <class Real>
Matrix<Real> neuralsort_relaxed_t(std::span<const Real> values, double tau) {
  const Matrix<Real> logits = neuralsort_logits(values);
  Matrix<Real> out(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto row = softmax(logits.row(i), tau);
    for (std::size_t j = 0; j < values.size(); ++j) out(i, j) = row[j];
  }
  return out;
}

/// beta * (log s + g): Gumbel(0, beta)-perturbed log-scores.
template <class Real>
std::vector<Real> perturbed_log_scores(std::span<const Real> log_s, std::span<const double> gumbels, double beta) {
  std::vector<Real> out;
  out.reserve(log_s.size());
  for (std::size_t i = 0; i < log_s.size(); ++i) out.push_back(Real(beta) * (log_s[i] + Real(gumbels[i])));
  return out;
}

/// Descending argsort, lowest index first among equal values.
std::vector<int> argsort_descending(std::span<const double> values);

double pl_log_pmf(const PlScores& scores, const PermutationMatrix& perm);

PermutationMatrix pl_sample(const PlScores& scores, Rng& rng);
/// Sort of beta * (log s + g) for the given standard Gumbels g.
PermutationMatrix pl_sample(const PlScores& scores, std::span<const double> gumbels);

/// Most probable permutation: scores sorted descending.
PermutationMatrix pl_max_perm(const PlScores& scores);

/// Log-probability of drawing the rows of `sp` in order, given that the
/// elements in `prior_subsets` were drawn before.
double subset_perm_log_prob(const PlScores& scores, const SubsetPermutation& sp,
                            const std::vector<std::vector<int>>& prior_subsets);

PermutationMatrix neuralsort_hard(std::span<const double> values);
RelaxedPermutation neuralsort_relaxed(std::span<const double> values, double tau);

}  // namespace drpm

#endif  // DRPM_PERMUTATION_HPP
