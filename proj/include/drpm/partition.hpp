#ifndef DRPM_PARTITION_HPP
#define DRPM_PARTITION_HPP

// The two-stage random partition model. Subset sizes come from the MVHG,
// an ordering of the elements from Plackett-Luce, and the partition is
// obtained by summing consecutive rows of the permutation matrix:
//
//   y_k = sum_{i = nu_k + 1}^{nu_k + n_k} pi_i,   nu_k = sum_{l < k} n_l.
//
// The exact PMF marginalizes over the orderings consistent with Y, which
// factorizes into one sum over the n_k! orderings of every subset.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "drpm/logmath.hpp"
#include "drpm/mvhg.hpp"
#include "drpm/noise.hpp"
#include "drpm/permutation.hpp"
#include "drpm/rng.hpp"
#include "drpm/types.hpp"

namespace drpm {

inline constexpr std::size_t kOrderingGuard = 1'000'000;
inline constexpr double kDefaultEps = 0.5;

struct DrpmParams {
  MvhgParams mvhg;
  PlScores scores;

  int n() const { return mvhg.n; }
  int groups() const { return mvhg.groups(); }
  void validate() const;
};

struct RelaxedAssignment {
  Matrix<double> values;  // K x n, non-negative
  Matrix<double> alpha;   // K x n sigmoid gates
  double tau = 1.0;
  AssignmentMatrix hard;
};

struct PmfBounds {
  double log_lower = 0.0;
  double log_upper = 0.0;
};

enum class BoundsMode { heuristic, enumerate };

AssignmentMatrix build_partition(const PermutationMatrix& perm, const SubsetSizes& counts);

/// f_i(x; tau) = sigmoid((x - i + eps) / tau), i = 1..n. Gate k is
/// f(nu_{k+1}) - f(nu_k) where nu_{k+1} is the cumulative count through k.
template <class Real>
Matrix<Real> count_gates(std::span<const Real> counts, int n, double tau, double eps) {
  Matrix<Real> gates(counts.size(), static_cast<std::size_t>(n));
  Real lower(0.0);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const Real upper = lower + counts[k];
    for (int i = 1; i <= n; ++i) {
      const Real shift(eps - static_cast<double>(i));
      gates(k, static_cast<std::size_t>(i - 1)) =
          sigmoid((upper + shift) / Real(tau)) - sigmoid((lower + shift) / Real(tau));
    }
    lower = upper;
  }
  return gates;
}

/// y_k = sum_i gates[k, i] * perm row i.
template <class Real>
Matrix<Real> gate_rows(const Matrix<Real>& gates, const Matrix<Real>& perm) {
  Matrix<Real> out(gates.rows(), perm.cols(), Real(0.0));
  for (std::size_t k = 0; k < gates.rows(); ++k) {
    for (std::size_t i = 0; i < perm.rows(); ++i) {
      for (std::size_t j = 0; j < perm.cols(); ++j) out(k, j) += gates(k, i) * perm(i, j);
    }
  }
  return out;
}

RelaxedAssignment build_partition_relaxed(const RelaxedPermutation& rperm, const RelaxedCounts& rcounts,
                                          double tau, double eps = kDefaultEps);

/// log |Pi_Y| = sum_k log n_k!.
double log_num_orderings(const SubsetSizes& counts);

/// log of the sum over orderings of `subset` of the probability of drawing
/// them first from `pool` (the elements not in earlier subsets).
template <class Real>
Real log_subset_marginal(std::span<const Real> log_s, std::vector<int> subset, const std::vector<int>& pool) {
  if (subset.empty()) return Real(0.0);
  std::sort(subset.begin(), subset.end());
  std::vector<Real> terms;
  do {
    terms.push_back(sequential_choice_log_prob<Real>(log_s, subset, pool));
  } while (std::next_permutation(subset.begin(), subset.end()));
  return log_sum_exp(terms);
}

/// Best single ordering of `subset`: descending score, lowest index on ties.
std::vector<int> descending_score_order(std::span<const double> log_s, std::vector<int> subset);

template <class Real>
Real partition_log_pmf_t(const std::vector<int>& m, int n, std::span<const Real> log_omega,
                         std::span<const Real> log_s, const AssignmentMatrix& y) {
  const auto table = suffix_log_normalizers<Real>(m, n, log_omega);
  Real acc = mvhg_log_pmf_t<Real>(m, n, log_omega, table, y.counts());
  if (value_of(acc) == kNegInf) return acc;
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int k = 0; k < y.groups(); ++k) {
    const auto subset = y.subset(k);
    acc += log_subset_marginal<Real>(log_s, subset, pool);
    std::erase_if(pool, [&](int j) { return y.labels()[static_cast<std::size_t>(j)] == k; });
  }
  return acc;
}

/// Upper bound log|Pi_Y| + log p(n) + log p(pi_s; s).
template <class Real>
Real log_upper_bound_t(const std::vector<int>& m, int n, std::span<const Real> log_omega,
                       std::span<const Real> log_s, const AssignmentMatrix& y) {
  const auto table = suffix_log_normalizers<Real>(m, n, log_omega);
  std::vector<double> s_values;
  for (const Real& x : log_s) s_values.push_back(value_of(x));
  const PermutationMatrix best(argsort_descending(s_values));
  return Real(log_num_orderings(y.counts())) + mvhg_log_pmf_t<Real>(m, n, log_omega, table, y.counts()) +
         pl_log_pmf_t<Real>(log_s, best);
}

/// Lower bound log p(n) + log p(pi; s) for the ordering that lists each
/// subset in descending score order.
template <class Real>
Real log_lower_bound_t(const std::vector<int>& m, int n, std::span<const Real> log_omega,
                       std::span<const Real> log_s, const AssignmentMatrix& y) {
  const auto table = suffix_log_normalizers<Real>(m, n, log_omega);
  std::vector<double> s_values;
  for (const Real& x : log_s) s_values.push_back(value_of(x));
  std::vector<int> order;
  for (int k = 0; k < y.groups(); ++k) {
    const auto sub = descending_score_order(s_values, y.subset(k));
    order.insert(order.end(), sub.begin(), sub.end());
  }
  return mvhg_log_pmf_t<Real>(m, n, log_omega, table, y.counts()) +
         pl_log_pmf_t<Real>(log_s, PermutationMatrix(std::move(order)));
}

/// Exact log p(Y). Throws CapacityError when sum_k n_k! exceeds the guard.
double partition_log_pmf_exact(const DrpmParams& params, const AssignmentMatrix& y,
                               std::size_t guard = kOrderingGuard);

PmfBounds partition_pmf_bounds(const DrpmParams& params, const AssignmentMatrix& y,
                               BoundsMode mode = BoundsMode::heuristic, std::size_t guard = kOrderingGuard);

/// Everything produced by one relaxed two-stage draw.
template <class Real>
struct RelaxedDraw {
  CountStages<Real> counts;
  std::vector<Real> perturbed;   // beta * (log s + g)
  Matrix<Real> perm;             // relaxed permutation
  Matrix<Real> perm_forward;     // relaxed permutation, forward value per `Forward`
  PermutationMatrix hard_perm;
  Matrix<Real> gates;
  Matrix<Real> assignment_soft;  // gates applied to the relaxed permutation
  Matrix<Real> assignment;       // forward value per `Forward`
  AssignmentMatrix hard;
  double min_count_margin = 0.0;
  double min_score_gap = 0.0;    // smallest gap between distinct-rank perturbed values
};

template <class Real>
RelaxedDraw<Real> relaxed_draw(const std::vector<int>& m, int n, std::span<const Real> log_omega,
                               std::span<const Real> log_s, double beta, const FixedNoise& noise,
                               double tau, double eps, Forward forward) {
  RelaxedDraw<Real> d;
  d.counts = relax_counts<Real>(m, n, log_omega, noise.count_gumbels, tau, forward);
  d.min_count_margin = d.counts.min_margin;
  d.perturbed = perturbed_log_scores<Real>(log_s, noise.score_gumbels, beta);
  d.perm = neuralsort_relaxed_t<Real>(d.perturbed, tau);
  std::vector<double> plain;
  for (const Real& v : d.perturbed) plain.push_back(value_of(v));
  d.hard_perm = neuralsort_hard(plain);
  d.min_score_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i) {
    d.min_score_gap = std::min(d.min_score_gap, plain[static_cast<std::size_t>(d.hard_perm[i])] -
                                                    plain[static_cast<std::size_t>(d.hard_perm[i + 1])]);
  }
  d.gates = count_gates<Real>(d.counts.counts, n, tau, eps);
  d.assignment_soft = gate_rows(d.gates, d.perm);
  d.hard = build_partition(d.hard_perm, d.counts.hard);
  d.assignment = d.assignment_soft;
  d.perm_forward = d.perm;
  if (forward == Forward::straight_through) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        auto& e = d.perm_forward(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        e = straight_through(static_cast<double>(d.hard_perm.at(i, j)), e);
      }
    }
    for (int k = 0; k < d.hard.groups(); ++k) {
      for (int i = 0; i < n; ++i) {
        auto& e = d.assignment(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
        e = straight_through(static_cast<double>(d.hard.at(k, i)), e);
      }
    }
  }
  return d;
}

/// Hard two-stage sampler with the MVHG suffix table computed once.
class PartitionSampler {
 public:
  explicit PartitionSampler(const DrpmParams& params);

  AssignmentMatrix sample(const FixedNoise& noise) const;
  AssignmentMatrix sample(Rng& rng) const;
  const DrpmParams& params() const { return params_; }

 private:
  DrpmParams params_;
  Mvhg mvhg_;
  std::vector<double> log_s_;
};

AssignmentMatrix sample_partition_hard(const DrpmParams& params, Rng& rng);
AssignmentMatrix sample_partition_hard(const DrpmParams& params, const FixedNoise& noise);

RelaxedAssignment sample_partition_relaxed(const DrpmParams& params, double tau, Rng& rng,
                                           double eps = kDefaultEps);
RelaxedAssignment sample_partition_relaxed(const DrpmParams& params, double tau, const FixedNoise& noise,
                                           double eps = kDefaultEps);

}  // namespace drpm

#endif  // DRPM_PARTITION_HPP
