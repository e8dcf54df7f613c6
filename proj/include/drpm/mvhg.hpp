#ifndef DRPM_MVHG_HPP
#define DRPM_MVHG_HPP

// Fisher's noncentral multivariate hypergeometric distribution over subset
// sizes:
//
//   p(n; w, m) = (1 / P0) * prod_k C(m_k, n_k) * w_k^{n_k},   sum_k n_k = n.
//
// Everything is evaluated in log-space. P0 and the conditional normalizers
// come from a suffix table
//
//   C_k(t) = sum over tails (eta_k, ..., eta_K) with sum t of
//            prod_{i >= k} C(m_i, eta_i) w_i^{eta_i}
//
// so that C_0(n) = P0 and the exact conditional of n_k given the groups
// before it is proportional to C(m_k, j) w_k^j C_{k+1}(r - j).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "drpm/logmath.hpp"
#include "drpm/noise.hpp"
#include "drpm/rng.hpp"
#include "drpm/types.hpp"

namespace drpm {

inline constexpr std::size_t kSupportGuard = 10'000'000;

struct MvhgParams {
  std::vector<int> m;          // per-group capacities
  int n = 0;                   // total draws
  std::vector<double> omega;   // importance weights, strictly positive

  int groups() const { return static_cast<int>(omega.size()); }

  /// Every m_k = n.
  static MvhgParams with_full_capacity(int n, std::vector<double> omega);

  /// Throws ValidationError naming the violated invariant.
  void validate() const;

  /// log w_k, with w clamped below at 1e-30.
  std::vector<double> log_omega() const;
};

/// Suffix normalizers, table[k][t] = log C_k(t) for k = 0..K, t = 0..n.
template <class Real>
std::vector<std::vector<Real>> suffix_log_normalizers(const std::vector<int>& m, int n,
                                                      std::span<const Real> log_omega) {
  const std::size_t groups = m.size();
  std::vector<std::vector<Real>> table(groups + 1, std::vector<Real>(static_cast<std::size_t>(n) + 1, Real(kNegInf)));
  table[groups][0] = Real(0.0);
  for (std::size_t k = groups; k-- > 0;) {
    for (int t = 0; t <= n; ++t) {
      std::vector<Real> terms;
      for (int j = 0; j <= std::min(m[k], t); ++j) {
        const Real& tail = table[k + 1][static_cast<std::size_t>(t - j)];
        if (value_of(tail) == kNegInf) continue;
        terms.push_back(Real(log_choose(m[k], j)) + Real(static_cast<double>(j)) * log_omega[k] + tail);
      }
      table[k][static_cast<std::size_t>(t)] = log_sum_exp(terms);
    }
  }
  return table;
}

/// Unnormalized log-weights of n_k = j for j = 0..min(m_k, r), given r draws
/// remain for groups k..K-1. Infeasible j (tail cannot absorb r - j) get -inf.
template <class Real>
std::vector<Real> conditional_log_weights(const std::vector<int>& m, std::span<const Real> log_omega,
                                          const std::vector<std::vector<Real>>& table, int k, int r) {
  const std::size_t kk = static_cast<std::size_t>(k);
  std::vector<Real> w;
  for (int j = 0; j <= std::min(m[kk], r); ++j) {
    const Real& tail = table[kk + 1][static_cast<std::size_t>(r - j)];
    if (value_of(tail) == kNegInf) {
      w.push_back(Real(kNegInf));
    } else {
      w.push_back(Real(log_choose(m[kk], j)) + Real(static_cast<double>(j)) * log_omega[kk] + tail);
    }
  }
  return w;
}

/// log p(counts); -inf off the support.
template <class Real>
Real mvhg_log_pmf_t(const std::vector<int>& m, int n, std::span<const Real> log_omega,
                    const std::vector<std::vector<Real>>& table, const SubsetSizes& counts) {
  if (counts.groups() != static_cast<int>(m.size()) || counts.total() != n) return Real(kNegInf);
  Real acc(0.0);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const int c = counts[static_cast<int>(k)];
    if (c > m[k]) return Real(kNegInf);
    acc += Real(log_choose(m[k], c)) + Real(static_cast<double>(c)) * log_omega[k];
  }
  return acc - table[0][static_cast<std::size_t>(n)];
}

/// Relaxed subset sizes: per-group simplex over {0..m_k} and its hard twin.
struct RelaxedCounts {
  std::vector<std::vector<double>> simplex;
  SubsetSizes hard;
  double tau = 1.0;

  /// sum_j j * simplex[k][j]; equals hard[k] when the simplex is one-hot.
  std::vector<double> expected() const;
};

/// Relaxed stage output for any scalar type.
template <class Real>
struct CountStages {
  std::vector<std::vector<Real>> simplex;  // relaxed one-hot per group
  std::vector<Real> counts;                // straight-through or relaxed n_k
  SubsetSizes hard;
  double min_margin = 0.0;                 // smallest top-1 minus top-2 perturbed logit
};

/// Group-by-group Gumbel perturbation of the exact conditionals. The argmax
/// fixes the realized n_k (fed to the next conditional); the tempered
/// softmax gives the relaxed one-hot.
template <class Real>
CountStages<Real> relax_counts(const std::vector<int>& m, int n, std::span<const Real> log_omega,
                               std::span<const double> gumbels, double tau, Forward forward) {
  const auto table = suffix_log_normalizers<Real>(m, n, log_omega);
  CountStages<Real> out;
  out.min_margin = std::numeric_limits<double>::infinity();
  std::vector<int> hard;
  int remaining = n;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    auto logits = conditional_log_weights<Real>(m, log_omega, table, static_cast<int>(k), remaining);
    for (std::size_t j = 0; j < logits.size(); ++j) {
      if (value_of(logits[j]) != kNegInf) logits[j] += Real(gumbels[offset + j]);
    }
    const int pick = argmax(std::span<const Real>(logits));
    double second = kNegInf;
    for (std::size_t j = 0; j < logits.size(); ++j) {
      if (static_cast<int>(j) != pick) second = std::max(second, value_of(logits[j]));
    }
    if (second != kNegInf) out.min_margin = std::min(out.min_margin, value_of(logits[static_cast<std::size_t>(pick)]) - second);

    auto probs = softmax(std::span<const Real>(logits), tau);
    std::vector<Real> simplex(static_cast<std::size_t>(m[k]) + 1, Real(0.0));
    Real soft(0.0);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      simplex[j] = probs[j];
      soft += Real(static_cast<double>(j)) * probs[j];
    }
    if (forward == Forward::straight_through) {
      for (std::size_t j = 0; j < simplex.size(); ++j) {
        simplex[j] = straight_through(static_cast<int>(j) == pick ? 1.0 : 0.0, simplex[j]);
      }
      out.counts.push_back(straight_through(static_cast<double>(pick), soft));
    } else {
      out.counts.push_back(soft);
    }
    out.simplex.push_back(std::move(simplex));
    hard.push_back(pick);
    remaining -= pick;
    offset += static_cast<std::size_t>(m[k]) + 1;
  }
  out.hard = SubsetSizes(std::move(hard));
  return out;
}

/// MVHG with its suffix table computed once.
class Mvhg {
 public:
  explicit Mvhg(MvhgParams params);

  const MvhgParams& params() const { return params_; }
  double log_pmf(const SubsetSizes& counts) const;
  std::vector<double> conditional_log_weights(int k, int remaining) const;
  double log_normalizer() const { return table_[0][static_cast<std::size_t>(params_.n)]; }

  /// Gumbel-max over the exact conditionals, group by group. Same decisions
  /// as relax_counts for the same noise.
  SubsetSizes sample(std::span<const double> gumbels) const;

 private:
  MvhgParams params_;
  std::vector<double> log_omega_;
  std::vector<std::vector<double>> table_;
};

double mvhg_log_pmf(const MvhgParams& params, const SubsetSizes& counts);

/// All count vectors with sum n and n_k <= m_k, lexicographic order.
std::vector<SubsetSizes> mvhg_support(const MvhgParams& params, std::size_t guard = kSupportGuard);

/// Log-weights over j = 0..min(m_k, r) given the counts of groups before k.
std::vector<double> mvhg_conditional_weights(const MvhgParams& params, int k,
                                             const std::vector<int>& prior_counts);

SubsetSizes mvhg_sample_hard(const MvhgParams& params, Rng& rng);
SubsetSizes mvhg_sample_hard(const MvhgParams& params, const FixedNoise& noise);

RelaxedCounts mvhg_sample_relaxed(const MvhgParams& params, double tau, Rng& rng);
RelaxedCounts mvhg_sample_relaxed(const MvhgParams& params, double tau, const FixedNoise& noise);

}  // namespace drpm

#endif  // DRPM_MVHG_HPP
