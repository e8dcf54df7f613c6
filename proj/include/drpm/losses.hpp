#ifndef DRPM_LOSSES_HPP
#define DRPM_LOSSES_HPP

// Scalar losses over relaxed partitions, written for any scalar type so the
// same code serves plain evaluation, forward-mode gradients and finite
// differences.

#include <span>
#include <vector>

#include "drpm/logmath.hpp"
#include "drpm/mvhg.hpp"
#include "drpm/permutation.hpp"
#include "drpm/types.hpp"

namespace drpm {

inline constexpr double kProbFloor = 1e-12;

template <class Real>
struct SupervisedLossParts {
  Real l1;
  Real l2;
  Real total;
};

/// L = L1 + alpha * L2.
///   L1: mean over columns of -log p_target, where each column is normalized
///       across groups and p is floored at 1e-12.
///   L2: (1/K) * sum_k (n_hat_k - target_k)^2.
template <class Real>
SupervisedLossParts<Real> supervised_loss_t(const Matrix<Real>& y, std::span<const Real> n_hat,
                                            const AssignmentMatrix& target, double alpha) {
  using std::log;
  const std::size_t groups = y.rows();
  const std::size_t n = y.cols();
  Real l1(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Real z(0.0);
    for (std::size_t k = 0; k < groups; ++k) z += y(k, i);
    if (value_of(z) < kProbFloor) z = Real(kProbFloor);
    Real p = y(static_cast<std::size_t>(target.labels()[i]), i) / z;
    if (value_of(p) < kProbFloor) p = Real(kProbFloor);
    l1 -= log(p);
  }
  l1 = l1 / Real(static_cast<double>(n));
  const SubsetSizes counts = target.counts();
  Real l2(0.0);
  for (std::size_t k = 0; k < groups; ++k) {
    const Real diff = n_hat[k] - Real(static_cast<double>(counts[static_cast<int>(k)]));
    l2 += diff * diff;
  }
  l2 = l2 / Real(static_cast<double>(groups));
  return {l1, l2, l1 + Real(alpha) * l2};
}

/// Count term of the KL surrogate, log |Pi_Y| + log q(n) - log p(n), written
/// linearly in the (relaxed) one-hot count encodings so it stays
/// differentiable. The binomial factors of q and p cancel.
template <class Real>
Real kl_counts_term_t(const std::vector<int>& m, int n, std::span<const Real> log_omega_q,
                      std::span<const double> log_omega_p, const std::vector<std::vector<Real>>& simplex) {
  const auto table_q = suffix_log_normalizers<Real>(m, n, log_omega_q);
  const auto table_p = suffix_log_normalizers<double>(m, n, log_omega_p);
  Real acc(0.0);
  for (std::size_t k = 0; k < m.size(); ++k) {
    for (std::size_t j = 0; j < simplex[k].size(); ++j) {
      const Real per = Real(log_factorial(static_cast<int>(j))) +
                       Real(static_cast<double>(j)) * (log_omega_q[k] - Real(log_omega_p[k]));
      acc += simplex[k][j] * per;
    }
  }
  return acc - table_q[0][static_cast<std::size_t>(n)] + Real(table_p[0][static_cast<std::size_t>(n)]);
}

/// Permutation term of the KL surrogate, log max_pi q(pi) - log p(pi_Y).
template <class Real>
Real kl_perm_term_t(std::span<const Real> log_s_q, std::span<const double> log_s_p, const Matrix<Real>& perm) {
  std::vector<double> plain;
  for (const Real& x : log_s_q) plain.push_back(value_of(x));
  const PermutationMatrix best(argsort_descending(plain));
  std::vector<Real> log_s_p_lifted(log_s_p.begin(), log_s_p.end());
  return pl_log_pmf_t<Real>(log_s_q, best) - pl_log_pmf_relaxed_t<Real>(perm, log_s_p_lifted);
}

}  // namespace drpm

#endif  // DRPM_LOSSES_HPP
