#ifndef DRPM_LEARN_HPP
#define DRPM_LEARN_HPP

// Gradient-based uses of the partition model: the supervised partition loss,
// the two KL surrogate terms, and a fitting loop with temperature annealing.

#include <cstdint>
#include <ostream>
#include <vector>

#include "drpm/grad.hpp"
#include "drpm/losses.hpp"
#include "drpm/partition.hpp"

namespace drpm {

struct SupervisedTarget {
  AssignmentMatrix target;
  double alpha = 1.0;

  void validate() const;
};

struct FitConfig {
  int steps = 2000;
  std::uint64_t seed = 0;
  double tau_init = 1.0;
  double tau_final = 0.5;
  int horizon = 0;  // annealing horizon in steps; 0 means `steps`
  AdamConfig adam;
  int noise_draws = 1;  // noise redraws averaged per step
  Forward forward = Forward::relaxed;
  double beta = 1.0;

  void validate() const;
};

struct SupervisedLoss {
  double l1 = 0.0;
  double l2 = 0.0;
  double total = 0.0;
};

/// L1 + alpha * L2 on a relaxed sample; n_hat is the expected count under
/// each relaxed count simplex.
SupervisedLoss supervised_loss(const RelaxedAssignment& relaxed, const SupervisedTarget& target,
                               const RelaxedCounts& counts_relaxed);

struct KlSurrogate {
  double term_counts = 0.0;
  double term_perm = 0.0;
  double stderr_counts = 0.0;
  double stderr_perm = 0.0;
};

/// Monte-Carlo averages over L draws from q:
///   term_counts = mean[log |Pi_Y| + log q(n) - log p(n)]
///   term_perm   = mean[log max_pi q(pi) - log p(pi_Y)]
KlSurrogate kl_surrogate(const DrpmParams& q, const DrpmParams& p, int samples, double tau, Rng& rng);

struct TraceRow {
  int step = 0;
  double tau = 0.0;
  double loss = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
};

struct FitResult {
  ParamPoint point;
  std::vector<TraceRow> trace;  // steps + 1 rows; the last is evaluated at the final point
  AssignmentMatrix partition;   // zero-noise hard partition at the final point
  bool matched = false;
};

/// Hard partition at `point` with all noise set to zero.
AssignmentMatrix zero_noise_partition(const ParamPoint& point, const std::vector<int>& m, double beta = 1.0);

/// Starts from log w = 0, log s = 0 and takes config.steps adaptive-moment
/// steps on the supervised loss of fresh relaxed samples.
FitResult fit_supervised(const SupervisedTarget& target, int n, int groups, const FitConfig& config = {});

/// Mean loss over the first and last `window` trace rows.
double trace_window_mean(const std::vector<TraceRow>& trace, std::size_t window, bool tail);

/// CSV: step, tau, loss, l1, l2.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace drpm

#endif  // DRPM_LEARN_HPP
