#include "drpm/partition.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "drpm/errors.hpp"

namespace drpm {

void DrpmParams::validate() const {
  mvhg.validate();
  scores.validate();
  if (scores.size() != mvhg.n) {
    throw ValidationError("scores: length " + std::to_string(scores.size()) + " does not match n = " +
                          std::to_string(mvhg.n));
  }
}

AssignmentMatrix build_partition(const PermutationMatrix& perm, const SubsetSizes& counts) {
  if (counts.total() != perm.size()) {
    throw ValidationError("subset sizes sum to " + std::to_string(counts.total()) + " but the permutation has " +
                          std::to_string(perm.size()) + " rows");
  }
  std::vector<int> labels(static_cast<std::size_t>(perm.size()), 0);
  int row = 0;
  for (int k = 0; k < counts.groups(); ++k) {
    for (int c = 0; c < counts[k]; ++c, ++row) labels[static_cast<std::size_t>(perm[row])] = k;
  }
  return AssignmentMatrix(std::move(labels), counts.groups());
}

RelaxedAssignment build_partition_relaxed(const RelaxedPermutation& rperm, const RelaxedCounts& rcounts,
                                          double tau, double eps) {
  if (!(tau > 0.0)) throw DomainError("tau must be > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const int n = rperm.hard.size();
  if (static_cast<int>(rperm.values.rows()) != n || rcounts.hard.total() != n) {
    throw ValidationError("relaxed permutation and relaxed counts disagree on n");
  }
  std::vector<double> counts(rcounts.hard.counts().begin(), rcounts.hard.counts().end());
  RelaxedAssignment out;
  out.alpha = count_gates<double>(counts, n, tau, eps);
  out.values = gate_rows(out.alpha, rperm.values);
  out.tau = tau;
  out.hard = build_partition(rperm.hard, rcounts.hard);
  return out;
}

double log_num_orderings(const SubsetSizes& counts) {
  double acc = 0.0;
  for (int c : counts.counts()) acc += log_factorial(c);
  return acc;
}

std::vector<int> descending_score_order(std::span<const double> log_s, std::vector<int> subset) {
  std::sort(subset.begin(), subset.end());
  std::stable_sort(subset.begin(), subset.end(), [&](int a, int b) {
    return log_s[static_cast<std::size_t>(a)] > log_s[static_cast<std::size_t>(b)];
  });
  return subset;
}

namespace {

void check_shape(const DrpmParams& params, const AssignmentMatrix& y) {
  if (y.groups() != params.groups() || y.elements() != params.n()) {
    throw ValidationError("partition is " + std::to_string(y.groups()) + "x" + std::to_string(y.elements()) +
                          " but the model is " + std::to_string(params.groups()) + "x" + std::to_string(params.n()));
  }
}

double total_orderings(const SubsetSizes& counts) {
  double total = 0.0;
  for (int c : counts.counts()) total += std::exp(log_factorial(c));
  return total;
}

}  // namespace

double partition_log_pmf_exact(const DrpmParams& params, const AssignmentMatrix& y, std::size_t guard) {
  params.validate();
  check_shape(params, y);
  const double orderings = total_orderings(y.counts());
  if (orderings > static_cast<double>(guard)) {
    throw CapacityError("exact PMF needs " + std::to_string(static_cast<long long>(orderings)) +
                        " subset orderings, above the guard of " + std::to_string(guard) +
                        "; use the bounds instead");
  }
  const auto log_omega = params.mvhg.log_omega();
  const auto log_s = params.scores.log_scores();
  return partition_log_pmf_t<double>(params.mvhg.m, params.n(), log_omega, log_s, y);
}

PmfBounds partition_pmf_bounds(const DrpmParams& params, const AssignmentMatrix& y, BoundsMode mode,
                               std::size_t guard) {
  params.validate();
  check_shape(params, y);
  const auto log_omega = params.mvhg.log_omega();
  const auto log_s = params.scores.log_scores();
  PmfBounds out;
  out.log_upper = log_upper_bound_t<double>(params.mvhg.m, params.n(), log_omega, log_s, y);
  if (mode == BoundsMode::heuristic) {
    out.log_lower = log_lower_bound_t<double>(params.mvhg.m, params.n(), log_omega, log_s, y);
    return out;
  }
  const double orderings = total_orderings(y.counts());
  if (orderings > static_cast<double>(guard)) {
    throw CapacityError("enumerated lower bound needs " + std::to_string(static_cast<long long>(orderings)) +
                        " subset orderings, above the guard of " + std::to_string(guard));
  }
  double lower = mvhg_log_pmf(params.mvhg, y.counts());
  std::vector<int> pool(static_cast<std::size_t>(params.n()));
  std::iota(pool.begin(), pool.end(), 0);
  for (int k = 0; k < y.groups(); ++k) {
    auto subset = y.subset(k);
    double best = kNegInf;
    do {
      best = std::max(best, sequential_choice_log_prob<double>(log_s, subset, pool));
    } while (std::next_permutation(subset.begin(), subset.end()));
    if (!subset.empty()) lower += best;
    std::erase_if(pool, [&](int j) { return y.labels()[static_cast<std::size_t>(j)] == k; });
  }
  out.log_lower = lower;
  return out;
}

PartitionSampler::PartitionSampler(const DrpmParams& params) : params_(params), mvhg_(params.mvhg) {
  params_.validate();
  log_s_ = params_.scores.log_scores();
}

AssignmentMatrix PartitionSampler::sample(const FixedNoise& noise) const {
  const SubsetSizes counts = mvhg_.sample(noise.count_gumbels);
  const auto perturbed = perturbed_log_scores<double>(log_s_, noise.score_gumbels, params_.scores.beta);
  const PermutationMatrix perm(argsort_descending(perturbed));
  return build_partition(perm, counts);
}

AssignmentMatrix PartitionSampler::sample(Rng& rng) const {
  return sample(FixedNoise::draw(params_.mvhg.m, params_.n(), rng));
}

AssignmentMatrix sample_partition_hard(const DrpmParams& params, const FixedNoise& noise) {
  return PartitionSampler(params).sample(noise);
}

AssignmentMatrix sample_partition_hard(const DrpmParams& params, Rng& rng) {
  return PartitionSampler(params).sample(rng);
}

RelaxedAssignment sample_partition_relaxed(const DrpmParams& params, double tau, const FixedNoise& noise,
                                           double eps) {
  if (!(tau > 0.0)) throw DomainError("tau must be > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  params.validate();
  const auto log_omega = params.mvhg.log_omega();
  const auto log_s = params.scores.log_scores();
  auto draw = relaxed_draw<double>(params.mvhg.m, params.n(), log_omega, log_s, params.scores.beta, noise, tau,
                                   eps, Forward::straight_through);
  RelaxedAssignment out;
  out.values = std::move(draw.assignment_soft);
  out.alpha = std::move(draw.gates);
  out.tau = tau;
  out.hard = std::move(draw.hard);
  return out;
}

RelaxedAssignment sample_partition_relaxed(const DrpmParams& params, double tau, Rng& rng, double eps) {
  return sample_partition_relaxed(params, tau, FixedNoise::draw(params.mvhg.m, params.n(), rng), eps);
}

}  // namespace drpm
