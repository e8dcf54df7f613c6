#include "drpm/learn.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "drpm/dual.hpp"
#include "drpm/errors.hpp"

namespace drpm {

void SupervisedTarget::validate() const {
  if (target.groups() < 1 || target.elements() < 1) throw ValidationError("target: empty partition");
  if (!std::isfinite(alpha) || alpha < 0.0) throw ValidationError("alpha: must be finite and >= 0");
}

void FitConfig::validate() const {
  if (steps < 1) throw ValidationError("steps: must be >= 1");
  if (noise_draws < 1) throw ValidationError("noise_draws: must be >= 1");
  if (horizon < 0) throw ValidationError("horizon: must be >= 0");
}

SupervisedLoss supervised_loss(const RelaxedAssignment& relaxed, const SupervisedTarget& target,
                               const RelaxedCounts& counts_relaxed) {
  target.validate();
  if (relaxed.values.rows() != static_cast<std::size_t>(target.target.groups()) ||
      relaxed.values.cols() != static_cast<std::size_t>(target.target.elements())) {
    throw ValidationError("relaxed assignment shape does not match the target");
  }
  if (counts_relaxed.simplex.size() != relaxed.values.rows()) {
    throw ValidationError("relaxed counts have a different group count than the assignment");
  }
  const auto n_hat = counts_relaxed.expected();
  const auto parts = supervised_loss_t<double>(relaxed.values, n_hat, target.target, target.alpha);
  return {parts.l1, parts.l2, parts.total};
}

KlSurrogate kl_surrogate(const DrpmParams& q, const DrpmParams& p, int samples, double tau, Rng& rng) {
  if (samples < 1) throw ValidationError("L: need at least one sample");
  if (!(tau > 0.0)) throw DomainError("tau must be > 0");
  q.validate();
  p.validate();
  if (q.n() != p.n() || q.mvhg.m != p.mvhg.m) throw ValidationError("q and p must share n, K and capacities");
  const Mvhg mvhg_q(q.mvhg);
  const Mvhg mvhg_p(p.mvhg);
  const auto log_omega_q = q.mvhg.log_omega();
  const auto log_s_q = q.scores.log_scores();
  const double log_max_q = pl_log_pmf(q.scores, pl_max_perm(q.scores));

  std::vector<double> tc;
  std::vector<double> tp;
  for (int l = 0; l < samples; ++l) {
    const FixedNoise noise = FixedNoise::draw(q.mvhg.m, q.n(), rng);
    const auto d = relaxed_draw<double>(q.mvhg.m, q.n(), log_omega_q, log_s_q, q.scores.beta, noise, tau,
                                        kDefaultEps, Forward::straight_through);
    tc.push_back(log_num_orderings(d.counts.hard) + mvhg_q.log_pmf(d.counts.hard) - mvhg_p.log_pmf(d.counts.hard));
    tp.push_back(log_max_q - pl_log_pmf(p.scores, d.hard_perm));
  }
  auto mean_se = [](const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return std::pair{mean, se};
  };
  KlSurrogate out;
  std::tie(out.term_counts, out.stderr_counts) = mean_se(tc);
  std::tie(out.term_perm, out.stderr_perm) = mean_se(tp);
  return out;
}

AssignmentMatrix zero_noise_partition(const ParamPoint& point, const std::vector<int>& m, double beta) {
  const DrpmParams params = point.to_params(m, beta);
  return sample_partition_hard(params, FixedNoise::zero(m, params.n()));
}

FitResult fit_supervised(const SupervisedTarget& target, int n, int groups, const FitConfig& config) {
  target.validate();
  config.validate();
  if (target.target.elements() != n || target.target.groups() != groups) {
    throw ValidationError("target shape " + std::to_string(target.target.groups()) + "x" +
                          std::to_string(target.target.elements()) + " does not match K x n = " +
                          std::to_string(groups) + "x" + std::to_string(n));
  }
  const std::vector<int> m(static_cast<std::size_t>(groups), n);
  const std::size_t dim = static_cast<std::size_t>(groups + n);
  const int horizon = config.horizon > 0 ? config.horizon : config.steps;

  std::vector<double> x(dim, 0.0);
  AdamState state = AdamState::zeros(dim);
  Rng rng(config.seed);
  FitResult out;
  out.trace.reserve(static_cast<std::size_t>(config.steps) + 1);
  for (int t = 0; t <= config.steps; ++t) {
    const double tau = anneal_tau(t, config.tau_init, config.tau_final, horizon);
    std::vector<Dual> lo;
    std::vector<Dual> ls;
    for (std::size_t i = 0; i < dim; ++i) (i < static_cast<std::size_t>(groups) ? lo : ls).push_back(Dual::variable(x[i], i, dim));
    TraceRow row;
    row.step = t;
    row.tau = tau;
    std::vector<double> grad(dim, 0.0);
    for (int r = 0; r < config.noise_draws; ++r) {
      const FixedNoise noise = FixedNoise::draw(m, n, rng);
      const auto d = relaxed_draw<Dual>(m, n, lo, ls, config.beta, noise, tau, kDefaultEps, config.forward);
      const auto parts = supervised_loss_t<Dual>(d.assignment_soft, d.counts.counts, target.target, target.alpha);
      const double w = 1.0 / config.noise_draws;
      row.loss += w * parts.total.value();
      row.l1 += w * parts.l1.value();
      row.l2 += w * parts.l2.value();
      for (std::size_t i = 0; i < dim; ++i) grad[i] += w * parts.total.d(i);
    }
    out.trace.push_back(row);
    if (t == config.steps) break;
    auto step = optimizer_step(state, grad, x, config.adam);
    state = std::move(step.state);
    x = std::move(step.point);
  }
  out.point = ParamPoint::from_flat(x, static_cast<std::size_t>(groups));
  out.partition = zero_noise_partition(out.point, m, config.beta);
  out.matched = out.partition == target.target;
  return out;
}

double trace_window_mean(const std::vector<TraceRow>& trace, std::size_t window, bool tail) {
  if (trace.empty()) return std::nan("");
  window = std::min(window, trace.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < window; ++i) acc += trace[tail ? trace.size() - window + i : i].loss;
  return acc / static_cast<double>(window);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "step,tau,loss,l1,l2\n";
  char buf[256];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.step, r.tau, r.loss, r.l1, r.l2);
    out << buf;
  }
}

}  // namespace drpm
