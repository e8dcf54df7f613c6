#include "drpm/grad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "drpm/dual.hpp"
#include "drpm/errors.hpp"
#include "drpm/losses.hpp"

namespace drpm {

std::vector<double> ParamPoint::flat() const {
  std::vector<double> out(log_omega);
  out.insert(out.end(), log_scores.begin(), log_scores.end());
  return out;
}

ParamPoint ParamPoint::from_flat(std::span<const double> flat, std::size_t groups) {
  if (groups > flat.size()) throw ValidationError("flat parameter vector shorter than the group count");
  ParamPoint p;
  p.log_omega.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(groups));
  p.log_scores.assign(flat.begin() + static_cast<std::ptrdiff_t>(groups), flat.end());
  return p;
}

ParamPoint ParamPoint::from_params(const DrpmParams& params) {
  params.validate();
  return {params.mvhg.log_omega(), params.scores.log_scores()};
}

DrpmParams ParamPoint::to_params(const std::vector<int>& m, double beta) const {
  validate();
  DrpmParams p;
  p.mvhg.m = m;
  p.mvhg.n = static_cast<int>(log_scores.size());
  for (double x : log_omega) p.mvhg.omega.push_back(std::exp(x));
  for (double x : log_scores) p.scores.s.push_back(std::exp(x));
  p.scores.beta = beta;
  p.validate();
  return p;
}

std::string ParamPoint::coordinate_name(std::size_t index) const {
  if (index < log_omega.size()) return "log_omega[" + std::to_string(index) + "]";
  return "log_scores[" + std::to_string(index - log_omega.size()) + "]";
}

void ParamPoint::validate() const {
  for (double x : log_omega) {
    if (!std::isfinite(x)) throw ValidationError("log_omega: entries must be finite");
  }
  for (double x : log_scores) {
    if (!std::isfinite(x)) throw ValidationError("log_scores: entries must be finite");
  }
}

const std::vector<std::string>& registered_objectives() {
  static const std::vector<std::string> names = {
      "partition_entry", "supervised_loss", "kl_counts",       "kl_perm",         "pl_log_pmf",
      "mvhg_log_pmf",    "exact_log_pmf",   "log_upper_bound", "log_lower_bound",
  };
  return names;
}

bool Objective::uses_noise() const {
  return name == "partition_entry" || name == "supervised_loss" || name == "kl_counts" || name == "kl_perm";
}

Objective make_objective(const std::string& name, const std::vector<int>& m, int n, double beta) {
  const auto& names = registered_objectives();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list;
    for (const auto& s : names) list += (list.empty() ? "" : ", ") + s;
    throw ValidationError("unknown objective '" + name + "'; registered: " + list);
  }
  MvhgParams check;
  check.m = m;
  check.n = n;
  check.omega.assign(m.size(), 1.0);
  check.validate();
  if (n < 1) throw ValidationError("n: objectives need at least one element");

  Objective obj;
  obj.name = name;
  obj.m = m;
  obj.n = n;
  obj.beta = beta;
  // First feasible labelling that fills groups in order.
  std::vector<int> labels;
  for (int k = 0; k < obj.groups() && static_cast<int>(labels.size()) < n; ++k) {
    for (int c = 0; c < m[static_cast<std::size_t>(k)] && static_cast<int>(labels.size()) < n; ++c) labels.push_back(k);
  }
  obj.partition = AssignmentMatrix(labels, obj.groups());
  obj.counts = obj.partition.counts();
  obj.perm = PermutationMatrix::identity(n);
  obj.prior.log_omega.assign(m.size(), 0.0);
  obj.prior.log_scores.assign(static_cast<std::size_t>(n), 0.0);
  return obj;
}

void randomize_objective(Objective& obj, Rng& rng) {
  const int groups = obj.groups();
  obj.entry_group = rng.uniform_int(groups);
  obj.entry_element = rng.uniform_int(obj.n);
  std::vector<int> labels(static_cast<std::size_t>(obj.n));
  for (;;) {
    std::vector<int> used(static_cast<std::size_t>(groups), 0);
    bool ok = true;
    for (int& l : labels) {
      l = rng.uniform_int(groups);
      if (++used[static_cast<std::size_t>(l)] > obj.m[static_cast<std::size_t>(l)]) ok = false;
    }
    if (ok) break;
  }
  obj.partition = AssignmentMatrix(labels, groups);
  obj.counts = obj.partition.counts();
  std::vector<int> order(static_cast<std::size_t>(obj.n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = obj.n - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
  obj.perm = PermutationMatrix(order);
  for (double& x : obj.prior.log_omega) x = rng.normal();
  for (double& x : obj.prior.log_scores) x = rng.normal();
}

namespace {

template <class Real>
std::vector<double> plain_values(std::span<const Real> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const Real& x : xs) out.push_back(value_of(x));
  return out;
}

/// Smallest gap between consecutive values of `order` in `values`; pushes
/// the order onto `decisions`.
double note_order(std::span<const double> values, const std::vector<int>& order, std::vector<int>& decisions) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    gap = std::min(gap, values[static_cast<std::size_t>(order[i])] - values[static_cast<std::size_t>(order[i + 1])]);
  }
  decisions.insert(decisions.end(), order.begin(), order.end());
  return gap;
}

template <class Real>
void note_draw(const RelaxedDraw<Real>& d, ObjectiveValue<Real>& out, bool counts_only) {
  out.margin = std::min(out.margin, d.min_count_margin);
  out.decisions.insert(out.decisions.end(), d.counts.hard.counts().begin(), d.counts.hard.counts().end());
  if (counts_only) return;
  out.margin = std::min(out.margin, d.min_score_gap);
  out.decisions.insert(out.decisions.end(), d.hard_perm.order().begin(), d.hard_perm.order().end());
}

}  // namespace

template <class Real>
ObjectiveValue<Real> evaluate_objective(const Objective& obj, std::span<const Real> log_omega,
                                        std::span<const Real> log_s, const FixedNoise& noise, double tau,
                                        Forward forward) {
  if (log_omega.size() != obj.m.size() || static_cast<int>(log_s.size()) != obj.n) {
    throw ValidationError("parameter point does not match the objective's shape");
  }
  ObjectiveValue<Real> out{Real(0.0), std::numeric_limits<double>::infinity(), {}};
  const std::string& name = obj.name;
  if (obj.uses_noise()) {
    if (!(tau > 0.0)) throw DomainError("tau must be > 0");
    const auto d = relaxed_draw<Real>(obj.m, obj.n, log_omega, log_s, obj.beta, noise, tau, obj.eps, forward);
    if (name == "partition_entry") {
      note_draw(d, out, false);
      out.value = d.assignment(static_cast<std::size_t>(obj.entry_group), static_cast<std::size_t>(obj.entry_element));
    } else if (name == "supervised_loss") {
      note_draw(d, out, false);
      out.value = supervised_loss_t<Real>(d.assignment_soft, d.counts.counts, obj.partition, obj.alpha).total;
    } else if (name == "kl_counts") {
      note_draw(d, out, true);
      out.value = kl_counts_term_t<Real>(obj.m, obj.n, log_omega, obj.prior.log_omega, d.counts.simplex);
    } else {
      note_draw(d, out, false);
      const auto plain = plain_values(log_s);
      out.margin = std::min(out.margin, note_order(plain, argsort_descending(plain), out.decisions));
      out.value = kl_perm_term_t<Real>(log_s, obj.prior.log_scores, d.perm_forward);
    }
    return out;
  }
  if (name == "pl_log_pmf") {
    out.value = pl_log_pmf_t<Real>(log_s, obj.perm);
  } else if (name == "mvhg_log_pmf") {
    const auto table = suffix_log_normalizers<Real>(obj.m, obj.n, log_omega);
    out.value = mvhg_log_pmf_t<Real>(obj.m, obj.n, log_omega, table, obj.counts);
  } else if (name == "exact_log_pmf") {
    out.value = partition_log_pmf_t<Real>(obj.m, obj.n, log_omega, log_s, obj.partition);
  } else if (name == "log_upper_bound") {
    const auto plain = plain_values(log_s);
    out.margin = note_order(plain, argsort_descending(plain), out.decisions);
    out.value = log_upper_bound_t<Real>(obj.m, obj.n, log_omega, log_s, obj.partition);
  } else if (name == "log_lower_bound") {
    const auto plain = plain_values(log_s);
    for (int k = 0; k < obj.partition.groups(); ++k) {
      const auto order = descending_score_order(plain, obj.partition.subset(k));
      out.margin = std::min(out.margin, note_order(plain, order, out.decisions));
    }
    out.value = log_lower_bound_t<Real>(obj.m, obj.n, log_omega, log_s, obj.partition);
  } else {
    throw ValidationError("unknown objective '" + name + "'");
  }
  return out;
}

template ObjectiveValue<double> evaluate_objective<double>(const Objective&, std::span<const double>,
                                                           std::span<const double>, const FixedNoise&, double,
                                                           Forward);
template ObjectiveValue<long double> evaluate_objective<long double>(const Objective&, std::span<const long double>,
                                                                     std::span<const long double>,
                                                                     const FixedNoise&, double, Forward);
template ObjectiveValue<Dual> evaluate_objective<Dual>(const Objective&, std::span<const Dual>,
                                                       std::span<const Dual>, const FixedNoise&, double, Forward);

ValueAndGradient eval_scalar_with_gradient(const Objective& obj, const ParamPoint& point, const FixedNoise& noise,
                                           double tau, Forward forward) {
  point.validate();
  const std::size_t dim = point.size();
  const std::size_t groups = point.log_omega.size();
  std::vector<Dual> lo;
  std::vector<Dual> ls;
  for (std::size_t i = 0; i < groups; ++i) lo.push_back(Dual::variable(point.log_omega[i], i, dim));
  for (std::size_t i = 0; i < point.log_scores.size(); ++i) {
    ls.push_back(Dual::variable(point.log_scores[i], groups + i, dim));
  }
  const auto r = evaluate_objective<Dual>(obj, lo, ls, noise, tau, forward);
  ValueAndGradient out;
  out.value = r.value.value();
  out.margin = r.margin;
  out.gradient.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) out.gradient[i] = r.value.d(i);
  return out;
}

namespace {

struct FdResult {
  std::vector<double> gradient;
  bool stable = true;
};

FdResult finite_diff(const Objective& obj, const ParamPoint& point, const FixedNoise& noise, double tau,
                     double step, const std::vector<int>* reference) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be > 0");
  const std::size_t groups = point.log_omega.size();
  const auto flat = point.flat();
  std::vector<long double> x(flat.begin(), flat.end());
  FdResult out;
  out.gradient.resize(x.size());
  auto eval = [&](const std::vector<long double>& v) {
    const std::span<const long double> all(v);
    auto r = evaluate_objective<long double>(obj, all.first(groups), all.subspan(groups), noise, tau,
                                             Forward::relaxed);
    if (reference != nullptr && r.decisions != *reference) out.stable = false;
    return r.value;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double h = step;
    std::vector<long double> plus(x);
    std::vector<long double> minus(x);
    plus[i] += h;
    minus[i] -= h;
    const long double dplus = eval(plus);
    const long double dminus = eval(minus);
    out.gradient[i] = static_cast<double>((dplus - dminus) / ((plus[i] - minus[i])));
  }
  return out;
}

}  // namespace

std::vector<double> finite_diff_gradient(const Objective& obj, const ParamPoint& point, const FixedNoise& noise,
                                         double tau, double step) {
  point.validate();
  return finite_diff(obj, point, noise, tau, step, nullptr).gradient;
}

GradientReport gradcheck(const Objective& obj, const ParamPoint& point, const FixedNoise& noise, double tau,
                         double step) {
  point.validate();
  const auto base = evaluate_objective<double>(obj, point.log_omega, point.log_scores, noise, tau, Forward::relaxed);
  const auto analytic = eval_scalar_with_gradient(obj, point, noise, tau, Forward::relaxed);
  const auto fd = finite_diff(obj, point, noise, tau, step, &base.decisions);
  GradientReport rep;
  rep.objective = obj.name;
  rep.value = analytic.value;
  rep.margin = base.margin;
  rep.decisions_stable = fd.stable;
  rep.analytic = analytic.gradient;
  rep.fd = fd.gradient;
  for (std::size_t i = 0; i < rep.analytic.size(); ++i) {
    const double a = rep.analytic[i];
    const double b = rep.fd[i];
    const double abs_err = std::abs(a - b);
    const double rel = abs_err / std::max({std::abs(a), std::abs(b), 1e-8});
    rep.coordinates.push_back(point.coordinate_name(i));
    rep.rel_err.push_back(rel);
    rep.max_rel_err = std::max(rep.max_rel_err, rel);
    rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
  }
  rep.passed = rep.max_rel_err < kGradTolerance;
  return rep;
}

bool GradcheckTrials::all_passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const GradientReport& r) { return r.passed; });
}

GradcheckTrials run_gradcheck_trials(const std::string& name, const std::vector<int>& m, int n, double beta,
                                     const ParamPoint& center, double tau, int trials, std::uint64_t seed,
                                     double jitter, double step) {
  if (center.log_omega.size() != m.size() || static_cast<int>(center.log_scores.size()) != n) {
    throw ValidationError("parameter point does not match the objective's shape");
  }
  GradcheckTrials out;
  const std::uint64_t max_attempts = static_cast<std::uint64_t>(trials) * 50 + 50;
  for (std::uint64_t attempt = 0; static_cast<int>(out.reports.size()) < trials && attempt < max_attempts; ++attempt) {
    Rng rng = Rng::stream(seed, attempt);
    ParamPoint point = center;
    for (double& x : point.log_omega) x += jitter * rng.normal();
    for (double& x : point.log_scores) x += jitter * rng.normal();
    Objective obj = make_objective(name, m, n, beta);
    randomize_objective(obj, rng);
    const FixedNoise noise = FixedNoise::draw(m, n, rng);
    GradientReport rep = gradcheck(obj, point, noise, tau, step);
    if (!rep.smooth()) {
      ++out.redraws;
      continue;
    }
    out.reports.push_back(std::move(rep));
  }
  return out;
}

void write_gradient_csv(std::ostream& out, const std::vector<GradientReport>& reports, bool header) {
  if (header) out << "objective,coordinate,analytic,fd,rel_err\n";
  char buf[256];
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.analytic.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g\n", r.objective.c_str(), r.coordinates[i].c_str(),
                    r.analytic[i], r.fd[i], r.rel_err[i]);
      out << buf;
    }
  }
}

double anneal_tau(int t, double tau_init, double tau_final, int horizon) {
  if (!(tau_final > 0.0) || !(tau_final <= tau_init)) throw DomainError("need 0 < tau_final <= tau_init");
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  if (t < 0) throw DomainError("step index must be >= 0");
  const double r = (std::log(tau_init) - std::log(tau_final)) / horizon;
  return std::max(tau_final, tau_init * std::exp(-r * t));
}

AdamState AdamState::zeros(std::size_t size) {
  return {std::vector<double>(size, 0.0), std::vector<double>(size, 0.0), 0};
}

AdamStep optimizer_step(const AdamState& state, std::span<const double> gradient, std::span<const double> point,
                        const AdamConfig& config) {
  if (gradient.size() != point.size() || state.m.size() != point.size() || state.v.size() != point.size()) {
    throw ValidationError("optimizer state, gradient and point sizes differ");
  }
  AdamStep out{state, std::vector<double>(point.begin(), point.end())};
  out.state.t += 1;
  const double c1 = 1.0 - std::pow(config.beta1, out.state.t);
  const double c2 = 1.0 - std::pow(config.beta2, out.state.t);
  for (std::size_t i = 0; i < point.size(); ++i) {
    out.state.m[i] = config.beta1 * out.state.m[i] + (1.0 - config.beta1) * gradient[i];
    out.state.v[i] = config.beta2 * out.state.v[i] + (1.0 - config.beta2) * gradient[i] * gradient[i];
    const double mhat = out.state.m[i] / c1;
    const double vhat = out.state.v[i] / c2;
    out.point[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
  }
  return out;
}

}  // namespace drpm
