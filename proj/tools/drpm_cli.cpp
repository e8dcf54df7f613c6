// drpm: sampling, PMF evaluation, bounds ablation, gradient checks and
// supervised fitting for the two-stage random partition model.
//
// Exit codes: 0 ok, 1 I/O, 2 validation, 3 capacity, 4 check failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "drpm/errors.hpp"
#include "drpm/estimate.hpp"
#include "drpm/grad.hpp"
#include "drpm/learn.hpp"
#include "drpm/params_io.hpp"

namespace {

using namespace drpm;

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitCheck = 4;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// JSON number for finite values, the string "-inf" otherwise.
nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return v < 0 ? "-inf" : (v > 0 ? "inf" : "nan");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

struct SampleArgs {
  std::string params;
  std::uint64_t num = 1000;
  std::uint64_t seed = 0;
  std::string mode = "hard";
  std::optional<double> tau;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  const DrpmParams params = parse_params_json(read_file(a.params));
  if (a.mode == "relaxed" && !a.tau) throw ValidationError("tau: required in relaxed mode");
  if (a.mode == "hard" && a.tau) throw ValidationError("tau: only valid in relaxed mode");
  std::ostringstream out;
  const int n = params.n();
  const int groups = params.groups();
  if (a.mode == "hard") {
    out << "partition\n";
    for (std::uint64_t code : sample_partition_codes(params, a.num, a.seed)) {
      out << '"' << AssignmentMatrix::from_code(code, n, groups).to_string() << "\"\n";
    }
  } else {
    if (!(*a.tau > 0.0)) throw DomainError("tau must be > 0");
    out << "sample,hard";
    for (int k = 0; k < groups; ++k) {
      for (int i = 0; i < n; ++i) out << ",y" << k + 1 << '_' << i + 1;
    }
    out << '\n';
    for (std::uint64_t s = 0; s < a.num; ++s) {
      Rng rng = Rng::stream(a.seed, s);
      const RelaxedAssignment r = sample_partition_relaxed(params, *a.tau, rng);
      out << s << ",\"" << r.hard.to_string() << '"';
      for (double v : r.values.data()) out << ',' << fmt(v);
      out << '\n';
    }
  }
  write_file(a.out, out.str());
  return 0;
}

struct PmfArgs {
  std::string params;
  std::string partition;
  std::string method = "exact";
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
};

int cmd_pmf(const PmfArgs& a) {
  const DrpmParams params = parse_params_json(read_file(a.params));
  AssignmentMatrix y;
  try {
    y = AssignmentMatrix::parse(a.partition);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("partition: ") + e.what());
  }
  if (y.groups() != params.groups() || y.elements() != params.n()) {
    throw ValidationError("partition: shape " + std::to_string(y.groups()) + "x" + std::to_string(y.elements()) +
                          " does not match K x n = " + std::to_string(params.groups()) + "x" +
                          std::to_string(params.n()));
  }
  nlohmann::ordered_json doc;
  doc["partition"] = y.to_string();
  doc["method"] = a.method;
  if (a.method == "exact") {
    const double lp = partition_log_pmf_exact(params, y);
    doc["log_p"] = num(lp);
    doc["p"] = std::exp(lp);
  } else if (a.method == "bounds") {
    const auto b = partition_pmf_bounds(params, y);
    doc["log_lower"] = num(b.log_lower);
    doc["log_upper"] = num(b.log_upper);
  } else {
    const auto h = mc_pmf_estimate(params, a.samples, a.seed);
    const double p = h.frequency(y);
    doc["samples"] = a.samples;
    doc["count"] = h.count(y);
    doc["estimate"] = p;
    doc["stderr"] = std::sqrt(p * (1.0 - p) / static_cast<double>(a.samples));
  }
  std::cout << doc.dump() << '\n';
  return 0;
}

struct AblationArgs {
  int n = 5;
  int k = 5;
  std::uint64_t samples = 1'000'000;
  std::string config = "all";
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_bounds_ablation(const AblationArgs& a) {
  std::vector<BoundsConfig> configs;
  if (a.config == "all") {
    configs = {BoundsConfig::equal, BoundsConfig::rand_omega, BoundsConfig::rand_s, BoundsConfig::rand_both};
  } else {
    configs = {parse_bounds_config(a.config)};
  }
  const auto count = partition_count(a.n, a.k);
  if (!count || *count > kEnumerationGuard) {
    throw CapacityError("K^n partitions exceeds the enumeration guard of " + std::to_string(kEnumerationGuard));
  }
  ensure_dir(a.out);
  for (const BoundsConfig c : configs) {
    const std::string name = to_string(c);
    const DrpmParams params = bounds_config_params(c, a.n, a.k, a.seed);
    const BoundsReport report = bounds_report(params, a.samples, mix64(a.seed ^ 0x5bd1e995ULL));
    std::ostringstream csv;
    write_bounds_csv(csv, report);
    write_file((std::filesystem::path(a.out) / ("bounds_" + name + ".csv")).string(), csv.str());
    const BoundsSummary s = summarize_bounds(report);
    char line[256];
    std::snprintf(line, sizeof(line), "%s: partitions %zu, sandwich fraction %.3f, max upper/exact gap %.3g\n",
                  name.c_str(), report.rows.size(), s.sandwich_fraction, s.max_upper_rel_gap);
    std::cout << line;
    std::cout << "  median p_U/p_hat per decile of p_hat (low to high):";
    for (double r : s.decile_median_ratio) std::cout << ' ' << fmt(r);
    std::cout << "\n  median p_U/p per decile of p (low to high):";
    for (double r : s.exact_decile_median_ratio) std::cout << ' ' << fmt(r);
    std::cout << '\n';
  }
  return 0;
}

struct GradcheckArgs {
  std::string params;
  std::string objective;
  double tau = 1.0;
  int trials = 20;
  std::uint64_t seed = 0;
  double jitter = 1.0;
  double step = kDefaultFdStep;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  const DrpmParams params = parse_params_json(read_file(a.params));
  make_objective(a.objective, params.mvhg.m, params.n(), params.scores.beta);
  if (!(a.tau > 0.0)) throw DomainError("tau must be > 0");
  if (a.trials < 1) throw ValidationError("trials: must be >= 1");
  const auto result = run_gradcheck_trials(a.objective, params.mvhg.m, params.n(), params.scores.beta,
                                           ParamPoint::from_params(params), a.tau, a.trials, a.seed, a.jitter, a.step);
  write_gradient_csv(std::cout, result.reports);
  double worst = 0.0;
  for (const auto& r : result.reports) worst = std::max(worst, r.max_rel_err);
  const bool ok = result.all_passed() && static_cast<int>(result.reports.size()) == a.trials;
  std::cerr << a.objective << ": " << result.reports.size() << " trials, " << result.redraws
            << " redrawn near ties, max rel err " << fmt(worst) << (ok ? ", pass" : ", FAIL") << '\n';
  return ok ? 0 : kExitCheck;
}

struct FitArgs {
  std::string target;
  int steps = 2000;
  std::uint64_t seed = 0;
  std::string out = ".";
  double alpha = 1.0;
  double lr = FitConfig{}.adam.lr;
};

int cmd_fit(const FitArgs& a) {
  const FitTarget target = parse_target_json(read_file(a.target));
  FitConfig config;
  config.steps = a.steps;
  config.seed = a.seed;
  config.adam.lr = a.lr;
  const FitResult r = fit_supervised({target.partition, a.alpha}, target.n, target.groups, config);
  ensure_dir(a.out);
  std::ostringstream trace;
  write_trace_csv(trace, r.trace);
  write_file((std::filesystem::path(a.out) / "trace.csv").string(), trace.str());
  const std::vector<int> m(static_cast<std::size_t>(target.groups), target.n);
  write_file((std::filesystem::path(a.out) / "params.json").string(), params_to_json(r.point, m, config.beta));
  std::cout << "target    " << target.partition.to_string() << '\n'
            << "recovered " << r.partition.to_string() << '\n'
            << "match " << (r.matched ? "yes" : "no") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage random partition model: sampling, PMFs, bounds, gradient checks, fitting"};
  app.require_subcommand(1);

  SampleArgs sample;
  auto* s = app.add_subcommand("sample", "Draw partitions (hard) or relaxed assignment matrices");
  s->add_option("--params", sample.params, "Params JSON file")->required();
  s->add_option("--num", sample.num, "Number of draws")->check(CLI::PositiveNumber);
  s->add_option("--seed", sample.seed, "Random seed");
  s->add_option("--mode", sample.mode, "hard or relaxed")->check(CLI::IsMember({"hard", "relaxed"}));
  s->add_option("--tau", sample.tau, "Relaxation temperature (relaxed mode only)");
  s->add_option("--out", sample.out, "Output CSV file")->required();

  PmfArgs pmf;
  auto* p = app.add_subcommand("pmf", "Evaluate the probability of one partition");
  p->add_option("--params", pmf.params, "Params JSON file")->required();
  p->add_option("--partition", pmf.partition, "Partition such as 110,001")->required();
  p->add_option("--method", pmf.method, "exact, bounds or mc")->check(CLI::IsMember({"exact", "bounds", "mc"}));
  p->add_option("--samples", pmf.samples, "Monte-Carlo draws (mc)")->check(CLI::PositiveNumber);
  p->add_option("--seed", pmf.seed, "Random seed (mc)");

  AblationArgs abl;
  auto* b = app.add_subcommand("bounds-ablation", "Bounds quality over every partition for the four configs");
  b->add_option("--n", abl.n, "Elements")->check(CLI::PositiveNumber);
  b->add_option("--k", abl.k, "Subsets")->check(CLI::PositiveNumber);
  b->add_option("--M", abl.samples, "Monte-Carlo draws per config")->check(CLI::PositiveNumber);
  b->add_option("--config", abl.config, "equal, rand-omega, rand-s, rand-both or all")
      ->check(CLI::IsMember({"equal", "rand-omega", "rand-s", "rand-both", "all"}));
  b->add_option("--seed", abl.seed, "Random seed");
  b->add_option("--out", abl.out, "Output directory");

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Analytic gradients against central finite differences");
  g->add_option("--params", gc.params, "Params JSON file")->required();
  g->add_option("--objective", gc.objective, "Registered objective name")->required();
  g->add_option("--tau", gc.tau, "Relaxation temperature");
  g->add_option("--trials", gc.trials, "Number of (point, noise) draws");
  g->add_option("--seed", gc.seed, "Random seed");
  g->add_option("--jitter", gc.jitter, "Scale of the random offsets around the params point");
  g->add_option("--step", gc.step, "Central-difference step")->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit (omega, s) to a target partition");
  f->add_option("--target", fit.target, "Target JSON file")->required();
  f->add_option("--steps", fit.steps, "Optimizer steps");
  f->add_option("--seed", fit.seed, "Random seed");
  f->add_option("--out", fit.out, "Output directory");
  f->add_option("--alpha", fit.alpha, "Weight of the count-matching term");
  f->add_option("--lr", fit.lr, "Learning rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*s) return cmd_sample(sample);
    if (*p) return cmd_pmf(pmf);
    if (*b) return cmd_bounds_ablation(abl);
    if (*g) return cmd_gradcheck(gc);
    if (*f) return cmd_fit(fit);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
