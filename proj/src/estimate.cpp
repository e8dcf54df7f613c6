#include "drpm/estimate.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>
#include <unordered_map>

#include "drpm/errors.hpp"

namespace drpm {

std::optional<std::uint64_t> partition_count(int n, int groups) {
  if (n < 0 || groups < 1) throw ValidationError("need n >= 0 and K >= 1");
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > UINT64_MAX / static_cast<std::uint64_t>(groups)) return std::nullopt;
    total *= static_cast<std::uint64_t>(groups);
  }
  return total;
}

std::vector<AssignmentMatrix> enumerate_partitions(int n, int groups, std::uint64_t guard) {
  const auto count = partition_count(n, groups);
  if (!count || *count > guard) {
    throw CapacityError("K^n = " + std::to_string(groups) + "^" + std::to_string(n) +
                        " partitions exceeds the enumeration guard of " + std::to_string(guard));
  }
  std::vector<AssignmentMatrix> out;
  out.reserve(*count);
  for (std::uint64_t code = 0; code < *count; ++code) out.push_back(AssignmentMatrix::from_code(code, n, groups));
  return out;
}

void PartitionHistogram::add(const AssignmentMatrix& y, std::uint64_t count) {
  if (y.elements() != n_ || y.groups() != groups_) throw ValidationError("partition shape does not match histogram");
  add_code(y.code(), count);
}

void PartitionHistogram::add_code(std::uint64_t code, std::uint64_t count) {
  counts_[code] += count;
  total_ += count;
}

void PartitionHistogram::merge(const PartitionHistogram& other) {
  if (other.n_ != n_ || other.groups_ != groups_) throw ValidationError("cannot merge histograms of different shape");
  for (const auto& [code, c] : other.counts_) counts_[code] += c;
  total_ += other.total_;
}

std::uint64_t PartitionHistogram::count(const AssignmentMatrix& y) const {
  const auto it = counts_.find(y.code());
  return it == counts_.end() ? 0 : it->second;
}

double PartitionHistogram::frequency(const AssignmentMatrix& y) const {
  return total_ == 0 ? 0.0 : static_cast<double>(count(y)) / static_cast<double>(total_);
}

std::map<std::string, std::uint64_t> PartitionHistogram::by_string() const {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [code, c] : counts_) out[AssignmentMatrix::from_code(code, n_, groups_).to_string()] = c;
  return out;
}

int default_worker_count() {
  if (const char* env = std::getenv("DRPM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PartitionHistogram mc_pmf_estimate(const DrpmParams& params, std::uint64_t samples, std::uint64_t seed, int workers) {
  if (samples < 1) throw ValidationError("M: need at least one sample");
  const PartitionSampler sampler(params);
  if (workers <= 0) workers = default_worker_count();
  workers = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), samples));
  const int n = params.n();
  const int groups = params.groups();

  std::vector<PartitionHistogram> parts(static_cast<std::size_t>(workers), PartitionHistogram(n, groups));
  auto run = [&](int w) {
    const std::uint64_t lo = samples * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = samples * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    std::unordered_map<std::uint64_t, std::uint64_t> local;
    for (std::uint64_t i = lo; i < hi; ++i) {
      Rng rng = Rng::stream(seed, i);
      ++local[sampler.sample(rng).code()];
    }
    for (const auto& [code, c] : local) parts[static_cast<std::size_t>(w)].add_code(code, c);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  PartitionHistogram out(n, groups);
  for (const auto& p : parts) out.merge(p);
  return out;
}

std::vector<std::uint64_t> sample_partition_codes(const DrpmParams& params, std::uint64_t samples,
                                                  std::uint64_t seed, int workers) {
  const PartitionSampler sampler(params);
  if (workers <= 0) workers = default_worker_count();
  workers = static_cast<int>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), samples)));
  std::vector<std::uint64_t> codes(samples);
  auto run = [&](int w) {
    const std::uint64_t lo = samples * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = samples * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    for (std::uint64_t i = lo; i < hi; ++i) {
      Rng rng = Rng::stream(seed, i);
      codes[i] = sampler.sample(rng).code();
    }
  };
  std::vector<std::thread> threads;
  for (int w = 1; w < workers; ++w) threads.emplace_back(run, w);
  run(0);
  for (auto& t : threads) t.join();
  return codes;
}

ExactPmf exact_pmf_table(const DrpmParams& params, std::uint64_t guard) {
  params.validate();
  ExactPmf out;
  out.n = params.n();
  out.groups = params.groups();
  for (const auto& y : enumerate_partitions(out.n, out.groups, guard)) {
    out.probs.push_back(std::exp(partition_log_pmf_exact(params, y)));
  }
  return out;
}

namespace {

void check_support(const PartitionHistogram& h, const ExactPmf& exact) {
  if (h.n() != exact.n || h.groups() != exact.groups) {
    throw ValidationError("histogram and exact PMF are over different partition spaces");
  }
  if (h.total() == 0) throw ValidationError("histogram is empty");
  for (const auto& [code, c] : h.by_code()) {
    if (code >= exact.probs.size() || (c > 0 && exact.probs[code] <= 0.0)) {
      throw ValidationError("histogram key outside the exact PMF support");
    }
  }
}

}  // namespace

double tv_distance(const PartitionHistogram& h, const ExactPmf& exact) {
  check_support(h, exact);
  const double total = static_cast<double>(h.total());
  const auto& counts = h.by_code();
  double acc = 0.0;
  for (std::uint64_t code = 0; code < exact.probs.size(); ++code) {
    const auto it = counts.find(code);
    const double p_hat = it == counts.end() ? 0.0 : static_cast<double>(it->second) / total;
    acc += std::abs(p_hat - exact.probs[code]);
  }
  return 0.5 * acc;
}

ChiSquare chi_square_stat(const PartitionHistogram& h, const ExactPmf& exact) {
  check_support(h, exact);
  const double total = static_cast<double>(h.total());
  const auto& counts = h.by_code();
  ChiSquare out;
  int cells = 0;
  for (std::uint64_t code = 0; code < exact.probs.size(); ++code) {
    const double expected = exact.probs[code] * total;
    if (expected < 5.0) continue;
    const auto it = counts.find(code);
    const double observed = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    out.statistic += (observed - expected) * (observed - expected) / expected;
    ++cells;
  }
  out.dof = std::max(cells - 1, 0);
  out.p_value = out.dof > 0 ? boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic) : 1.0;
  return out;
}

std::string to_string(BoundsConfig config) {
  switch (config) {
    case BoundsConfig::equal: return "equal";
    case BoundsConfig::rand_omega: return "rand-omega";
    case BoundsConfig::rand_s: return "rand-s";
    case BoundsConfig::rand_both: return "rand-both";
  }
  return "equal";
}

BoundsConfig parse_bounds_config(const std::string& text) {
  for (auto c : {BoundsConfig::equal, BoundsConfig::rand_omega, BoundsConfig::rand_s, BoundsConfig::rand_both}) {
    if (to_string(c) == text) return c;
  }
  throw ValidationError("config: expected one of equal, rand-omega, rand-s, rand-both; got '" + text + "'");
}

DrpmParams bounds_config_params(BoundsConfig config, int n, int groups, std::uint64_t seed) {
  Rng rng(seed);
  const bool rand_omega = config == BoundsConfig::rand_omega || config == BoundsConfig::rand_both;
  const bool rand_s = config == BoundsConfig::rand_s || config == BoundsConfig::rand_both;
  std::vector<double> omega(static_cast<std::size_t>(groups), 1.0);
  std::vector<double> s(static_cast<std::size_t>(n), 1.0);
  if (rand_omega) {
    for (double& w : omega) w = std::max(rng.uniform(), 0.05);
  }
  if (rand_s) {
    for (double& v : s) v = std::max(rng.uniform(), 0.05);
  }
  DrpmParams p{MvhgParams::with_full_capacity(n, std::move(omega)), PlScores{std::move(s), 1.0}};
  p.validate();
  return p;
}

BoundsReport bounds_report(const DrpmParams& params, std::uint64_t samples, std::uint64_t seed, int workers) {
  params.validate();
  const auto partitions = enumerate_partitions(params.n(), params.groups());
  const auto hist = mc_pmf_estimate(params, samples, seed, workers);
  BoundsReport report;
  report.samples = samples;
  report.rows.reserve(partitions.size());
  for (const auto& y : partitions) {
    BoundsRow row;
    row.partition = y;
    row.count = hist.count(y);
    row.freq = static_cast<double>(row.count) / static_cast<double>(samples);
    try {
      row.exact = std::exp(partition_log_pmf_exact(params, y));
    } catch (const CapacityError&) {
      row.exact = std::nullopt;
    }
    const auto b = partition_pmf_bounds(params, y);
    row.log_lower = b.log_lower;
    row.log_upper = b.log_upper;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_bounds_csv(std::ostream& out, const BoundsReport& report) {
  out << "partition,count,freq,exact,log_lower,log_upper\n";
  char buf[512];
  for (const auto& r : report.rows) {
    const std::string exact = r.exact ? [&] {
      char e[64];
      std::snprintf(e, sizeof(e), "%.17g", *r.exact);
      return std::string(e);
    }()
                                      : std::string();
    std::snprintf(buf, sizeof(buf), "\"%s\",%llu,%.17g,%s,%.17g,%.17g\n", r.partition.to_string().c_str(),
                  static_cast<unsigned long long>(r.count), r.freq, exact.c_str(), r.log_lower, r.log_upper);
    out << buf;
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

/// Median of p_U / p per decile of p (lowest first); rows with p <= 0 skipped.
std::vector<double> decile_medians(std::vector<std::pair<double, double>> prob_and_upper) {
  std::erase_if(prob_and_upper, [](const auto& e) { return !(e.first > 0.0); });
  std::stable_sort(prob_and_upper.begin(), prob_and_upper.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> out;
  const std::size_t size = prob_and_upper.size();
  if (size == 0) return out;
  for (std::size_t d = 0; d < 10; ++d) {
    const std::size_t lo = size * d / 10;
    const std::size_t hi = size * (d + 1) / 10;
    std::vector<double> ratios;
    for (std::size_t i = lo; i < hi; ++i) ratios.push_back(prob_and_upper[i].second / prob_and_upper[i].first);
    out.push_back(median(std::move(ratios)));
  }
  return out;
}

}  // namespace

BoundsSummary summarize_bounds(const BoundsReport& report) {
  BoundsSummary s;
  std::size_t held = 0;
  std::vector<std::pair<double, double>> by_freq;
  std::vector<std::pair<double, double>> by_exact;
  for (const auto& r : report.rows) {
    const double upper = std::exp(r.log_upper);
    by_freq.emplace_back(r.freq, upper);
    if (!r.exact) {
      ++held;
      continue;
    }
    const double log_p = std::log(*r.exact);
    if (r.log_lower <= log_p + 1e-12 && log_p <= r.log_upper + 1e-12) ++held;
    by_exact.emplace_back(*r.exact, upper);
    if (*r.exact > 0.0) s.max_upper_rel_gap = std::max(s.max_upper_rel_gap, std::abs(upper - *r.exact) / *r.exact);
  }
  s.sandwich_fraction = report.rows.empty() ? 1.0 : static_cast<double>(held) / static_cast<double>(report.rows.size());
  s.decile_median_ratio = decile_medians(std::move(by_freq));
  s.exact_decile_median_ratio = decile_medians(std::move(by_exact));
  return s;
}

}  // namespace drpm
