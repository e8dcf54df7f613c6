#ifndef DRPM_ESTIMATE_HPP
#define DRPM_ESTIMATE_HPP

// Ground truth for the partition model: exhaustive enumeration, Monte-Carlo
// PMF estimates, divergences between the two, and the bounds-quality report.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "drpm/partition.hpp"
#include "drpm/types.hpp"

namespace drpm {

inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;

/// K^n, or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> partition_count(int n, int groups);

/// All K^n labelled assignment matrices, ordered by base-K code.
std::vector<AssignmentMatrix> enumerate_partitions(int n, int groups, std::uint64_t guard = kEnumerationGuard);

/// Sample counts keyed by partition code.
class PartitionHistogram {
 public:
  PartitionHistogram() = default;
  PartitionHistogram(int n, int groups) : n_(n), groups_(groups) {}

  int n() const { return n_; }
  int groups() const { return groups_; }
  std::uint64_t total() const { return total_; }

  void add(const AssignmentMatrix& y, std::uint64_t count = 1);
  void add_code(std::uint64_t code, std::uint64_t count = 1);
  void merge(const PartitionHistogram& other);

  std::uint64_t count(const AssignmentMatrix& y) const;
  double frequency(const AssignmentMatrix& y) const;
  const std::map<std::uint64_t, std::uint64_t>& by_code() const { return counts_; }
  /// Keyed by the canonical partition string.
  std::map<std::string, std::uint64_t> by_string() const;

  friend bool operator==(const PartitionHistogram&, const PartitionHistogram&) = default;

 private:
  int n_ = 0;
  int groups_ = 0;
  std::uint64_t total_ = 0;
  std::map<std::uint64_t, std::uint64_t> counts_;
};

/// Worker count: DRPM_THREADS if set and positive, else the hardware count.
int default_worker_count();

/// M hard two-stage draws. Sample i uses the stream (seed, i), so the result
/// does not depend on `workers` (0 means default_worker_count()).
PartitionHistogram mc_pmf_estimate(const DrpmParams& params, std::uint64_t samples, std::uint64_t seed,
                                   int workers = 0);

/// Codes of M hard draws in sample order, sample i from the stream (seed, i).
std::vector<std::uint64_t> sample_partition_codes(const DrpmParams& params, std::uint64_t samples,
                                                  std::uint64_t seed, int workers = 0);

/// Exact probabilities of every partition, indexed by code.
struct ExactPmf {
  int n = 0;
  int groups = 0;
  std::vector<double> probs;

  double operator[](std::uint64_t code) const { return probs[code]; }
};

ExactPmf exact_pmf_table(const DrpmParams& params, std::uint64_t guard = kEnumerationGuard);

/// 1/2 sum |p_hat - p|. Throws ValidationError on a support mismatch.
double tv_distance(const PartitionHistogram& h, const ExactPmf& exact);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson statistic over the cells with expected count >= 5.
ChiSquare chi_square_stat(const PartitionHistogram& h, const ExactPmf& exact);

enum class BoundsConfig { equal, rand_omega, rand_s, rand_both };

std::string to_string(BoundsConfig config);
BoundsConfig parse_bounds_config(const std::string& text);

/// Parameters for one configuration: ones, or U(0,1) draws floored at 0.05.
DrpmParams bounds_config_params(BoundsConfig config, int n, int groups, std::uint64_t seed);

struct BoundsRow {
  AssignmentMatrix partition;
  std::uint64_t count = 0;
  double freq = 0.0;
  std::optional<double> exact;  // probability, when computable
  double log_lower = 0.0;
  double log_upper = 0.0;
};

struct BoundsReport {
  std::vector<BoundsRow> rows;
  std::uint64_t samples = 0;
};

BoundsReport bounds_report(const DrpmParams& params, std::uint64_t samples, std::uint64_t seed, int workers = 0);

/// CSV: partition, count, freq, exact, log_lower, log_upper.
void write_bounds_csv(std::ostream& out, const BoundsReport& report);

struct BoundsSummary {
  double sandwich_fraction = 0.0;       // rows with lower <= exact <= upper
  double max_upper_rel_gap = 0.0;       // max |p_U - p| / p over rows with exact
  std::vector<double> decile_median_ratio;  // median p_U / p_hat per decile of p_hat, lowest first
  std::vector<double> exact_decile_median_ratio;  // median p_U / p per decile of p, lowest first
};

BoundsSummary summarize_bounds(const BoundsReport& report);

/// Median of the values (average of the middle two for even sizes).
double median(std::vector<double> values);

}  // namespace drpm

#endif  // DRPM_ESTIMATE_HPP
