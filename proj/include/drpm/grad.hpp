#ifndef DRPM_GRAD_HPP
#define DRPM_GRAD_HPP

// Pathwise gradients of relaxed-pipeline scalars with respect to
// (log w, log s) under fixed noise, a finite-difference oracle to check them,
// the temperature schedule, and an adaptive-moment optimizer.

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "drpm/noise.hpp"
#include "drpm/partition.hpp"
#include "drpm/rng.hpp"
#include "drpm/types.hpp"

namespace drpm {

inline constexpr double kGradTolerance = 1e-4;
inline constexpr double kTieMargin = 1e-6;
inline constexpr double kDefaultFdStep = 1e-5;

struct ParamPoint {
  std::vector<double> log_omega;
  std::vector<double> log_scores;

  std::size_t size() const { return log_omega.size() + log_scores.size(); }
  /// log_omega followed by log_scores.
  std::vector<double> flat() const;
  static ParamPoint from_flat(std::span<const double> flat, std::size_t groups);
  static ParamPoint from_params(const DrpmParams& params);
  /// Exponentiates back to model parameters with the given capacities and beta.
  DrpmParams to_params(const std::vector<int>& m, double beta = 1.0) const;
  std::string coordinate_name(std::size_t index) const;
  void validate() const;
};

/// A registered scalar objective together with the fixed data it reads.
struct Objective {
  std::string name;
  std::vector<int> m;
  int n = 0;
  double beta = 1.0;
  double eps = kDefaultEps;
  double alpha = 1.0;
  int entry_group = 0;        // partition_entry
  int entry_element = 0;
  AssignmentMatrix partition;  // supervised target, or Y for pmf and bounds
  PermutationMatrix perm;      // pl_log_pmf
  SubsetSizes counts;          // mvhg_log_pmf
  ParamPoint prior;            // KL terms

  int groups() const { return static_cast<int>(m.size()); }
  bool uses_noise() const;
};

/// Names accepted by make_objective.
const std::vector<std::string>& registered_objectives();

/// Throws ValidationError listing the registered names for an unknown name.
Objective make_objective(const std::string& name, const std::vector<int>& m, int n, double beta = 1.0);

/// Fills the fixed data of `obj` (entry index, partition, permutation,
/// counts, prior) with random valid values.
void randomize_objective(Objective& obj, Rng& rng);

/// Value of an objective plus what it needs to detect argmax ties.
template <class Real>
struct ObjectiveValue {
  Real value;
  double margin = 0.0;          // distance to the nearest hard decision boundary
  std::vector<int> decisions;   // every hard decision taken, for flip detection
};

template <class Real>
ObjectiveValue<Real> evaluate_objective(const Objective& obj, std::span<const Real> log_omega,
                                        std::span<const Real> log_s, const FixedNoise& noise, double tau,
                                        Forward forward);

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
  double margin = 0.0;
};

/// Exact derivative with respect to every ParamPoint coordinate at fixed
/// noise. Straight-through points carry the relaxed derivative.
ValueAndGradient eval_scalar_with_gradient(const Objective& obj, const ParamPoint& point, const FixedNoise& noise,
                                           double tau, Forward forward = Forward::straight_through);

/// Central differences of the relaxed variant with the same noise on both
/// sides, evaluated in extended precision.
std::vector<double> finite_diff_gradient(const Objective& obj, const ParamPoint& point, const FixedNoise& noise,
                                         double tau, double step = kDefaultFdStep);

struct GradientReport {
  std::string objective;
  std::vector<std::string> coordinates;
  std::vector<double> analytic;
  std::vector<double> fd;
  std::vector<double> rel_err;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  double value = 0.0;
  double margin = 0.0;
  bool decisions_stable = true;  // no hard decision flips across the stencil
  bool passed = false;

  /// Away from ties: margin >= kTieMargin and no flips.
  bool smooth() const { return margin >= kTieMargin && decisions_stable; }
};

/// Analytic gradient of the relaxed variant against finite differences.
/// Passes iff the max relative error is below 1e-4.
GradientReport gradcheck(const Objective& obj, const ParamPoint& point, const FixedNoise& noise, double tau,
                         double step = kDefaultFdStep);

struct GradcheckTrials {
  std::vector<GradientReport> reports;
  int redraws = 0;
  bool all_passed() const;
};

/// `trials` gradchecks at random points around `center` (Gaussian jitter of
/// scale `jitter`), random fixed data and fresh noise. Draws that land
/// within kTieMargin of a tie are redrawn and counted.
GradcheckTrials run_gradcheck_trials(const std::string& name, const std::vector<int>& m, int n, double beta,
                                     const ParamPoint& center, double tau, int trials, std::uint64_t seed,
                                     double jitter = 1.0, double step = kDefaultFdStep);

/// CSV rows: objective, coordinate, analytic, fd, rel_err.
void write_gradient_csv(std::ostream& out, const std::vector<GradientReport>& reports, bool header = true);

/// tau(t) = max(tau_final, tau_init * exp(-r t)), r = (log tau_init - log tau_final) / horizon.
double anneal_tau(int t, double tau_init, double tau_final, int horizon);
inline double anneal_tau(int t, int horizon) { return anneal_tau(t, 1.0, 0.5, horizon); }

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int t = 0;

  static AdamState zeros(std::size_t size);
};

struct AdamStep {
  AdamState state;
  std::vector<double> point;
};

/// Bias-corrected adaptive-moment update (descent).
AdamStep optimizer_step(const AdamState& state, std::span<const double> gradient, std::span<const double> point,
                        const AdamConfig& config = {});

}  // namespace drpm

#endif  // DRPM_GRAD_HPP
