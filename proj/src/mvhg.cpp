#include "drpm/mvhg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "drpm/errors.hpp"

namespace drpm {

MvhgParams MvhgParams::with_full_capacity(int n, std::vector<double> omega) {
  MvhgParams p;
  p.m.assign(omega.size(), n);
  p.n = n;
  p.omega = std::move(omega);
  return p;
}

void MvhgParams::validate() const {
  if (omega.empty()) throw ValidationError("omega: need at least one group (K >= 1)");
  if (m.size() != omega.size()) {
    throw ValidationError("m: length " + std::to_string(m.size()) + " does not match K = " +
                          std::to_string(omega.size()));
  }
  if (n < 0) throw ValidationError("n: must be non-negative");
  long long capacity = 0;
  for (int mk : m) {
    if (mk < 0) throw ValidationError("m: capacities must be non-negative");
    capacity += mk;
  }
  if (n > capacity) {
    throw ValidationError("n: " + std::to_string(n) + " exceeds total capacity " + std::to_string(capacity));
  }
  for (double w : omega) {
    if (!std::isfinite(w) || w <= 0.0) throw ValidationError("omega: weights must be finite and > 0");
  }
}

std::vector<double> MvhgParams::log_omega() const {
  std::vector<double> out;
  out.reserve(omega.size());
  for (double w : omega) out.push_back(std::log(std::max(w, 1e-30)));
  return out;
}

std::vector<double> RelaxedCounts::expected() const {
  std::vector<double> out;
  for (const auto& s : simplex) {
    double e = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) e += static_cast<double>(j) * s[j];
    out.push_back(e);
  }
  return out;
}

Mvhg::Mvhg(MvhgParams params) : params_(std::move(params)) {
  params_.validate();
  log_omega_ = params_.log_omega();
  table_ = suffix_log_normalizers<double>(params_.m, params_.n, log_omega_);
}

double Mvhg::log_pmf(const SubsetSizes& counts) const {
  return mvhg_log_pmf_t<double>(params_.m, params_.n, log_omega_, table_, counts);
}

std::vector<double> Mvhg::conditional_log_weights(int k, int remaining) const {
  if (k < 0 || k >= params_.groups()) {
    throw IndexError("group index " + std::to_string(k) + " out of range [0, " +
                     std::to_string(params_.groups()) + ")");
  }
  if (remaining < 0 || remaining > params_.n) throw ValidationError("remaining draws out of range");
  return drpm::conditional_log_weights<double>(params_.m, log_omega_, table_, k, remaining);
}

SubsetSizes Mvhg::sample(std::span<const double> gumbels) const {
  std::vector<int> counts;
  counts.reserve(params_.m.size());
  int remaining = params_.n;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < params_.m.size(); ++k) {
    auto logits = drpm::conditional_log_weights<double>(params_.m, log_omega_, table_, static_cast<int>(k), remaining);
    for (std::size_t j = 0; j < logits.size(); ++j) {
      if (logits[j] != kNegInf) logits[j] += gumbels[offset + j];
    }
    const int pick = argmax(std::span<const double>(logits));
    counts.push_back(pick);
    remaining -= pick;
    offset += static_cast<std::size_t>(params_.m[k]) + 1;
  }
  return SubsetSizes(std::move(counts));
}

double mvhg_log_pmf(const MvhgParams& params, const SubsetSizes& counts) {
  return Mvhg(params).log_pmf(counts);
}

std::vector<SubsetSizes> mvhg_support(const MvhgParams& params, std::size_t guard) {
  params.validate();
  const std::size_t groups = params.m.size();
  // Count first so the guard fires before anything is materialized.
  std::vector<std::vector<double>> ways(groups + 1, std::vector<double>(static_cast<std::size_t>(params.n) + 1, 0.0));
  ways[groups][0] = 1.0;
  for (std::size_t k = groups; k-- > 0;) {
    for (int t = 0; t <= params.n; ++t) {
      for (int j = 0; j <= std::min(params.m[k], t); ++j) ways[k][static_cast<std::size_t>(t)] += ways[k + 1][static_cast<std::size_t>(t - j)];
    }
  }
  const double size = ways[0][static_cast<std::size_t>(params.n)];
  if (size > static_cast<double>(guard)) {
    throw CapacityError("support has " + std::to_string(static_cast<long long>(size)) +
                        " vectors, above the enumeration guard of " + std::to_string(guard));
  }

  std::vector<SubsetSizes> out;
  out.reserve(static_cast<std::size_t>(size));
  std::vector<int> current(groups, 0);
  auto recurse = [&](auto&& self, std::size_t k, int remaining) -> void {
    if (k + 1 == groups) {
      if (remaining <= params.m[k]) {
        current[k] = remaining;
        out.emplace_back(current);
      }
      return;
    }
    for (int j = 0; j <= std::min(params.m[k], remaining); ++j) {
      if (ways[k + 1][static_cast<std::size_t>(remaining - j)] == 0.0) continue;
      current[k] = j;
      self(self, k + 1, remaining - j);
    }
  };
  recurse(recurse, 0, params.n);
  return out;
}

std::vector<double> mvhg_conditional_weights(const MvhgParams& params, int k,
                                             const std::vector<int>& prior_counts) {
  const Mvhg mvhg(params);
  if (k < 0 || k >= params.groups()) {
    throw IndexError("group index " + std::to_string(k) + " out of range [0, " +
                     std::to_string(params.groups()) + ")");
  }
  if (static_cast<int>(prior_counts.size()) != k) {
    throw ValidationError("prior counts must list exactly the groups before k");
  }
  const int used = std::accumulate(prior_counts.begin(), prior_counts.end(), 0);
  if (used > params.n) throw ValidationError("prior counts exceed the total draw count");
  return mvhg.conditional_log_weights(k, params.n - used);
}

SubsetSizes mvhg_sample_hard(const MvhgParams& params, const FixedNoise& noise) {
  params.validate();
  const auto log_omega = params.log_omega();
  return relax_counts<double>(params.m, params.n, log_omega, noise.count_gumbels, 1.0, Forward::straight_through).hard;
}

SubsetSizes mvhg_sample_hard(const MvhgParams& params, Rng& rng) {
  return mvhg_sample_hard(params, FixedNoise::draw(params.m, 0, rng));
}

RelaxedCounts mvhg_sample_relaxed(const MvhgParams& params, double tau, const FixedNoise& noise) {
  if (!(tau > 0.0)) throw DomainError("tau must be > 0");
  params.validate();
  const auto log_omega = params.log_omega();
  auto stages = relax_counts<double>(params.m, params.n, log_omega, noise.count_gumbels, tau, Forward::relaxed);
  RelaxedCounts out;
  out.simplex = std::move(stages.simplex);
  out.hard = std::move(stages.hard);
  out.tau = tau;
  return out;
}

RelaxedCounts mvhg_sample_relaxed(const MvhgParams& params, double tau, Rng& rng) {
  return mvhg_sample_relaxed(params, tau, FixedNoise::draw(params.m, 0, rng));
}

}  // namespace drpm
