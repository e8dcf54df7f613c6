#ifndef DRPM_NOISE_HPP
#define DRPM_NOISE_HPP

#include <cstdint>
#include <vector>

#include "drpm/rng.hpp"

namespace drpm {

/// Stored Gumbel realizations for one two-stage draw. Holding these fixed
/// makes every relaxed quantity a deterministic function of the parameters.
///
/// Layout: count_gumbels holds one standard Gumbel per categorical outcome
/// of every subset-size stage (group k uses the m_k + 1 entries starting at
/// offset(k)); score_gumbels holds one standard Gumbel per element.
/// Draw order is counts first, then scores.
struct FixedNoise {
  std::uint64_t seed = 0;
  std::vector<double> count_gumbels;
  std::vector<double> score_gumbels;

  static FixedNoise draw(const std::vector<int>& capacities, int n, Rng& rng);
  static FixedNoise from_seed(std::uint64_t seed, const std::vector<int>& capacities, int n);
  static FixedNoise zero(const std::vector<int>& capacities, int n);

  static std::size_t offset(const std::vector<int>& capacities, int k);
};

/// How straight-through points are evaluated.
///  straight_through: hard forward value, relaxed derivative attached.
///  relaxed: the relaxed value everywhere; smooth between argmax decisions,
///           and the variant finite differences can see.
enum class Forward { straight_through, relaxed };

}  // namespace drpm

#endif  // DRPM_NOISE_HPP
