#include "drpm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace drpm {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gumbel() {
  const double u = std::clamp(uniform(), 1e-12, 1.0 - 1e-12);
  return -std::log(-std::log(u));
}

double Rng::normal() {
  const double u1 = std::clamp(uniform(), 1e-300, 1.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace drpm

#include "drpm/noise.hpp"

namespace drpm {

FixedNoise FixedNoise::draw(const std::vector<int>& capacities, int n, Rng& rng) {
  FixedNoise noise;
  noise.count_gumbels.resize(offset(capacities, static_cast<int>(capacities.size())));
  for (double& g : noise.count_gumbels) g = rng.gumbel();
  noise.score_gumbels.resize(static_cast<std::size_t>(n));
  for (double& g : noise.score_gumbels) g = rng.gumbel();
  return noise;
}

FixedNoise FixedNoise::from_seed(std::uint64_t seed, const std::vector<int>& capacities, int n) {
  Rng rng(seed);
  FixedNoise noise = draw(capacities, n, rng);
  noise.seed = seed;
  return noise;
}

FixedNoise FixedNoise::zero(const std::vector<int>& capacities, int n) {
  FixedNoise noise;
  noise.count_gumbels.assign(offset(capacities, static_cast<int>(capacities.size())), 0.0);
  noise.score_gumbels.assign(static_cast<std::size_t>(n), 0.0);
  return noise;
}

std::size_t FixedNoise::offset(const std::vector<int>& capacities, int k) {
  std::size_t off = 0;
  for (int i = 0; i < k; ++i) off += static_cast<std::size_t>(capacities[static_cast<std::size_t>(i)]) + 1;
  return off;
}

}  // namespace drpm
