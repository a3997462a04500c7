// Shot noise: Poisson coincidence counts drawn from reproducible RNG streams.
#pragma once

#include "phzne/processor.hpp"
#include "phzne/schwinger.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace phzne {

/// Expected number of injected pairs per basis measurement. Each outcome
/// count has mean S * success_prob * p_ij.
class ShotScale {
 public:
  explicit ShotScale(double s) : s_(s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("ShotScale: must be positive and finite");
    }
  }
  double value() const { return s_; }

 private:
  double s_;
};

inline constexpr double kDefaultShotScale = 1000.0;

/// Post-selection success rate of the ideal gate.
inline constexpr double kNominalSuccess = 1.0 / 9.0;

/// Pair scale that yields `coincidences` expected post-selected events per
/// basis when the gate runs at its nominal success rate.
inline ShotScale pairs_for_coincidences(double coincidences) {
  return ShotScale(coincidences / kNominalSuccess);
}

/// splitmix64 finaliser; used to fold structured stream keys into one word.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream id for (grid point, run, channel). Channels separate the optimiser
/// perturbations from the shot noise of the same run.
inline constexpr std::uint64_t stream_id(std::uint64_t grid_index, std::uint64_t run_index,
                                         std::uint64_t channel = 0) {
  return mix64(mix64(mix64(grid_index) ^ run_index) ^ channel);
}

/// Single-owner random stream. Two streams built from the same
/// (master_seed, stream) pair produce identical sequences.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32),
                      0x5a4e45u};
    engine_.seed(seq);
  }

  std::mt19937_64& engine() { return engine_; }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine_); }
  std::uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }
  int rademacher() { return (engine_() >> 63) ? 1 : -1; }

 private:
  std::mt19937_64 engine_;
};

inline RngStream seeded_rng(std::uint64_t master_seed, std::uint64_t stream) {
  return RngStream(master_seed, stream);
}

struct CountRecord {
  BasisId basis = BasisId::Z;
  Counts counts{};
};

inline CountRecord sample_counts(BasisId basis, const OutcomeProbs& probs, double success_prob,
                                 const ShotScale& scale, RngStream& rng) {
  if (std::abs(probs.sum() - 1.0) > 1e-6) {
    throw std::invalid_argument("sample_counts: probabilities are not normalised");
  }
  if (!(success_prob >= 0.0 && success_prob <= 1.0)) {
    throw std::invalid_argument("sample_counts: success probability outside [0, 1]");
  }
  CountRecord rec;
  rec.basis = basis;
  const double base = scale.value() * success_prob;
  for (std::size_t i = 0; i < 4; ++i) rec.counts[i] = rng.poisson(base * probs.p[i]);
  return rec;
}

}  // namespace phzne
