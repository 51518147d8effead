#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "spinpair/qubit.hpp"

namespace spinpair {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Seeded Bloch-ball sampler (rejection from the enclosing cube).
class BlochSampler {
 public:
  explicit BlochSampler(std::uint64_t seed = kDefaultSeed) : rng_(seed) {}

  BlochVector ball() {
    for (;;) {
      Vec3 v(uniform(), uniform(), uniform());
      if (v.squaredNorm() <= 1.0) return BlochVector(v);
    }
  }

  Vec3 unit() {
    for (;;) {
      Vec3 v(uniform(), uniform(), uniform());
      const double n2 = v.squaredNorm();
      if (n2 <= 1.0 && n2 > 1e-6) return v / std::sqrt(n2);
    }
  }

  std::vector<BlochVector> ball(std::size_t count) {
    std::vector<BlochVector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(ball());
    return out;
  }

  double uniform() { return dist_(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> dist_{-1.0, 1.0};
};

}  // namespace spinpair
