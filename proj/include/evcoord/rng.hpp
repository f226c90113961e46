#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "evcoord/errors.hpp"

namespace evcoord {

// All randomness in the project flows through this header so that runs are
// reproducible bit for bit across platforms. std::normal_distribution and
// std::uniform_int_distribution are implementation-defined, so the variate
// transforms are spelled out here instead.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent stream seed for work unit (a, b) under a master seed. Used to
// give every Monte Carlo draw its own stream regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (a + 0x9E3779B97F4A7C15ull));
  s = splitmix64(s ^ (b + 0xD1B54A32D192ED03ull));
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1): top 53 bits of the generator output.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ContractError("Rng::below: n must be positive");
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = eng_();
      if (r >= threshold) return r % n;
    }
  }

  // Box-Muller without caching the spare variate, so each call consumes a
  // fixed number of generator outputs.
  double normal(double mean, double sd) {
    const double u1 = 1.0 - uniform01();  // (0, 1]: keeps log() finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace evcoord
