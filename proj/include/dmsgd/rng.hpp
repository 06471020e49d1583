#pragma once

#include <cmath>
#include <cstdint>

namespace dmsgd {

// Counter-based random streams. Every draw is a pure function of
// (seed, step, worker, counter), so adding workers or reordering runs
// never perturbs another stream's values.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Derive a child stream; used for (run -> worker) and (campaign -> cell -> seed).
  RngStream child(std::uint64_t tag) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(tag ^ 0xA5A5A5A5DEADBEEFULL)));
  }

  std::uint64_t bits(std::uint64_t step, std::uint64_t counter) const {
    return splitmix64(splitmix64(seed_ ^ splitmix64(step)) + counter);
  }

  // Uniform in (0, 1); never returns 0.
  double uniform(std::uint64_t step, std::uint64_t counter) const {
    return (static_cast<double>(bits(step, counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform_sym(std::uint64_t step, std::uint64_t counter) const {
    return 2.0 * uniform(step, counter) - 1.0;
  }

  // Box-Muller; consumes counters 2c and 2c+1.
  double gaussian(std::uint64_t step, std::uint64_t counter) const {
    const double u1 = uniform(step, 2 * counter);
    const double u2 = uniform(step, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double rademacher(std::uint64_t step, std::uint64_t counter) const {
    return (bits(step, counter) & 1ULL) ? 1.0 : -1.0;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace dmsgd
