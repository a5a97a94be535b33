#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qclock {

// SplitMix64 finalizer. Used to decorrelate user seeds and to derive
// independent sub-stream seeds from (seed, salt) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return splitmix64(seed ^ splitmix64(salt));
}

// Deterministic Gaussian stream: Box-Muller on top of mt19937_64, so draws
// do not depend on the standard library's normal_distribution internals.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // uniform in (0, 1]
  double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * kPi * uniform();
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qclock
