#ifndef PBGK_RNG_HPP
#define PBGK_RNG_HPP

#include <cmath>
#include <cstdint>

namespace pbgk {

// Counter-based splittable generator: every draw is a pure function of
// (seed, stream, counter), so parallel scenarios can share a seed without
// coordination and a run is reproducible from its config alone.
class SplitRng {
public:
  SplitRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream))) {}

  // Uniform in [0, 1) from draw index `counter`.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(mix(key_ ^ mix(counter)) >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; each counter yields one independent value.
  double normal(std::uint64_t counter) const {
    // Two uniforms per normal, drawn from disjoint counter halves.
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * M_PI * u2);
  }

private:
  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
};

}  // namespace pbgk

#endif
