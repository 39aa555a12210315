// Counter-based deterministic RNG with named sub-streams.
//
// Every random decision in the library flows from a single 64-bit seed plus a
// (stream-name, counter) pair, so permutations for different roles/epochs come
// from disjoint streams and fixing one never perturbs another.
#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace minimax {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// One independent random stream. Cheap to copy (copy = clone of state).
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  // uniform double in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n), n >= 1
  int uniform_int(int n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  // standard normal via Box-Muller (deterministic, platform independent)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Root generator: derives named sub-streams from (seed, name, counter).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  RngStream stream(std::string_view name, std::uint64_t counter = 0) const {
    std::uint64_t s = seed_ ^ detail::fnv1a64(name);
    std::uint64_t mixed = detail::splitmix64(s);
    std::uint64_t c = mixed ^ (0x632be59bd9b4e019ULL * (counter + 1));
    return RngStream(detail::splitmix64(c));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace minimax
