#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lomap {

// splitmix64 step; also used to spread weak seeds before feeding mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic combination of a seed with a stream tag. Used everywhere a
// run-level seed has to be fanned out into independent substreams (per
// episode, per plan, per trial) so that adding a consumer never shifts the
// draws of another.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (tag << 1));
  std::uint64_t a = splitmix64(s);
  s ^= tag * 0xbf58476d1ce4e5b9ULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x94d049bb133111ebULL + (a << 6) + (a >> 2));
}

// mt19937_64 engine with a hand-rolled Box-Muller transform on top. The
// standard library normal_distribution is implementation-defined, which would
// make "same seed, same bytes" claims compiler-dependent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    engine_.seed(splitmix64(s));
  }

  std::uint64_t seed() const { return seed_; }

  Rng child(std::uint64_t tag) const { return Rng(mix_seed(seed_, tag)); }

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n) {
    // modulo bias is < 2^-40 for the index ranges used here (n << 2^24)
    return engine_() % n;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lomap
