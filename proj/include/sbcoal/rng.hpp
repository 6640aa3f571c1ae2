#ifndef SBCOAL_RNG_HPP
#define SBCOAL_RNG_HPP

#include <cstdint>
#include <vector>

namespace sbcoal {

// SplitMix64 step: advances the state and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** generator. Small, fast, and self-contained so that streams are
// bit-reproducible across standard-library versions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~static_cast<result_type>(0); }

  explicit Xoshiro256(std::uint64_t seed) {
    // Seed the four state words through SplitMix64 as recommended by the
    // xoshiro authors; guarantees a nonzero state.
    for (auto& w : s_) w = splitmix64(seed);
  }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// Counter-mode stream derivation: the stream for replicate i of a run with a
// given master seed is seeded with splitmix64 applied to master XOR mix(i).
// Distinct (master, index) pairs collide only if the 64-bit mixed seeds
// collide, which has probability ~2^-64 per pair.
struct ReplicateSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_index = 0;

  std::uint64_t mixed() const {
    std::uint64_t s = replicate_index;
    std::uint64_t m = splitmix64(s);
    return master_seed ^ m;
  }
  Xoshiro256 make_rng() const { return Xoshiro256(mixed()); }
};

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Xoshiro256& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n), n >= 1. Rejection to avoid modulo bias.
std::int64_t uniform_below(Xoshiro256& rng, std::int64_t n);

double exponential(Xoshiro256& rng, double rate);

// Standard normal, Box-Muller (stateless variant; one deviate per call).
double standard_normal(Xoshiro256& rng);

// Marsaglia polar method with a one-deviate cache; used in hot loops.
class NormalSampler {
 public:
  double operator()(Xoshiro256& rng);

 private:
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// PMF of Binomial(n, p) as a dense table over k = 0..n. Built by a
// mode-anchored ratio recurrence and normalized, so entries are accurate to
// ~1e-15 relative and sum to 1 exactly up to rounding.
std::vector<double> binomial_pmf(std::int64_t n, double p);

// PMF of Hypergeometric(total, draws, successes): number of marked items in a
// uniform sample of `draws` taken without replacement from `total` items of
// which `successes` are marked. Dense table over z = 0..draws (zero outside
// the support).
std::vector<double> hypergeometric_pmf(std::int64_t total, std::int64_t draws,
                                       std::int64_t successes);

// Exact binomial variate. Table inversion for small n, std fallback above.
std::int64_t binomial(Xoshiro256& rng, std::int64_t n, double p);

// Exact hypergeometric variate. Table inversion for draws <= 64, sequential
// urn sampling above (O(draws), exact at any size).
std::int64_t hypergeometric(Xoshiro256& rng, std::int64_t total, std::int64_t draws,
                            std::int64_t successes);

}  // namespace sbcoal

#endif
