#include "sbcoal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sbcoal {

std::int64_t uniform_below(Xoshiro256& rng, std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("uniform_below: n must be >= 1");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  // Reject the top partial block.
  const std::uint64_t limit = Xoshiro256::max() - Xoshiro256::max() % un;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::int64_t>(v % un);
}

double exponential(Xoshiro256& rng, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
  // 1 - U in (0, 1] so the log never sees zero.
  return -std::log(1.0 - uniform01(rng)) / rate;
}

double standard_normal(Xoshiro256& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

double NormalSampler::operator()(Xoshiro256& rng) {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01(rng) - 1.0;
    v = 2.0 * uniform01(rng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_ = v * f;
  has_cached_ = true;
  return u * f;
}

std::vector<double> binomial_pmf(std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_pmf: n must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_pmf: p outside [0,1]");
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf[static_cast<std::size_t>(n)] = 1.0;
    return pmf;
  }
  // Anchor at the mode and run the ratio recurrence outward; the anchor value
  // is arbitrary, normalization fixes the scale. Avoids underflow of (1-p)^n.
  const std::int64_t mode = std::clamp<std::int64_t>(
      static_cast<std::int64_t>((n + 1) * p), 0, n);
  pmf[static_cast<std::size_t>(mode)] = 1.0;
  const double odds = p / (1.0 - p);
  for (std::int64_t k = mode + 1; k <= n; ++k) {
    // P(k) = P(k-1) * (n-k+1)/k * odds
    pmf[static_cast<std::size_t>(k)] =
        pmf[static_cast<std::size_t>(k - 1)] * (static_cast<double>(n - k + 1) / k) * odds;
  }
  for (std::int64_t k = mode - 1; k >= 0; --k) {
    pmf[static_cast<std::size_t>(k)] =
        pmf[static_cast<std::size_t>(k + 1)] * (static_cast<double>(k + 1) / (n - k)) / odds;
  }
  double total = 0.0;
  for (double q : pmf) total += q;
  for (double& q : pmf) q /= total;
  return pmf;
}

std::vector<double> hypergeometric_pmf(std::int64_t total, std::int64_t draws,
                                       std::int64_t successes) {
  if (total < 0 || draws < 0 || successes < 0 || draws > total || successes > total) {
    throw std::invalid_argument("hypergeometric_pmf: invalid parameters");
  }
  std::vector<double> pmf(static_cast<std::size_t>(draws) + 1, 0.0);
  const std::int64_t lo = std::max<std::int64_t>(0, draws - (total - successes));
  const std::int64_t hi = std::min(draws, successes);
  // P(z+1)/P(z) = (successes-z)(draws-z) / ((z+1)(total-successes-draws+z+1))
  const std::int64_t mode =
      std::clamp<std::int64_t>((draws + 1) * (successes + 1) / (total + 2), lo, hi);
  pmf[static_cast<std::size_t>(mode)] = 1.0;
  for (std::int64_t z = mode + 1; z <= hi; ++z) {
    const double ratio = (static_cast<double>(successes - z + 1) * (draws - z + 1)) /
                         (static_cast<double>(z) * (total - successes - draws + z));
    pmf[static_cast<std::size_t>(z)] = pmf[static_cast<std::size_t>(z - 1)] * ratio;
  }
  for (std::int64_t z = mode - 1; z >= lo; --z) {
    const double ratio = (static_cast<double>(successes - z) * (draws - z)) /
                         (static_cast<double>(z + 1) * (total - successes - draws + z + 1));
    pmf[static_cast<std::size_t>(z)] = pmf[static_cast<std::size_t>(z + 1)] / ratio;
  }
  double sum = 0.0;
  for (double q : pmf) sum += q;
  for (double& q : pmf) q /= sum;
  return pmf;
}

namespace {

std::int64_t sample_from_table(Xoshiro256& rng, const std::vector<double>& pmf) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    if (u < acc) return static_cast<std::int64_t>(k);
  }
  return static_cast<std::int64_t>(pmf.size()) - 1;  // u landed in rounding slack
}

}  // namespace

std::int64_t binomial(Xoshiro256& rng, std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (n <= 64) return sample_from_table(rng, binomial_pmf(n, p));
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(rng);
}

std::int64_t hypergeometric(Xoshiro256& rng, std::int64_t total, std::int64_t draws,
                            std::int64_t successes) {
  if (total < 0 || draws < 0 || successes < 0 || draws > total || successes > total) {
    throw std::invalid_argument("hypergeometric: invalid parameters");
  }
  if (draws == 0 || successes == 0) return 0;
  if (successes == total) return draws;
  if (draws <= 64) return sample_from_table(rng, hypergeometric_pmf(total, draws, successes));
  // Sequential urn: draw one item at a time without replacement.
  std::int64_t marked = successes, remaining = total, hits = 0;
  for (std::int64_t i = 0; i < draws; ++i) {
    if (uniform_below(rng, remaining) < marked) {
      ++hits;
      --marked;
      if (marked == 0) break;
    }
    --remaining;
  }
  return hits;
}

}  // namespace sbcoal
