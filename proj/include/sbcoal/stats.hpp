#ifndef SBCOAL_STATS_HPP
#define SBCOAL_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace sbcoal {

struct SummaryStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased, /(count-1)
  double standard_error = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
};

// Neumaier compensated sum; order-independent up to ~1e-12 relative.
double compensated_sum(std::span<const double> values);

// Two-pass mean/variance with compensated sums. Requires count >= 2.
SummaryStats summarize(std::span<const double> samples);

// Bernoulli convenience: summary of `successes` ones among `count` samples.
SummaryStats summarize_binary(std::int64_t successes, std::int64_t count);

}  // namespace sbcoal

#endif
