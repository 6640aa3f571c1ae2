#include "sbcoal/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace sbcoal {

double compensated_sum(std::span<const double> values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

SummaryStats summarize(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw std::domain_error("summarize: need at least 2 samples, got " +
                            std::to_string(samples.size()));
  }
  const auto n = static_cast<std::int64_t>(samples.size());
  SummaryStats s;
  s.count = n;
  s.mean = compensated_sum(samples) / static_cast<double>(n);

  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = samples[i] - s.mean;
    sq[i] = d * d;
  }
  s.variance = compensated_sum(sq) / static_cast<double>(n - 1);
  if (s.variance < 0.0) s.variance = 0.0;  // rounding guard
  s.standard_error = std::sqrt(s.variance / static_cast<double>(n));
  s.ci95_low = s.mean - 1.96 * s.standard_error;
  s.ci95_high = s.mean + 1.96 * s.standard_error;
  return s;
}

SummaryStats summarize_binary(std::int64_t successes, std::int64_t count) {
  if (count < 2) throw std::domain_error("summarize_binary: need at least 2 samples");
  if (successes < 0 || successes > count) {
    throw std::domain_error("summarize_binary: successes outside [0, count]");
  }
  SummaryStats s;
  s.count = count;
  s.mean = static_cast<double>(successes) / static_cast<double>(count);
  // Unbiased sample variance of 0/1 data: n/(n-1) * p(1-p).
  s.variance = static_cast<double>(count) / static_cast<double>(count - 1) * s.mean *
               (1.0 - s.mean);
  s.standard_error = std::sqrt(s.variance / static_cast<double>(count));
  s.ci95_low = s.mean - 1.96 * s.standard_error;
  s.ci95_high = s.mean + 1.96 * s.standard_error;
  return s;
}

}  // namespace sbcoal
