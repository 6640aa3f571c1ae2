#ifndef SBCOAL_PARAMS_HPP
#define SBCOAL_PARAMS_HPP

#include <cstdint>

namespace sbcoal {

// Continuum parameters of the rescaled model. c is the dormancy exchange
// intensity per unit of rescaled time, K = N/M the relative seed-bank size.
struct ScaledParams {
  double c = 1.0;
  double K = 1.0;
};

// Throws std::domain_error unless c > 0, K > 0 and both are finite.
ScaledParams validate_scaled(ScaledParams p);

// Finite-model parameters: N plants, M seeds, c individuals exchanged per
// generation. Derived quantities are computed from the integers so they are
// consistent by construction.
struct DiscreteParams {
  std::int64_t N = 1;
  std::int64_t M = 1;
  std::int64_t c = 0;

  double epsilon() const { return static_cast<double>(c) / static_cast<double>(N); }
  double delta() const { return static_cast<double>(c) / static_cast<double>(M); }
  double ratio_K() const { return static_cast<double>(N) / static_cast<double>(M); }
};

// Throws std::domain_error naming the violated bound unless
// N >= 1, M >= 1 and 0 <= c <= min(N, M).
DiscreteParams validate_discrete(DiscreteParams p);

// (c, K = N/M) as reals. Requires c >= 1: the rescaled model is degenerate
// without exchange, so c = 0 is rejected.
ScaledParams scaled_from_discrete(const DiscreteParams& p);

}  // namespace sbcoal

#endif
