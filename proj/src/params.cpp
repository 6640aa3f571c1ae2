#include "sbcoal/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbcoal {

ScaledParams validate_scaled(ScaledParams p) {
  if (!(p.c > 0.0) || !std::isfinite(p.c)) {
    throw std::domain_error("ScaledParams: c must be positive and finite, got " +
                            std::to_string(p.c));
  }
  if (!(p.K > 0.0) || !std::isfinite(p.K)) {
    throw std::domain_error("ScaledParams: K must be positive and finite, got " +
                            std::to_string(p.K));
  }
  return p;
}

DiscreteParams validate_discrete(DiscreteParams p) {
  if (p.N < 1) {
    throw std::domain_error("DiscreteParams: N must be >= 1, got " + std::to_string(p.N));
  }
  if (p.M < 1) {
    throw std::domain_error("DiscreteParams: M must be >= 1, got " + std::to_string(p.M));
  }
  if (p.c < 0) {
    throw std::domain_error("DiscreteParams: c must be >= 0, got " + std::to_string(p.c));
  }
  if (p.c > p.N || p.c > p.M) {
    throw std::domain_error("DiscreteParams: c exceeds min(N,M): c=" + std::to_string(p.c) +
                            ", N=" + std::to_string(p.N) + ", M=" + std::to_string(p.M));
  }
  return p;
}

ScaledParams scaled_from_discrete(const DiscreteParams& p) {
  validate_discrete(p);
  if (p.c == 0) {
    throw std::domain_error("scaled_from_discrete: c = 0 has no scaled counterpart");
  }
  return ScaledParams{static_cast<double>(p.c), p.ratio_K()};
}

}  // namespace sbcoal
