#ifndef SBCOAL_DIFFUSION_HPP
#define SBCOAL_DIFFUSION_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sbcoal/params.hpp"
#include "sbcoal/rng.hpp"
#include "sbcoal/stats.hpp"

namespace sbcoal::diff {

struct DiffusionState {
  double x = 0.0;  // active allele-a frequency
  double y = 0.0;  // dormant allele-a frequency
};

enum class BoundaryPolicy : unsigned char { clamp_to_unit_square };

struct IntegrationSpec {
  double dt = 1e-3;
  double t_end = 1.0;
  BoundaryPolicy boundary = BoundaryPolicy::clamp_to_unit_square;
};

// Throws std::domain_error unless 0 < dt <= t_end.
IntegrationSpec validate_spec(IntegrationSpec spec);

// Test function with value and the partials the generator needs. Partials
// left empty are approximated by central finite differences.
struct Differentiable {
  std::function<double(double, double)> value;
  std::function<double(double, double)> df_dx;
  std::function<double(double, double)> df_dy;
  std::function<double(double, double)> d2f_dx2;
};

// x^n y^m with closed-form partials.
Differentiable monomial(int n, int m);

// A f = c (y-x) df/dx + c K (x-y) df/dy + x(1-x)/2 d2f/dx2.
double limit_generator_apply(const ScaledParams& params, const Differentiable& f, double x,
                             double y);

// One Euler-Maruyama step; w is the Gaussian increment already scaled to
// Normal(0, dt). The diffusion coefficient is zeroed outside [0,1] and the
// result is clamped to the unit square, so the corners stay absorbing.
DiffusionState em_step(const ScaledParams& params, DiffusionState state, double dt, double w);

// Iterates em_step with increments from rng to spec.t_end; the final step is
// shortened to land on t_end exactly.
DiffusionState simulate_path(const ScaledParams& params, DiffusionState start,
                             const IntegrationSpec& spec, Xoshiro256& rng);

// Endpoint at each requested time (times must be nondecreasing); one path.
std::vector<DiffusionState> simulate_path_at(const ScaledParams& params, DiffusionState start,
                                             double dt, std::span<const double> times,
                                             Xoshiro256& rng);

// Monte Carlo estimate of E[X_t^n Y_t^m]; replicates >= 100 (t = 0 returns
// the deterministic value with zero spread).
SummaryStats estimate_mixed_moment(const ScaledParams& params, DiffusionState start, int n,
                                   int m, double t, double dt, std::int64_t replicates,
                                   std::uint64_t master_seed, std::uint64_t stream_offset,
                                   int threads);

// (y + x K) / (1 + K).
double fixation_probability_exact(const ScaledParams& params, double x, double y);

struct FixationEstimate {
  SummaryStats fixed;           // endpoint fraction with x > 1 - tol
  double unresolved_fraction;   // endpoints with x in [tol, 1-tol]
  double tolerance;             // tol used to classify endpoints
  std::int64_t replicates;
};

// Endpoint classification at horizon t_end, tol = 0.01.
FixationEstimate estimate_fixation_empirical(const ScaledParams& params, DiffusionState start,
                                             const IntegrationSpec& spec,
                                             std::int64_t replicates, std::uint64_t master_seed,
                                             std::uint64_t stream_offset, int threads);

}  // namespace sbcoal::diff

#endif
