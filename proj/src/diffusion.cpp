#include "sbcoal/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sbcoal/parallel.hpp"

namespace sbcoal::diff {

IntegrationSpec validate_spec(IntegrationSpec spec) {
  if (!(spec.dt > 0.0)) throw std::domain_error("IntegrationSpec: dt must be positive");
  if (!(spec.t_end >= spec.dt)) throw std::domain_error("IntegrationSpec: dt must be <= t_end");
  return spec;
}

Differentiable monomial(int n, int m) {
  if (n < 0 || m < 0) throw std::domain_error("monomial: exponents must be >= 0");
  auto ipow = [](double v, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= v;
    return r;
  };
  Differentiable f;
  f.value = [=](double x, double y) { return ipow(x, n) * ipow(y, m); };
  f.df_dx = [=](double x, double y) {
    return n == 0 ? 0.0 : static_cast<double>(n) * ipow(x, n - 1) * ipow(y, m);
  };
  f.df_dy = [=](double x, double y) {
    return m == 0 ? 0.0 : static_cast<double>(m) * ipow(x, n) * ipow(y, m - 1);
  };
  f.d2f_dx2 = [=](double x, double y) {
    return n < 2 ? 0.0
                 : static_cast<double>(n) * static_cast<double>(n - 1) * ipow(x, n - 2) *
                       ipow(y, m);
  };
  return f;
}

namespace {

// Central differences with an h suited to second derivatives.
double fd_dx(const std::function<double(double, double)>& f, double x, double y) {
  const double h = 1e-6;
  return (f(x + h, y) - f(x - h, y)) / (2.0 * h);
}
double fd_dy(const std::function<double(double, double)>& f, double x, double y) {
  const double h = 1e-6;
  return (f(x, y + h) - f(x, y - h)) / (2.0 * h);
}
double fd_dxx(const std::function<double(double, double)>& f, double x, double y) {
  const double h = 1e-4;
  return (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
}

}  // namespace

double limit_generator_apply(const ScaledParams& params, const Differentiable& f, double x,
                             double y) {
  if (!f.value) throw std::invalid_argument("limit_generator_apply: f has no value function");
  const double fx = f.df_dx ? f.df_dx(x, y) : fd_dx(f.value, x, y);
  const double fy = f.df_dy ? f.df_dy(x, y) : fd_dy(f.value, x, y);
  const double fxx = f.d2f_dx2 ? f.d2f_dx2(x, y) : fd_dxx(f.value, x, y);
  return params.c * (y - x) * fx + params.c * params.K * (x - y) * fy +
         0.5 * x * (1.0 - x) * fxx;
}

DiffusionState em_step(const ScaledParams& params, DiffusionState state, double dt, double w) {
  const double diffusion = std::sqrt(std::max(state.x * (1.0 - state.x), 0.0));
  const double x = state.x + params.c * (state.y - state.x) * dt + diffusion * w;
  const double y = state.y + params.c * params.K * (state.x - state.y) * dt;
  return DiffusionState{std::clamp(x, 0.0, 1.0), std::clamp(y, 0.0, 1.0)};
}

namespace {

bool frozen(DiffusionState s) {
  // Both coordinates at the same corner: drift and noise vanish exactly.
  return (s.x == 0.0 && s.y == 0.0) || (s.x == 1.0 && s.y == 1.0);
}

// Advances the state by `duration` in steps of dt (shorter final step).
DiffusionState advance(const ScaledParams& params, DiffusionState s, double dt, double duration,
                       NormalSampler& normal, Xoshiro256& rng) {
  const double sqrt_dt = std::sqrt(dt);
  double remaining = duration;
  while (remaining > 1e-15) {
    if (frozen(s)) break;
    if (remaining >= dt) {
      s = em_step(params, s, dt, sqrt_dt * normal(rng));
      remaining -= dt;
    } else {
      s = em_step(params, s, remaining, std::sqrt(remaining) * normal(rng));
      remaining = 0.0;
    }
  }
  return s;
}

}  // namespace

DiffusionState simulate_path(const ScaledParams& params, DiffusionState start,
                             const IntegrationSpec& spec, Xoshiro256& rng) {
  validate_spec(spec);
  NormalSampler normal;
  return advance(params, start, spec.dt, spec.t_end, normal, rng);
}

std::vector<DiffusionState> simulate_path_at(const ScaledParams& params, DiffusionState start,
                                             double dt, std::span<const double> times,
                                             Xoshiro256& rng) {
  if (!(dt > 0.0)) throw std::domain_error("simulate_path_at: dt must be positive");
  std::vector<DiffusionState> out;
  out.reserve(times.size());
  NormalSampler normal;
  DiffusionState s = start;
  double t = 0.0;
  for (double target : times) {
    if (target < t) throw std::domain_error("simulate_path_at: times must be nondecreasing");
    s = advance(params, s, dt, target - t, normal, rng);
    t = target;
    out.push_back(s);
  }
  return out;
}

SummaryStats estimate_mixed_moment(const ScaledParams& params, DiffusionState start, int n,
                                   int m, double t, double dt, std::int64_t replicates,
                                   std::uint64_t master_seed, std::uint64_t stream_offset,
                                   int threads) {
  if (n < 0 || m < 0 || n + m < 1) {
    throw std::domain_error("estimate_mixed_moment: need n, m >= 0 and n + m >= 1");
  }
  if (replicates < 100) {
    throw std::domain_error("estimate_mixed_moment: need at least 100 replicates");
  }
  const Differentiable f = monomial(n, m);
  if (t == 0.0) {
    SummaryStats s;
    s.count = replicates;
    s.mean = f.value(start.x, start.y);
    s.ci95_low = s.ci95_high = s.mean;
    return s;
  }
  const double times[1] = {t};
  auto samples = parallel_replicates<double>(
      replicates, master_seed, stream_offset, threads, [&](std::int64_t, Xoshiro256& rng) {
        const DiffusionState end = simulate_path_at(params, start, dt, times, rng)[0];
        return f.value(end.x, end.y);
      });
  return summarize(samples);
}

double fixation_probability_exact(const ScaledParams& params, double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("fixation_probability_exact: (x,y) outside the unit square");
  }
  return (y + x * params.K) / (1.0 + params.K);
}

FixationEstimate estimate_fixation_empirical(const ScaledParams& params, DiffusionState start,
                                             const IntegrationSpec& spec,
                                             std::int64_t replicates, std::uint64_t master_seed,
                                             std::uint64_t stream_offset, int threads) {
  validate_spec(spec);
  if (replicates < 100) {
    throw std::domain_error("estimate_fixation_empirical: need at least 100 replicates");
  }
  const double tol = 0.01;
  // 0 = lost, 1 = fixed, 2 = unresolved.
  auto outcomes = parallel_replicates<int>(
      replicates, master_seed, stream_offset, threads, [&](std::int64_t, Xoshiro256& rng) {
        const DiffusionState end = simulate_path(params, start, spec, rng);
        if (end.x > 1.0 - tol) return 1;
        if (end.x < tol) return 0;
        return 2;
      });
  std::int64_t fixed = 0, unresolved = 0;
  for (int o : outcomes) {
    fixed += (o == 1) ? 1 : 0;
    unresolved += (o == 2) ? 1 : 0;
  }
  FixationEstimate est;
  est.fixed = summarize_binary(fixed, replicates);
  est.unresolved_fraction = static_cast<double>(unresolved) / static_cast<double>(replicates);
  est.tolerance = tol;
  est.replicates = replicates;
  return est;
}

}  // namespace sbcoal::diff
