#include "sbcoal/dual_exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sbcoal::dual {

namespace {

constexpr int kSizeGuard = 200;

// Index of the first state of level s within the ordered space.
int level_offset(int s) { return (s - 1) * (s + 2) / 2; }

double pow_int(double v, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= v;
  return r;
}

}  // namespace

int DualStateSpace::index_of(int n, int m) const {
  if (n < 0 || m < 0) return -1;
  const int s = n + m;
  if (s < 1 || s > total) return -1;
  return level_offset(s) + n;
}

std::pair<DualStateSpace, RateMatrix> build_space_and_rates(const ScaledParams& params, int n0,
                                                            int m0) {
  validate_scaled(params);
  if (n0 < 0 || m0 < 0 || n0 + m0 < 1) {
    throw std::domain_error("build_space_and_rates: need n0, m0 >= 0 and n0 + m0 >= 1");
  }
  const int total = n0 + m0;
  if (total > kSizeGuard) {
    throw std::length_error("build_space_and_rates: n0 + m0 = " + std::to_string(total) +
                            " exceeds the size guard " + std::to_string(kSizeGuard));
  }

  DualStateSpace space;
  space.total = total;
  space.states.reserve(static_cast<std::size_t>(level_offset(total + 1)));
  for (int s = 1; s <= total; ++s) {
    for (int n = 0; n <= s; ++n) space.states.emplace_back(n, s - n);
  }

  RateMatrix q;
  const int dim = space.size();
  q.row_ptr.reserve(static_cast<std::size_t>(dim) + 1);
  q.exit_rate.reserve(static_cast<std::size_t>(dim));
  q.row_ptr.push_back(0);
  for (int i = 0; i < dim; ++i) {
    const auto [n, m] = space.states[static_cast<std::size_t>(i)];
    double exit = 0.0;
    if (n >= 1) {
      q.col.push_back(space.index_of(n - 1, m + 1));
      q.rate.push_back(params.c * n);
      exit += params.c * n;
    }
    if (m >= 1) {
      q.col.push_back(space.index_of(n + 1, m - 1));
      q.rate.push_back(params.c * params.K * m);
      exit += params.c * params.K * m;
    }
    if (n >= 2) {
      q.col.push_back(space.index_of(n - 1, m));
      const double merge = 0.5 * n * (n - 1);
      q.rate.push_back(merge);
      exit += merge;
    }
    q.exit_rate.push_back(exit);
    q.row_ptr.push_back(static_cast<int>(q.col.size()));
  }
  return {std::move(space), std::move(q)};
}

namespace {

void apply_generator(const RateMatrix& q, const std::vector<double>& g, std::vector<double>& out) {
  const int dim = static_cast<int>(g.size());
  for (int i = 0; i < dim; ++i) {
    double acc = -q.exit_rate[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
    for (int k = q.row_ptr[static_cast<std::size_t>(i)];
         k < q.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      acc += q.rate[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(q.col[k])];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
}

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
// b - b* (5th-order weights minus the embedded 4th-order weights).
constexpr double kE1 = kB1 - 5179.0 / 57600, kE3 = kB3 - 7571.0 / 16695,
                 kE4 = kB4 - 393.0 / 640, kE5 = kB5 + 92097.0 / 339200,
                 kE6 = kB6 - 187.0 / 2100, kE7 = -1.0 / 40;

constexpr double kAbsTol = 1e-9;

void integrate_dopri5(const RateMatrix& q, std::vector<double>& g, double t_end) {
  if (t_end <= 0.0) return;
  const std::size_t dim = g.size();
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim),
      g5(dim);

  double max_rate = 0.0;
  for (double r : q.exit_rate) max_rate = std::max(max_rate, r);
  double h = std::min(t_end, 0.1 / std::max(max_rate, 1e-12));
  double t = 0.0;
  apply_generator(q, g, k1);

  const int max_steps = 10000000;
  for (int step = 0; step < max_steps;) {
    if (t >= t_end) return;
    h = std::min(h, t_end - t);

    auto stage = [&](std::vector<double>& out, auto... terms) {
      // terms are (coeff, vector*) pairs folded below
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = g[i];
        ((acc += h * terms.first * (*terms.second)[i]), ...);
        out[i] = acc;
      }
    };
    using P = std::pair<double, const std::vector<double>*>;
    stage(tmp, P{kA21, &k1});
    apply_generator(q, tmp, k2);
    stage(tmp, P{kA31, &k1}, P{kA32, &k2});
    apply_generator(q, tmp, k3);
    stage(tmp, P{kA41, &k1}, P{kA42, &k2}, P{kA43, &k3});
    apply_generator(q, tmp, k4);
    stage(tmp, P{kA51, &k1}, P{kA52, &k2}, P{kA53, &k3}, P{kA54, &k4});
    apply_generator(q, tmp, k5);
    stage(tmp, P{kA61, &k1}, P{kA62, &k2}, P{kA63, &k3}, P{kA64, &k4}, P{kA65, &k5});
    apply_generator(q, tmp, k6);
    stage(g5, P{kB1, &k1}, P{kB3, &k3}, P{kB4, &k4}, P{kB5, &k5}, P{kB6, &k6});
    apply_generator(q, g5, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                            kE6 * k6[i] + kE7 * k7[i]);
      err = std::max(err, std::abs(e));
    }
    const double ratio = err / kAbsTol;
    if (ratio <= 1.0) {
      t += h;
      g.swap(g5);
      k1.swap(k7);  // FSAL
      ++step;
    }
    const double scale = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
    h *= std::clamp(scale, 0.2, 5.0);
    if (h < 1e-14 * std::max(1.0, t_end)) {
      throw std::runtime_error("integrate_dopri5: step size underflow");
    }
  }
  throw std::runtime_error("integrate_dopri5: step budget exhausted before t_end");
}

}  // namespace

std::vector<double> solve_dual_moments(const ScaledParams& params, int total, double x, double y,
                                       double t) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("solve_dual_moments: (x,y) outside the unit square");
  }
  if (t < 0.0) throw std::domain_error("solve_dual_moments: t must be >= 0");
  auto [space, q] = build_space_and_rates(params, total, 0);
  std::vector<double> g(static_cast<std::size_t>(space.size()));
  for (int i = 0; i < space.size(); ++i) {
    const auto [n, m] = space.states[static_cast<std::size_t>(i)];
    g[static_cast<std::size_t>(i)] = pow_int(x, n) * pow_int(y, m);
  }
  integrate_dopri5(q, g, t);
  return g;
}

double dual_moment(const ScaledParams& params, int n0, int m0, double x, double y, double t) {
  if (n0 < 0 || m0 < 0 || n0 + m0 < 1) {
    throw std::domain_error("dual_moment: need n0, m0 >= 0 and n0 + m0 >= 1");
  }
  auto g = solve_dual_moments(params, n0 + m0, x, y, t);
  const int idx = level_offset(n0 + m0) + n0;
  return std::clamp(g[static_cast<std::size_t>(idx)], 0.0, 1.0);
}

double single_lineage_plant_prob(const ScaledParams& params, double t, bool starts_as_plant) {
  validate_scaled(params);
  if (t < 0.0) throw std::domain_error("single_lineage_plant_prob: t must be >= 0");
  const double stationary = params.K / (1.0 + params.K);
  const double p0 = starts_as_plant ? 1.0 : 0.0;
  return stationary + (p0 - stationary) * std::exp(-params.c * (1.0 + params.K) * t);
}

double expected_tmrca_exact(const ScaledParams& params, int n0, int m0) {
  validate_scaled(params);
  if (n0 < 0 || m0 < 0 || n0 + m0 < 1) {
    throw std::domain_error("expected_tmrca_exact: need n0, m0 >= 0 and n0 + m0 >= 1");
  }
  const int total = n0 + m0;
  if (total > kSizeGuard) {
    throw std::length_error("expected_tmrca_exact: n0 + m0 exceeds the size guard");
  }
  if (total == 1) return 0.0;

  // Level s couples only to itself (flips) and to level s-1 (merges), so we
  // sweep levels upward, solving one tridiagonal system each (unknowns
  // u_s(n), n = 0..s). Thomas algorithm; the systems are irreducibly
  // diagonally dominant for c, K > 0.
  std::vector<double> prev;  // level s-1 solution; level 1 is absorbing (0)
  std::vector<double> cur, diag, rhs, upper;
  for (int s = 2; s <= total; ++s) {
    const int dim = s + 1;
    diag.assign(static_cast<std::size_t>(dim), 0.0);
    upper.assign(static_cast<std::size_t>(dim), 0.0);
    rhs.assign(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> lower(static_cast<std::size_t>(dim), 0.0);
    for (int n = 0; n <= s; ++n) {
      const int m = s - n;
      const double merge = 0.5 * n * (n - 1);
      diag[static_cast<std::size_t>(n)] = merge + params.c * n + params.c * params.K * m;
      if (n >= 1) lower[static_cast<std::size_t>(n)] = -params.c * n;          // u(n-1, m+1)
      if (m >= 1) upper[static_cast<std::size_t>(n)] = -params.c * params.K * m;  // u(n+1, m-1)
      double r = 1.0;
      if (n >= 2 && s >= 3) r += merge * prev[static_cast<std::size_t>(n - 1)];
      rhs[static_cast<std::size_t>(n)] = r;
    }
    // Thomas elimination.
    for (int i = 1; i < dim; ++i) {
      const double pivot = diag[static_cast<std::size_t>(i - 1)];
      if (std::abs(pivot) < 1e-300) {
        throw std::runtime_error("expected_tmrca_exact: singular system");
      }
      const double w = lower[static_cast<std::size_t>(i)] / pivot;
      diag[static_cast<std::size_t>(i)] -= w * upper[static_cast<std::size_t>(i - 1)];
      rhs[static_cast<std::size_t>(i)] -= w * rhs[static_cast<std::size_t>(i - 1)];
    }
    cur.assign(static_cast<std::size_t>(dim), 0.0);
    if (std::abs(diag[static_cast<std::size_t>(dim - 1)]) < 1e-300) {
      throw std::runtime_error("expected_tmrca_exact: singular system");
    }
    cur[static_cast<std::size_t>(dim - 1)] =
        rhs[static_cast<std::size_t>(dim - 1)] / diag[static_cast<std::size_t>(dim - 1)];
    for (int i = dim - 2; i >= 0; --i) {
      cur[static_cast<std::size_t>(i)] =
          (rhs[static_cast<std::size_t>(i)] -
           upper[static_cast<std::size_t>(i)] * cur[static_cast<std::size_t>(i + 1)]) /
          diag[static_cast<std::size_t>(i)];
    }
    prev = cur;
  }
  return cur[static_cast<std::size_t>(n0)];
}

}  // namespace sbcoal::dual
