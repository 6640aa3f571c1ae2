#ifndef SBCOAL_DUAL_EXACT_HPP
#define SBCOAL_DUAL_EXACT_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sbcoal/params.hpp"

namespace sbcoal::dual {

// States (n, m) with 1 <= n+m <= total, ordered by level s = n+m and within a
// level by n. The space is closed under the block-counting transitions since
// none of them increases n+m.
struct DualStateSpace {
  int total = 0;
  std::vector<std::pair<int, int>> states;

  int size() const { return static_cast<int>(states.size()); }
  // -1 when (n, m) lies outside the space.
  int index_of(int n, int m) const;
};

// Sparse rate matrix in CSR form; off-diagonals only, the diagonal is
// -exit_rate. Entries per state: (n,m) -> (n-1,m+1) at cn, (n+1,m-1) at cKm,
// (n-1,m) at n(n-1)/2.
struct RateMatrix {
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> rate;
  std::vector<double> exit_rate;
};

// Size guard: throws std::length_error for n0 + m0 > 200.
std::pair<DualStateSpace, RateMatrix> build_space_and_rates(const ScaledParams& params, int n0,
                                                            int m0);

// Solves the backward equation dg/dt = Q g with g_0(n,m) = x^n y^m by an
// adaptive Dormand-Prince RK45 with absolute tolerance 1e-9, and returns the
// whole vector g_t (one entry per state of the space for `total`).
std::vector<double> solve_dual_moments(const ScaledParams& params, int total, double x, double y,
                                       double t);

// E_{x,y}[X_t^n0 Y_t^m0] = E^{n0,m0}[x^{N_t} y^{M_t}], clamped to [0,1].
double dual_moment(const ScaledParams& params, int n0, int m0, double x, double y, double t);

// Occupation probability of the plant state for a single lineage:
// K/(1+K) + (p0 - K/(1+K)) exp(-c(1+K)t), p0 = 1 for a plant start.
double single_lineage_plant_prob(const ScaledParams& params, double t, bool starts_as_plant);

// Expected first time n+m reaches 1, by first-step analysis: the transient
// levels s = 2..n0+m0 decouple into tridiagonal systems solved bottom-up.
double expected_tmrca_exact(const ScaledParams& params, int n0, int m0);

}  // namespace sbcoal::dual

#endif
