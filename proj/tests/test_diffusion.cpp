#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "sbcoal/diffusion.hpp"
#include "sbcoal/dual_exact.hpp"

using namespace sbcoal;
using namespace sbcoal::diff;

TEST_CASE("integration spec validation") {
  CHECK_THROWS_AS(validate_spec(IntegrationSpec{0.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(validate_spec(IntegrationSpec{0.5, 0.25}), std::domain_error);
  CHECK_NOTHROW(validate_spec(IntegrationSpec{1e-3, 1.0}));
}

TEST_CASE("limit generator on simple functions") {
  const ScaledParams p{2.0, 1.0};
  CHECK(limit_generator_apply(p, monomial(1, 0), 0.3, 0.7) == doctest::Approx(0.8));
  Differentiable constant;
  constant.value = [](double, double) { return 42.0; };
  CHECK(limit_generator_apply(ScaledParams{1.0, 1.0}, constant, 0.4, 0.9) ==
        doctest::Approx(0.0).epsilon(1e-6));
  // c(y-x) y + cK(x-y) x with c = K = 1 at (0.2, 0.8).
  CHECK(limit_generator_apply(ScaledParams{1.0, 1.0}, monomial(1, 1), 0.2, 0.8) ==
        doctest::Approx(0.36));
}

TEST_CASE("finite-difference fallback agrees with closed-form partials") {
  const ScaledParams p{1.5, 0.5};
  Differentiable numeric;
  numeric.value = [](double x, double y) { return x * x * y + 0.3 * y * y; };
  Differentiable analytic = numeric;
  analytic.df_dx = [](double x, double y) { return 2.0 * x * y; };
  analytic.df_dy = [](double x, double y) { return x * x + 0.6 * y; };
  analytic.d2f_dx2 = [](double, double y) { return 2.0 * y; };
  for (double x : {0.1, 0.5, 0.9}) {
    for (double y : {0.2, 0.8}) {
      CHECK(limit_generator_apply(p, numeric, x, y) ==
            doctest::Approx(limit_generator_apply(p, analytic, x, y)).epsilon(1e-5));
    }
  }
}

TEST_CASE("limit generator on monomials equals the dual three-term expression") {
  // A x^n y^m = cn (x^{n-1} y^{m+1} - x^n y^m) + C(n,2) (x^{n-1} y^m - x^n y^m)
  //           + cKm (x^{n+1} y^{m-1} - x^n y^m): the identity behind duality.
  const ScaledParams p{1.7, 0.6};
  auto ipow = [](double v, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= v;
    return r;
  };
  for (int n = 0; n <= 5; ++n) {
    for (int m = 0; n + m <= 5; ++m) {
      if (n + m == 0) continue;
      for (double x : {0.0, 0.3, 0.7, 1.0}) {
        for (double y : {0.0, 0.4, 1.0}) {
          const double direct = limit_generator_apply(p, monomial(n, m), x, y);
          const double base = ipow(x, n) * ipow(y, m);
          double expected = 0.0;
          if (n >= 1) expected += p.c * n * (ipow(x, n - 1) * ipow(y, m + 1) - base);
          if (n >= 2) expected += 0.5 * n * (n - 1) * (ipow(x, n - 1) * ipow(y, m) - base);
          if (m >= 1) expected += p.c * p.K * m * (ipow(x, n + 1) * ipow(y, m - 1) - base);
          CHECK(direct == doctest::Approx(expected).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("em_step matches hand-evaluated drift and respects the corners") {
  const ScaledParams p{1.0, 2.0};
  const auto moved = em_step(p, DiffusionState{0.2, 0.8}, 0.01, 0.0);
  CHECK(moved.x == doctest::Approx(0.206));
  CHECK(moved.y == doctest::Approx(0.788));

  for (double w : {-0.5, 0.0, 2.0}) {
    const auto corner = em_step(p, DiffusionState{0.0, 0.0}, 0.01, w);
    CHECK(corner.x == 0.0);
    CHECK(corner.y == 0.0);
    const auto full = em_step(p, DiffusionState{1.0, 1.0}, 0.01, w);
    CHECK(full.x == 1.0);
    CHECK(full.y == 1.0);
  }
  const auto balanced = em_step(ScaledParams{1.0, 1.0}, DiffusionState{0.5, 0.5}, 0.01, 0.0);
  CHECK(balanced.x == doctest::Approx(0.5));
  CHECK(balanced.y == doctest::Approx(0.5));
}

TEST_CASE("em_step output always stays inside the unit square") {
  Xoshiro256 rng(31337);
  const ScaledParams p{3.0, 0.25};
  for (int i = 0; i < 20000; ++i) {
    const DiffusionState s{uniform01(rng), uniform01(rng)};
    const double w = 0.5 * standard_normal(rng);
    const auto next = em_step(p, s, 0.05, w);
    CHECK(next.x >= 0.0);
    CHECK(next.x <= 1.0);
    CHECK(next.y >= 0.0);
    CHECK(next.y <= 1.0);
  }
}

TEST_CASE("noise-free flow contracts to the x = y diagonal") {
  const ScaledParams p{1.0, 0.5};
  DiffusionState s{0.9, 0.1};
  for (int i = 0; i < 20000; ++i) s = em_step(p, s, 1e-3, 0.0);
  CHECK(std::abs(s.x - s.y) < 1e-6);
}

TEST_CASE("simulate_path keeps absorbing starts fixed and is reproducible") {
  const ScaledParams p{1.0, 1.0};
  const IntegrationSpec spec{1e-3, 2.0};
  Xoshiro256 rng(5);
  const auto one = simulate_path(p, DiffusionState{1.0, 1.0}, spec, rng);
  CHECK(one.x == 1.0);
  CHECK(one.y == 1.0);
  const auto zero = simulate_path(p, DiffusionState{0.0, 0.0}, spec, rng);
  CHECK(zero.x == 0.0);
  CHECK(zero.y == 0.0);

  Xoshiro256 r1 = ReplicateSeed{42, 3}.make_rng();
  Xoshiro256 r2 = ReplicateSeed{42, 3}.make_rng();
  const auto a = simulate_path(p, DiffusionState{0.3, 0.7}, spec, r1);
  const auto b = simulate_path(p, DiffusionState{0.3, 0.7}, spec, r2);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
}

TEST_CASE("K X_t + Y_t keeps its initial mean (martingale)") {
  const ScaledParams p{1.0, 1.0};
  const std::int64_t reps = 20000;
  const auto stats = [&] {
    std::vector<double> samples(reps);
    for (std::int64_t i = 0; i < reps; ++i) {
      Xoshiro256 rng = ReplicateSeed{1001, static_cast<std::uint64_t>(i)}.make_rng();
      const auto end = simulate_path(p, DiffusionState{0.3, 0.7}, IntegrationSpec{1e-3, 1.0}, rng);
      samples[static_cast<std::size_t>(i)] = p.K * end.x + end.y;
    }
    return summarize(samples);
  }();
  CHECK(std::abs(stats.mean - 1.0) < 3.0 * stats.standard_error + 5.0 * 1e-3);
}

TEST_CASE("estimate_mixed_moment at t = 0 is deterministic") {
  const auto s = estimate_mixed_moment(ScaledParams{1, 1}, DiffusionState{0.3, 0.7}, 2, 1, 0.0,
                                       1e-3, 500, 9, 0, 1);
  CHECK(s.mean == doctest::Approx(0.3 * 0.3 * 0.7));
  CHECK(s.standard_error == 0.0);
}

TEST_CASE("estimate_mixed_moment matches the two-state closed form") {
  // E[X_1] = x p(1) + y (1 - p(1)) with p(t) = 1/2 + e^{-2t}/2 for c = K = 1.
  const double oracle = 0.3 * 0.5676676416183064 + 0.7 * (1.0 - 0.5676676416183064);
  const auto s = estimate_mixed_moment(ScaledParams{1, 1}, DiffusionState{0.3, 0.7}, 1, 0, 1.0,
                                       1e-3, 20000, 2002, 0, 0);
  CHECK(std::abs(s.mean - oracle) < 3.0 * s.standard_error + 5.0 * 1e-3);
  CHECK_THROWS_AS(estimate_mixed_moment(ScaledParams{1, 1}, DiffusionState{0.3, 0.7}, 1, 0, 1.0,
                                        1e-3, 99, 2002, 0, 0),
                  std::domain_error);
  CHECK_THROWS_AS(estimate_mixed_moment(ScaledParams{1, 1}, DiffusionState{0.3, 0.7}, 0, 0, 1.0,
                                        1e-3, 500, 2002, 0, 0),
                  std::domain_error);
}

TEST_CASE("estimate_mixed_moment agrees with the dual oracle") {
  const ScaledParams p{1.0, 1.0};
  for (const auto& [n, m] : std::vector<std::pair<int, int>>{{1, 1}, {2, 0}}) {
    const double oracle = dual::dual_moment(p, n, m, 0.3, 0.7, 0.8);
    const auto s = estimate_mixed_moment(p, DiffusionState{0.3, 0.7}, n, m, 0.8, 1e-3, 20000,
                                         404 + n * 10 + m, 0, 0);
    CHECK(std::abs(s.mean - oracle) < 3.0 * s.standard_error + 5.0 * 1e-3);
  }
}

TEST_CASE("fixation probability closed form") {
  CHECK(fixation_probability_exact(ScaledParams{1, 1}, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(fixation_probability_exact(ScaledParams{1, 1}, 0.5, 0.5) == doctest::Approx(0.5));
  CHECK(fixation_probability_exact(ScaledParams{1, 1}, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(fixation_probability_exact(ScaledParams{1, 2}, 0.25, 0.4) ==
        doctest::Approx((0.4 + 0.25 * 2.0) / 3.0));
  CHECK_THROWS_AS(fixation_probability_exact(ScaledParams{1, 1}, -0.1, 0.5), std::domain_error);
}

TEST_CASE("fixation estimate is exact from absorbing starts") {
  const IntegrationSpec spec{1e-3, 5.0};
  const auto fixed = estimate_fixation_empirical(ScaledParams{1, 1}, DiffusionState{1, 1}, spec,
                                                 200, 7, 0, 1);
  CHECK(fixed.fixed.mean == doctest::Approx(1.0));
  CHECK(fixed.unresolved_fraction == 0.0);
  const auto lost = estimate_fixation_empirical(ScaledParams{1, 1}, DiffusionState{0, 0}, spec,
                                                200, 7, 0, 1);
  CHECK(lost.fixed.mean == doctest::Approx(0.0));
  CHECK(lost.unresolved_fraction == 0.0);
}
