#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "sbcoal/params.hpp"
#include "sbcoal/rng.hpp"
#include "sbcoal/stats.hpp"
#include "stat_helpers.hpp"

using namespace sbcoal;

TEST_CASE("validate_discrete accepts in-bound parameters") {
  const auto p = validate_discrete(DiscreteParams{2, 2, 1});
  CHECK(p.N == 2);
  CHECK(p.c == 1);
}

TEST_CASE("validate_discrete rejects c above min(N,M)") {
  CHECK_THROWS_WITH_AS(validate_discrete(DiscreteParams{2, 2, 3}),
                       doctest::Contains("c exceeds min(N,M)"), std::domain_error);
  CHECK_THROWS_AS(validate_discrete(DiscreteParams{0, 2, 0}), std::domain_error);
  CHECK_THROWS_AS(validate_discrete(DiscreteParams{2, 0, 0}), std::domain_error);
  CHECK_THROWS_AS(validate_discrete(DiscreteParams{2, 2, -1}), std::domain_error);
}

TEST_CASE("validate_discrete allows the no-migration case") {
  const auto p = validate_discrete(DiscreteParams{100, 50, 0});
  CHECK(p.ratio_K() == doctest::Approx(2.0));
  CHECK(p.epsilon() == 0.0);
  CHECK(p.delta() == 0.0);
}

TEST_CASE("scaled_from_discrete maps (N,M,c) to (c,K)") {
  const auto s1 = scaled_from_discrete(DiscreteParams{100, 50, 2});
  CHECK(s1.c == doctest::Approx(2.0));
  CHECK(s1.K == doctest::Approx(2.0));
  const auto s2 = scaled_from_discrete(DiscreteParams{64, 64, 1});
  CHECK(s2.c == doctest::Approx(1.0));
  CHECK(s2.K == doctest::Approx(1.0));
  const auto s3 = scaled_from_discrete(DiscreteParams{10, 100, 1});
  CHECK(s3.K == doctest::Approx(0.1));
  CHECK_THROWS_AS(scaled_from_discrete(DiscreteParams{100, 50, 0}), std::domain_error);
}

TEST_CASE("validate_scaled rejects nonpositive and nonfinite values") {
  CHECK_THROWS_AS(validate_scaled(ScaledParams{0.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(validate_scaled(ScaledParams{1.0, -2.0}), std::domain_error);
  CHECK_THROWS_AS(validate_scaled(ScaledParams{1.0 / 0.0, 1.0}), std::domain_error);
}

TEST_CASE("summarize on constant and tiny samples") {
  const std::vector<double> ones = {1.0, 1.0, 1.0, 1.0};
  auto s = summarize(ones);
  CHECK(s.mean == doctest::Approx(1.0));
  CHECK(s.variance == doctest::Approx(0.0));

  const std::vector<double> two = {0.0, 2.0};
  s = summarize(two);
  CHECK(s.mean == doctest::Approx(1.0));
  CHECK(s.variance == doctest::Approx(2.0));

  CHECK_THROWS_AS(summarize(std::vector<double>{1.0}), std::domain_error);
}

TEST_CASE("summarize matches the direct two-pass formula") {
  const std::vector<double> xs = {1, 2, 3, 4, 5};
  // Independent hand computation: mean 3, sum of squared deviations
  // 4+1+0+1+4 = 10, unbiased variance 10/4.
  const auto s = summarize(xs);
  CHECK(s.mean == doctest::Approx(3.0));
  CHECK(s.variance == doctest::Approx(2.5));
  CHECK(s.standard_error == doctest::Approx(std::sqrt(2.5 / 5.0)));
  CHECK(s.ci95_low == doctest::Approx(3.0 - 1.96 * s.standard_error));
  CHECK(s.ci95_high == doctest::Approx(3.0 + 1.96 * s.standard_error));
}

TEST_CASE("summarize is order-independent within 1e-12") {
  Xoshiro256 rng(123);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = std::exp(8.0 * uniform01(rng) - 4.0);
  const auto s1 = summarize(xs);
  std::vector<double> permuted = xs;
  std::reverse(permuted.begin(), permuted.end());
  std::swap(permuted[17], permuted[4005]);
  const auto s2 = summarize(permuted);
  CHECK(std::abs(s1.mean - s2.mean) <= 1e-12 * std::abs(s1.mean));
  CHECK(std::abs(s1.variance - s2.variance) <= 1e-12 * std::abs(s1.variance));
}

TEST_CASE("replicate streams are reproducible and distinct") {
  const ReplicateSeed a{987654321, 7};
  auto r1 = a.make_rng();
  auto r2 = a.make_rng();
  for (int i = 0; i < 64; ++i) CHECK(r1() == r2());

  auto r3 = ReplicateSeed{987654321, 8}.make_rng();
  auto r4 = ReplicateSeed{987654321, 7}.make_rng();
  int differing = 0;
  for (int i = 0; i < 64; ++i) differing += (r3() != r4()) ? 1 : 0;
  CHECK(differing > 60);
}

TEST_CASE("uniform01 stays in [0,1) and has the right first moments") {
  Xoshiro256 rng(2024);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sumsq / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("exponential and normal samplers have the right moments") {
  Xoshiro256 rng(99);
  const int n = 200000;
  double esum = 0.0;
  for (int i = 0; i < n; ++i) esum += exponential(rng, 2.5);
  CHECK(esum / n == doctest::Approx(1.0 / 2.5).epsilon(0.02));

  NormalSampler normal;
  double nsum = 0.0, nsumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = normal(rng);
    nsum += z;
    nsumsq += z * z;
  }
  CHECK(nsum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(nsumsq / n == doctest::Approx(1.0).epsilon(0.02));
}

namespace {

double lchoose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

}  // namespace

TEST_CASE("binomial_pmf matches the lgamma formula") {
  const auto pmf = binomial_pmf(13, 0.37);
  for (std::int64_t k = 0; k <= 13; ++k) {
    const double direct =
        std::exp(lchoose(13, k) + k * std::log(0.37) + (13 - k) * std::log(0.63));
    CHECK(pmf[static_cast<std::size_t>(k)] == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK(std::accumulate(pmf.begin(), pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hypergeometric_pmf matches the lgamma formula") {
  // Hyp(M=12, c=5, b=7): P(z) = C(7,z) C(5,5-z) / C(12,5).
  const auto pmf = hypergeometric_pmf(12, 5, 7);
  for (std::int64_t z = 0; z <= 5; ++z) {
    const double direct =
        std::exp(lchoose(7, z) + lchoose(5, 5 - z) - lchoose(12, 5));
    CHECK(pmf[static_cast<std::size_t>(z)] == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("binomial sampler follows its pmf (chi-square)") {
  Xoshiro256 rng(5150);
  const std::int64_t n = 11;
  const double p = 0.43;
  const auto pmf = binomial_pmf(n, p);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n) + 1, 0);
  const std::int64_t draws = 100000;
  for (std::int64_t i = 0; i < draws; ++i) counts[static_cast<std::size_t>(binomial(rng, n, p))]++;
  CHECK(sbcoal::test::chi_square_gof_pvalue(counts, pmf, draws) > 0.001);
}

TEST_CASE("hypergeometric sampler follows its pmf in both regimes") {
  Xoshiro256 rng(6021);
  const std::int64_t draws = 100000;

  // Table-inversion regime.
  {
    const auto pmf = hypergeometric_pmf(20, 6, 9);
    std::vector<std::int64_t> counts(7, 0);
    for (std::int64_t i = 0; i < draws; ++i) {
      counts[static_cast<std::size_t>(hypergeometric(rng, 20, 6, 9))]++;
    }
    CHECK(sbcoal::test::chi_square_gof_pvalue(counts, pmf, draws) > 0.001);
  }
  // Urn regime (draws > 64).
  {
    const auto pmf = hypergeometric_pmf(200, 70, 90);
    std::vector<std::int64_t> counts(71, 0);
    for (std::int64_t i = 0; i < draws; ++i) {
      counts[static_cast<std::size_t>(hypergeometric(rng, 200, 70, 90))]++;
    }
    CHECK(sbcoal::test::chi_square_gof_pvalue(counts, pmf, draws) > 0.001);
  }
}
