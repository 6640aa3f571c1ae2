#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "sbcoal/forward_wf.hpp"
#include "stat_helpers.hpp"

using namespace sbcoal;
using namespace sbcoal::wf;

namespace {

// Frozen hand enumeration for (N,M,c) = (2,2,1) from (a,b) = (1,1): the 8
// equally likely (Z,U,V) outcomes give a 7-point law over (a',b').
const std::map<std::pair<std::int64_t, std::int64_t>, double> kHandLaw = {
    {{0, 1}, 0.125}, {{0, 2}, 0.125}, {{1, 0}, 0.125}, {{1, 1}, 0.25},
    {{1, 2}, 0.125}, {{2, 0}, 0.125}, {{2, 1}, 0.125}};

}  // namespace

TEST_CASE("step_population with c=0 never reaches into the seed bank") {
  const DiscreteParams params{6, 4, 0};
  Xoshiro256 rng(11);
  PopulationConfig config = make_config(params, 3, 2);
  const auto [next, ancestry] = step_population(params, config, rng);
  ancestry.check_invariants(params);
  for (const auto& src : ancestry.plant_source) CHECK(!src.from_seed);
  for (std::int64_t j = 0; j < params.M; ++j) {
    CHECK(!ancestry.seed_source[static_cast<std::size_t>(j)].from_plant);
    CHECK(next.seed_types[static_cast<std::size_t>(j)] ==
          config.seed_types[static_cast<std::size_t>(j)]);
  }
}

TEST_CASE("step_population with c=M turns over the whole seed bank") {
  const DiscreteParams params{6, 3, 3};
  Xoshiro256 rng(12);
  PopulationConfig config = make_config(params, 2, 1);
  const auto [next, ancestry] = step_population(params, config, rng);
  ancestry.check_invariants(params);
  std::int64_t germinated = 0;
  for (const auto& src : ancestry.plant_source) germinated += src.from_seed ? 1 : 0;
  CHECK(germinated == 3);
  for (const auto& src : ancestry.seed_source) CHECK(src.from_plant);
}

TEST_CASE("monomorphic configurations are absorbing") {
  const DiscreteParams params{5, 4, 2};
  Xoshiro256 rng(13);
  PopulationConfig config = make_config(params, 5, 4);  // all a
  for (int g = 0; g < 5; ++g) {
    auto [next, ancestry] = step_population(params, config, rng);
    config = std::move(next);
    const auto counts = count_alleles(config);
    CHECK(counts.a_count == params.N);
    CHECK(counts.b_count == params.M);
  }
}

TEST_CASE("step_frequency keeps the absorbing corners fixed") {
  const DiscreteParams params{4, 3, 2};
  Xoshiro256 rng(14);
  for (int i = 0; i < 50; ++i) {
    const auto zero = step_frequency(params, FrequencyState{0, 0}, rng);
    CHECK(zero.a_count == 0);
    CHECK(zero.b_count == 0);
    const auto full = step_frequency(params, FrequencyState{params.N, params.M}, rng);
    CHECK(full.a_count == params.N);
    CHECK(full.b_count == params.M);
  }
}

TEST_CASE("enumerate_transitions reproduces the hand law for (2,2,1)") {
  const DiscreteParams params{2, 2, 1};
  const auto table = enumerate_transitions(params, FrequencyState{1, 1});
  double mass = 0.0;
  for (std::int64_t a = 0; a <= 2; ++a) {
    for (std::int64_t b = 0; b <= 2; ++b) {
      const auto it = kHandLaw.find({a, b});
      const double expected = it == kHandLaw.end() ? 0.0 : it->second;
      CHECK(table.at(a, b) == doctest::Approx(expected).epsilon(1e-12));
      mass += table.at(a, b);
    }
  }
  CHECK(std::abs(mass - 1.0) < 1e-12);
}

TEST_CASE("transition_pmf matches the hand law entry (1/2,1/2) -> (1/2,1/2)") {
  const DiscreteParams params{2, 2, 1};
  CHECK(transition_pmf(params, {1, 1}, {1, 1}) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(transition_pmf(params, {0, 0}, {0, 0}) == doctest::Approx(1.0));
  CHECK(transition_pmf(params, {0, 0}, {1, 1}) == 0.0);
}

TEST_CASE("transition_pmf equals enumeration everywhere on small lattices") {
  for (const DiscreteParams params : {DiscreteParams{2, 2, 1}, DiscreteParams{4, 2, 1},
                                      DiscreteParams{5, 4, 3}, DiscreteParams{3, 7, 2}}) {
    for (std::int64_t a = 0; a <= params.N; ++a) {
      for (std::int64_t b = 0; b <= params.M; ++b) {
        const FrequencyState from{a, b};
        const auto table = enumerate_transitions(params, from);
        double mass = 0.0;
        for (std::int64_t a2 = 0; a2 <= params.N; ++a2) {
          for (std::int64_t b2 = 0; b2 <= params.M; ++b2) {
            const double p = transition_pmf(params, from, FrequencyState{a2, b2});
            CHECK(std::abs(p - table.at(a2, b2)) < 1e-12);
            mass += p;
          }
        }
        CHECK(std::abs(mass - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("enumeration with c=0 is binomial in the plants only") {
  const DiscreteParams params{6, 5, 0};
  const auto table = enumerate_transitions(params, FrequencyState{2, 3});
  const auto bin = binomial_pmf(6, 2.0 / 6.0);
  for (std::int64_t a = 0; a <= 6; ++a) {
    for (std::int64_t b = 0; b <= 5; ++b) {
      const double expected = (b == 3) ? bin[static_cast<std::size_t>(a)] : 0.0;
      CHECK(table.at(a, b) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("first moments from enumeration match the closed forms exactly") {
  for (const DiscreteParams params : {DiscreteParams{4, 3, 2}, DiscreteParams{5, 5, 3},
                                      DiscreteParams{16, 8, 2}, DiscreteParams{6, 16, 4}}) {
    for (std::int64_t a = 0; a <= params.N; ++a) {
      for (std::int64_t b = 0; b <= params.M; ++b) {
        const double x = static_cast<double>(a) / static_cast<double>(params.N);
        const double y = static_cast<double>(b) / static_cast<double>(params.M);
        const auto table = enumerate_transitions(params, FrequencyState{a, b});
        double ex = 0.0, ey = 0.0;
        for (std::int64_t a2 = 0; a2 <= params.N; ++a2) {
          for (std::int64_t b2 = 0; b2 <= params.M; ++b2) {
            const double p = table.at(a2, b2);
            ex += p * (static_cast<double>(a2) / static_cast<double>(params.N) - x);
            ey += p * (static_cast<double>(b2) / static_cast<double>(params.M) - y);
          }
        }
        CHECK(std::abs(ex - params.epsilon() * (y - x)) < 1e-12);
        CHECK(std::abs(ey - params.delta() * (x - y)) < 1e-12);
      }
    }
  }
}

TEST_CASE("step_frequency draws follow the enumerated law (chi-square)") {
  const DiscreteParams params{5, 4, 2};
  const FrequencyState from{2, 1};
  const auto table = enumerate_transitions(params, from);
  Xoshiro256 rng(314159);
  const std::int64_t draws = 100000;
  std::vector<std::int64_t> counts(table.prob.size(), 0);
  for (std::int64_t i = 0; i < draws; ++i) {
    const auto next = step_frequency(params, from, rng);
    counts[static_cast<std::size_t>(next.a_count * (params.M + 1) + next.b_count)]++;
  }
  CHECK(sbcoal::test::chi_square_gof_pvalue(counts, table.prob, draws) > 0.001);
}

TEST_CASE("step_population induces the same one-step law as step_frequency") {
  const DiscreteParams params{5, 4, 2};
  const FrequencyState from{2, 1};
  const auto table = enumerate_transitions(params, from);
  const PopulationConfig config = make_config(params, from.a_count, from.b_count);
  Xoshiro256 rng(271828);
  const std::int64_t draws = 100000;
  std::vector<std::int64_t> counts(table.prob.size(), 0);
  for (std::int64_t i = 0; i < draws; ++i) {
    const auto [next, ancestry] = step_population(params, config, rng);
    const auto s = count_alleles(next);
    counts[static_cast<std::size_t>(s.a_count * (params.M + 1) + s.b_count)]++;
  }
  CHECK(sbcoal::test::chi_square_gof_pvalue(counts, table.prob, draws) > 0.001);
}

TEST_CASE("discrete generator is exact on first-moment functions") {
  const DiscreteParams params{12, 6, 3};  // K = 2
  const double c = 3.0, K = 2.0;
  for (std::int64_t a : {0L, 5L, 12L}) {
    for (std::int64_t b : {0L, 2L, 6L}) {
      const double x = a / 12.0, y = b / 6.0;
      const double gx = discrete_generator_exact(
          params, [](double xs, double) { return xs; }, {a, b}, 12.0);
      CHECK(gx == doctest::Approx(c * (y - x)).epsilon(1e-10));
      const double gy = discrete_generator_exact(
          params, [](double, double ys) { return ys; }, {a, b}, 12.0);
      CHECK(gy == doctest::Approx(c * K * (x - y)).epsilon(1e-10));
      const double gconst = discrete_generator_exact(
          params, [](double, double) { return 7.5; }, {a, b}, 12.0);
      CHECK(std::abs(gconst) < 1e-12);
    }
  }
}

TEST_CASE("discrete generator Monte Carlo mode brackets the exact value") {
  const DiscreteParams params{8, 8, 2};
  auto f = [](double xs, double ys) { return xs * xs + ys; };
  const FrequencyState state{3, 5};
  const double exact = discrete_generator_exact(params, f, state, 8.0);
  Xoshiro256 rng(777);
  const auto mc = discrete_generator_mc(params, f, state, 8.0, 20000, rng);
  CHECK(std::abs(mc.mean - exact) < 4.0 * mc.standard_error);
  CHECK_THROWS_AS(discrete_generator_mc(params, f, state, 8.0, 99, rng), std::domain_error);
}

TEST_CASE("enumeration size guard fires for oversized parameter sets") {
  CHECK_THROWS_AS(enumerate_transitions(DiscreteParams{4000, 4000, 3000}, FrequencyState{1, 1}),
                  std::length_error);
}

TEST_CASE("single lineage trace flips flags with the seed bank") {
  const DiscreteParams params{3, 2, 1};
  // Hand-built step: plant 0 <- plant 2, plant 1 <- plant 2, plant 2 <- seed 0;
  // seed slot 0 refilled by plant 1, seed 1 persists.
  GenerationAncestry gen;
  gen.plant_source = {{false, 2}, {false, 2}, {true, 0}};
  gen.seed_source = {{true, 1}, {false, 1}};
  gen.check_invariants(params);

  const std::vector<GenerationAncestry> history = {gen, gen};
  const std::vector<std::int64_t> lone = {2};
  const auto trace = extract_ancestral_process(params, history, lone);
  REQUIRE(trace.states.size() == 3);
  // Step back 1: plant 2 came from seed 0 (flag flips p -> s).
  CHECK(trace.states[1].partition.blocks[0].flag == coal::Flag::seed);
  CHECK(trace.step_stats[0].p_to_s == 1);
  // Step back 2: seed 0 was refilled by plant 1 (flag flips s -> p).
  CHECK(trace.states[2].partition.blocks[0].flag == coal::Flag::plant);
  CHECK(trace.step_stats[1].s_to_p == 1);
}

TEST_CASE("lineages with a shared plant parent merge after one step") {
  const DiscreteParams params{3, 2, 1};
  GenerationAncestry gen;
  gen.plant_source = {{false, 2}, {false, 2}, {true, 0}};
  gen.seed_source = {{true, 1}, {false, 1}};

  const std::vector<GenerationAncestry> history = {gen};
  const std::vector<std::int64_t> sample = {0, 1, 2};
  const auto trace = extract_ancestral_process(params, history, sample);
  REQUIRE(trace.states.size() == 2);
  const auto& parted = trace.states[1].partition;
  REQUIRE(parted.blocks.size() == 2);
  CHECK(parted.blocks[0].members == std::vector<int>{0, 1});
  CHECK(parted.blocks[0].flag == coal::Flag::plant);
  CHECK(parted.blocks[1].members == std::vector<int>{2});
  CHECK(parted.blocks[1].flag == coal::Flag::seed);
  CHECK(trace.step_stats[0].pp_pairs == 3);
  CHECK(trace.step_stats[0].pp_merges == 1);
  CHECK(trace.step_stats[0].p_to_s == 1);
}

TEST_CASE("extract_ancestral_process validates its sample") {
  const DiscreteParams params{3, 2, 1};
  const std::vector<GenerationAncestry> empty;
  CHECK_THROWS_AS(
      extract_ancestral_process(params, empty, std::vector<std::int64_t>{0, 0}),
      std::domain_error);
  CHECK_THROWS_AS(extract_ancestral_process(params, empty, std::vector<std::int64_t>{3}),
                  std::domain_error);
  CHECK_THROWS_AS(extract_ancestral_process(params, empty, std::vector<std::int64_t>{}),
                  std::domain_error);
}
