#include "sbcoal/forward_wf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sbcoal::wf {

PopulationConfig make_config(const DiscreteParams& params, std::int64_t plant_a_count,
                             std::int64_t seed_a_count) {
  if (plant_a_count < 0 || plant_a_count > params.N || seed_a_count < 0 ||
      seed_a_count > params.M) {
    throw std::domain_error("make_config: allele counts outside [0,N] x [0,M]");
  }
  PopulationConfig config;
  config.plant_types.assign(static_cast<std::size_t>(params.N), Allele::A);
  config.seed_types.assign(static_cast<std::size_t>(params.M), Allele::A);
  for (std::int64_t i = 0; i < plant_a_count; ++i) {
    config.plant_types[static_cast<std::size_t>(i)] = Allele::a;
  }
  for (std::int64_t j = 0; j < seed_a_count; ++j) {
    config.seed_types[static_cast<std::size_t>(j)] = Allele::a;
  }
  return config;
}

void GenerationAncestry::check_invariants(const DiscreteParams& params) const {
  if (static_cast<std::int64_t>(plant_source.size()) != params.N ||
      static_cast<std::int64_t>(seed_source.size()) != params.M) {
    throw std::logic_error("GenerationAncestry: size mismatch");
  }
  std::vector<bool> germinated(static_cast<std::size_t>(params.M), false);
  std::int64_t from_seed = 0;
  for (const auto& src : plant_source) {
    if (src.from_seed) {
      ++from_seed;
      if (src.index < 0 || src.index >= params.M) {
        throw std::logic_error("GenerationAncestry: germinated seed index out of range");
      }
      if (germinated[static_cast<std::size_t>(src.index)]) {
        throw std::logic_error("GenerationAncestry: duplicate germinated seed");
      }
      germinated[static_cast<std::size_t>(src.index)] = true;
    } else if (src.index < 0 || src.index >= params.N) {
      throw std::logic_error("GenerationAncestry: plant parent index out of range");
    }
  }
  if (from_seed != params.c) {
    throw std::logic_error("GenerationAncestry: expected exactly c germinated seeds");
  }
  std::int64_t from_plant = 0;
  for (std::int64_t j = 0; j < params.M; ++j) {
    const auto& src = seed_source[static_cast<std::size_t>(j)];
    if (src.from_plant) {
      ++from_plant;
      if (!germinated[static_cast<std::size_t>(j)]) {
        throw std::logic_error("GenerationAncestry: new seed in a non-vacated slot");
      }
      if (src.index < 0 || src.index >= params.N) {
        throw std::logic_error("GenerationAncestry: producing plant index out of range");
      }
    } else if (src.index != j) {
      throw std::logic_error("GenerationAncestry: persisting seed must stay in place");
    }
  }
  if (from_plant != params.c) {
    throw std::logic_error("GenerationAncestry: expected exactly c new seeds");
  }
}

std::pair<PopulationConfig, GenerationAncestry> step_population(const DiscreteParams& params,
                                                                const PopulationConfig& config,
                                                                Xoshiro256& rng) {
  validate_discrete(params);
  if (static_cast<std::int64_t>(config.plant_types.size()) != params.N ||
      static_cast<std::int64_t>(config.seed_types.size()) != params.M) {
    throw std::domain_error("step_population: config sizes do not match params");
  }
  const std::int64_t N = params.N, M = params.M, c = params.c;

  GenerationAncestry ancestry;
  ancestry.plant_source.resize(static_cast<std::size_t>(N));

  // Pick the c germinating seeds without replacement (partial Fisher-Yates).
  std::vector<std::int64_t> seed_ids(static_cast<std::size_t>(M));
  std::iota(seed_ids.begin(), seed_ids.end(), 0);
  for (std::int64_t i = 0; i < c; ++i) {
    const std::int64_t j = i + uniform_below(rng, M - i);
    std::swap(seed_ids[static_cast<std::size_t>(i)], seed_ids[static_cast<std::size_t>(j)]);
  }

  // N-c slots copy uniform plants; the last c slots take the germinating
  // seeds, then everything is shuffled so the placement is exchangeable.
  for (std::int64_t i = 0; i < N - c; ++i) {
    ancestry.plant_source[static_cast<std::size_t>(i)] =
        PlantSource{false, uniform_below(rng, N)};
  }
  for (std::int64_t i = 0; i < c; ++i) {
    ancestry.plant_source[static_cast<std::size_t>(N - c + i)] =
        PlantSource{true, seed_ids[static_cast<std::size_t>(i)]};
  }
  for (std::int64_t i = N - 1; i > 0; --i) {
    const std::int64_t j = uniform_below(rng, i + 1);
    std::swap(ancestry.plant_source[static_cast<std::size_t>(i)],
              ancestry.plant_source[static_cast<std::size_t>(j)]);
  }

  // Vacated seed slots are refilled by uniform plants; the rest persist.
  ancestry.seed_source.resize(static_cast<std::size_t>(M));
  for (std::int64_t j = 0; j < M; ++j) {
    ancestry.seed_source[static_cast<std::size_t>(j)] = SeedSource{false, j};
  }
  for (std::int64_t i = 0; i < c; ++i) {
    const std::int64_t vacated = seed_ids[static_cast<std::size_t>(i)];
    ancestry.seed_source[static_cast<std::size_t>(vacated)] =
        SeedSource{true, uniform_below(rng, N)};
  }

  PopulationConfig next;
  next.plant_types.resize(static_cast<std::size_t>(N));
  next.seed_types.resize(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < N; ++i) {
    const auto& src = ancestry.plant_source[static_cast<std::size_t>(i)];
    next.plant_types[static_cast<std::size_t>(i)] =
        src.from_seed ? config.seed_types[static_cast<std::size_t>(src.index)]
                      : config.plant_types[static_cast<std::size_t>(src.index)];
  }
  for (std::int64_t j = 0; j < M; ++j) {
    const auto& src = ancestry.seed_source[static_cast<std::size_t>(j)];
    next.seed_types[static_cast<std::size_t>(j)] =
        src.from_plant ? config.plant_types[static_cast<std::size_t>(src.index)]
                       : config.seed_types[static_cast<std::size_t>(src.index)];
  }
  return {std::move(next), std::move(ancestry)};
}

FrequencyState count_alleles(const PopulationConfig& config) {
  FrequencyState s;
  for (Allele t : config.plant_types) s.a_count += (t == Allele::a) ? 1 : 0;
  for (Allele t : config.seed_types) s.b_count += (t == Allele::a) ? 1 : 0;
  return s;
}

namespace {

void check_state(const DiscreteParams& params, FrequencyState s, const char* where) {
  if (s.a_count < 0 || s.a_count > params.N || s.b_count < 0 || s.b_count > params.M) {
    throw std::domain_error(std::string(where) + ": state outside the lattice");
  }
}

}  // namespace

FrequencyState step_frequency(const DiscreteParams& params, FrequencyState state,
                              Xoshiro256& rng) {
  check_state(params, state, "step_frequency");
  const double x = static_cast<double>(state.a_count) / static_cast<double>(params.N);
  const std::int64_t z = hypergeometric(rng, params.M, params.c, state.b_count);
  const std::int64_t u = binomial(rng, params.N - params.c, x);
  const std::int64_t v = binomial(rng, params.c, x);
  return FrequencyState{u + z, state.b_count + v - z};
}

double transition_pmf(const DiscreteParams& params, FrequencyState from, FrequencyState to) {
  check_state(params, from, "transition_pmf");
  if (to.a_count < 0 || to.a_count > params.N || to.b_count < 0 || to.b_count > params.M) {
    return 0.0;
  }
  const double x = static_cast<double>(from.a_count) / static_cast<double>(params.N);
  const auto hyp = hypergeometric_pmf(params.M, params.c, from.b_count);
  const auto ubin = binomial_pmf(params.N - params.c, x);
  const auto vbin = binomial_pmf(params.c, x);

  double p = 0.0;
  for (std::int64_t i = 0; i <= params.c; ++i) {
    const std::int64_t u_needed = to.a_count - i;
    const std::int64_t v_needed = (to.b_count - from.b_count) + i;
    if (u_needed < 0 || u_needed > params.N - params.c) continue;
    if (v_needed < 0 || v_needed > params.c) continue;
    p += hyp[static_cast<std::size_t>(i)] * ubin[static_cast<std::size_t>(u_needed)] *
         vbin[static_cast<std::size_t>(v_needed)];
  }
  return p;
}

namespace {

constexpr std::int64_t kEnumerationTermGuard = 10000000;

void check_enumeration_guard(const DiscreteParams& params) {
  const std::int64_t terms = (params.c + 1) * (params.c + 1) * (params.N - params.c + 1);
  if (terms > kEnumerationTermGuard) {
    throw std::length_error("enumeration guard: " + std::to_string(terms) +
                            " (Z,U,V) terms exceed the 1e7 limit");
  }
}

// Calls visit(a', b', probability) for every (Z,U,V) outcome.
template <class Visit>
void for_each_transition(const DiscreteParams& params, FrequencyState from, Visit&& visit) {
  const double x = static_cast<double>(from.a_count) / static_cast<double>(params.N);
  const auto hyp = hypergeometric_pmf(params.M, params.c, from.b_count);
  const auto ubin = binomial_pmf(params.N - params.c, x);
  const auto vbin = binomial_pmf(params.c, x);
  for (std::int64_t z = 0; z <= params.c; ++z) {
    const double pz = hyp[static_cast<std::size_t>(z)];
    if (pz == 0.0) continue;
    for (std::int64_t v = 0; v <= params.c; ++v) {
      const double pzv = pz * vbin[static_cast<std::size_t>(v)];
      if (pzv == 0.0) continue;
      for (std::int64_t u = 0; u <= params.N - params.c; ++u) {
        const double p = pzv * ubin[static_cast<std::size_t>(u)];
        if (p == 0.0) continue;
        visit(u + z, from.b_count + v - z, p);
      }
    }
  }
}

}  // namespace

TransitionTable enumerate_transitions(const DiscreteParams& params, FrequencyState from) {
  check_state(params, from, "enumerate_transitions");
  check_enumeration_guard(params);
  const std::int64_t cells = (params.N + 1) * (params.M + 1);
  if (cells > 2 * kEnumerationTermGuard) {
    throw std::length_error("enumeration guard: transition table would hold " +
                            std::to_string(cells) + " cells");
  }
  TransitionTable table;
  table.n_plants = params.N;
  table.m_seeds = params.M;
  table.prob.assign(static_cast<std::size_t>(cells), 0.0);
  for_each_transition(params, from, [&](std::int64_t a, std::int64_t b, double p) {
    table.prob[static_cast<std::size_t>(a * (params.M + 1) + b)] += p;
  });
  return table;
}

double discrete_generator_exact(const DiscreteParams& params,
                                const std::function<double(double, double)>& f,
                                FrequencyState state, double timescale) {
  check_state(params, state, "discrete_generator_exact");
  check_enumeration_guard(params);
  const double x = static_cast<double>(state.a_count) / static_cast<double>(params.N);
  const double y = static_cast<double>(state.b_count) / static_cast<double>(params.M);
  const double f0 = f(x, y);
  double acc = 0.0;
  for_each_transition(params, state, [&](std::int64_t a, std::int64_t b, double p) {
    const double xs = static_cast<double>(a) / static_cast<double>(params.N);
    const double ys = static_cast<double>(b) / static_cast<double>(params.M);
    acc += p * (f(xs, ys) - f0);
  });
  return timescale * acc;
}

SummaryStats discrete_generator_mc(const DiscreteParams& params,
                                   const std::function<double(double, double)>& f,
                                   FrequencyState state, double timescale,
                                   std::int64_t replicates, Xoshiro256& rng) {
  if (replicates < 100) {
    throw std::domain_error("discrete_generator_mc: need at least 100 replicates");
  }
  check_state(params, state, "discrete_generator_mc");
  const double x = static_cast<double>(state.a_count) / static_cast<double>(params.N);
  const double y = static_cast<double>(state.b_count) / static_cast<double>(params.M);
  const double f0 = f(x, y);
  std::vector<double> samples(static_cast<std::size_t>(replicates));
  for (auto& sample : samples) {
    const FrequencyState next = step_frequency(params, state, rng);
    const double xs = static_cast<double>(next.a_count) / static_cast<double>(params.N);
    const double ys = static_cast<double>(next.b_count) / static_cast<double>(params.M);
    sample = timescale * (f(xs, ys) - f0);
  }
  return summarize(samples);
}

namespace {

struct TracedBlock {
  std::vector<int> members;  // sorted
  bool at_plant = true;
  std::int64_t slot = 0;
};

coal::MarkedPartition snapshot(const std::vector<TracedBlock>& blocks) {
  coal::MarkedPartition p;
  p.blocks.reserve(blocks.size());
  for (const auto& b : blocks) {
    p.blocks.push_back(
        coal::Block{b.members, b.at_plant ? coal::Flag::plant : coal::Flag::seed});
  }
  return p;
}

}  // namespace

AncestryTrace extract_ancestral_process(const DiscreteParams& params,
                                        std::span<const GenerationAncestry> ancestries,
                                        std::span<const std::int64_t> sample_plants) {
  validate_discrete(params);
  if (sample_plants.empty()) {
    throw std::domain_error("extract_ancestral_process: empty sample");
  }
  std::vector<std::int64_t> sorted(sample_plants.begin(), sample_plants.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::domain_error("extract_ancestral_process: sample indices must be distinct");
  }
  if (sorted.front() < 0 || sorted.back() >= params.N) {
    throw std::domain_error("extract_ancestral_process: sample index outside [0,N)");
  }

  std::vector<TracedBlock> blocks;
  blocks.reserve(sample_plants.size());
  for (std::size_t i = 0; i < sample_plants.size(); ++i) {
    blocks.push_back(TracedBlock{{static_cast<int>(i)}, true, sample_plants[i]});
  }

  AncestryTrace trace;
  const std::int64_t present = static_cast<std::int64_t>(ancestries.size());
  trace.states.push_back(SampleGenealogyState{snapshot(blocks), present});

  for (std::int64_t step = present - 1; step >= 0; --step) {
    const GenerationAncestry& gen = ancestries[static_cast<std::size_t>(step)];
    if (static_cast<std::int64_t>(gen.plant_source.size()) != params.N ||
        static_cast<std::int64_t>(gen.seed_source.size()) != params.M) {
      throw std::logic_error("extract_ancestral_process: inconsistent ancestry arrays");
    }

    AncestryStepStats stats;
    for (const auto& b : blocks) (b.at_plant ? stats.p_blocks : stats.s_blocks) += 1;
    stats.pp_pairs = stats.p_blocks * (stats.p_blocks - 1) / 2;

    // Move every block one generation back.
    std::vector<bool> was_plant(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      auto& b = blocks[i];
      was_plant[i] = b.at_plant;
      if (b.at_plant) {
        const PlantSource& src = gen.plant_source[static_cast<std::size_t>(b.slot)];
        b.at_plant = !src.from_seed;
        b.slot = src.index;
      } else {
        const SeedSource& src = gen.seed_source[static_cast<std::size_t>(b.slot)];
        b.at_plant = src.from_plant;
        b.slot = src.from_plant ? src.index : b.slot;
      }
      if (was_plant[i] && !b.at_plant) stats.p_to_s += 1;
      if (!was_plant[i] && b.at_plant) stats.s_to_p += 1;
    }

    // Merge blocks that met in the same plant slot. Distinct blocks can never
    // share a seed slot: germinating seeds are drawn without replacement and
    // persisting seeds stay in place.
    std::vector<TracedBlock> merged;
    std::vector<std::int64_t> merged_was_p;  // count of was-plant blocks folded in
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      auto& b = blocks[i];
      bool folded = false;
      for (std::size_t j = 0; j < merged.size(); ++j) {
        if (merged[j].slot != b.slot || merged[j].at_plant != b.at_plant) continue;
        if (!b.at_plant) {
          throw std::logic_error("extract_ancestral_process: two blocks in one seed slot");
        }
        stats.pp_merges += was_plant[i] ? merged_was_p[j] : 0;
        merged_was_p[j] += was_plant[i] ? 1 : 0;
        std::vector<int> m;
        m.reserve(merged[j].members.size() + b.members.size());
        std::merge(merged[j].members.begin(), merged[j].members.end(), b.members.begin(),
                   b.members.end(), std::back_inserter(m));
        merged[j].members = std::move(m);
        folded = true;
        break;
      }
      if (!folded) {
        merged.push_back(std::move(b));
        merged_was_p.push_back(was_plant[i] ? 1 : 0);
      }
    }
    blocks = std::move(merged);

    trace.step_stats.push_back(stats);
    trace.states.push_back(SampleGenealogyState{snapshot(blocks), step});
  }
  return trace;
}

}  // namespace sbcoal::wf
