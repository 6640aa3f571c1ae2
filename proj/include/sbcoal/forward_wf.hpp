#ifndef SBCOAL_FORWARD_WF_HPP
#define SBCOAL_FORWARD_WF_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sbcoal/coalescent.hpp"
#include "sbcoal/params.hpp"
#include "sbcoal/rng.hpp"
#include "sbcoal/stats.hpp"

namespace sbcoal::wf {

enum class Allele : unsigned char { a, A };

struct PopulationConfig {
  std::vector<Allele> plant_types;  // size N
  std::vector<Allele> seed_types;   // size M
};

// All-a plants/seeds except the given counts of A... see make_config.
PopulationConfig make_config(const DiscreteParams& params, std::int64_t plant_a_count,
                             std::int64_t seed_a_count);

// Integer allele-a counts; (x, y) = (a_count/N, b_count/M) on the lattice.
struct FrequencyState {
  std::int64_t a_count = 0;
  std::int64_t b_count = 0;
};

// Where each slot of the next generation copies its type from.
// plant_source[i]: either a parent plant (from_seed = false, index in [0,N))
// or a germinating seed (from_seed = true, index in [0,M)).
// seed_source[j]: either a producing plant (from_plant = true) or the
// persisting seed itself (from_plant = false, index == j).
struct PlantSource {
  bool from_seed = false;
  std::int64_t index = 0;
};
struct SeedSource {
  bool from_plant = false;
  std::int64_t index = 0;
};
struct GenerationAncestry {
  std::vector<PlantSource> plant_source;
  std::vector<SeedSource> seed_source;

  void check_invariants(const DiscreteParams& params) const;
};

// One forward generation: N-c plant slots copy a uniform plant (with
// replacement), c slots take distinct uniformly chosen germinating seeds,
// the vacated seed slots are refilled by uniform plants, and the other M-c
// seeds persist in place. Germinating slots are assigned by shuffling so the
// placement is exchangeable.
std::pair<PopulationConfig, GenerationAncestry> step_population(const DiscreteParams& params,
                                                                const PopulationConfig& config,
                                                                Xoshiro256& rng);

FrequencyState count_alleles(const PopulationConfig& config);

// One step of the exact bi-allelic frequency chain:
// Z ~ Hyp(M, c, b), U ~ Bin(N-c, a/N), V ~ Bin(c, a/N),
// a' = U + Z, b' = b + V - Z.
FrequencyState step_frequency(const DiscreteParams& params, FrequencyState state,
                              Xoshiro256& rng);

// P(state -> to) in one step: sum over the germinating-seed count i of
// P(Z=i) P(U = a'-i) P(V = (b'-b)+i). Returns 0 for unreachable states.
double transition_pmf(const DiscreteParams& params, FrequencyState from, FrequencyState to);

struct TransitionTable {
  // Probabilities indexed by a' * (M+1) + b'; zero entries included.
  std::vector<double> prob;
  std::int64_t n_plants = 0, m_seeds = 0;

  double at(std::int64_t a, std::int64_t b) const {
    return prob[static_cast<std::size_t>(a * (m_seeds + 1) + b)];
  }
};

// Exhaustive one-step law by summation over the (Z, U, V) support.
// Throws std::length_error when (c+1)^2 (N-c+1) exceeds the 1e7 term guard.
TransitionTable enumerate_transitions(const DiscreteParams& params, FrequencyState from);

// D * sum_s p(state->s) (f(s) - f(state)) by exact enumeration.
double discrete_generator_exact(const DiscreteParams& params,
                                const std::function<double(double, double)>& f,
                                FrequencyState state, double timescale);

// Monte Carlo estimate of the same quantity; replicates >= 100.
SummaryStats discrete_generator_mc(const DiscreteParams& params,
                                   const std::function<double(double, double)>& f,
                                   FrequencyState state, double timescale,
                                   std::int64_t replicates, Xoshiro256& rng);

// Partition of a traced sample plus the generation it refers to.
struct SampleGenealogyState {
  coal::MarkedPartition partition;
  std::int64_t generation = 0;
};

// Per backward step: how many blocks/pairs could produce each event kind and
// how many did. Merge counting is restricted to pairs that were both plants
// before the step.
struct AncestryStepStats {
  std::int64_t p_blocks = 0, s_blocks = 0;  // before the step
  std::int64_t pp_pairs = 0;
  std::int64_t pp_merges = 0;
  std::int64_t p_to_s = 0;
  std::int64_t s_to_p = 0;
};

struct AncestryTrace {
  std::vector<SampleGenealogyState> states;   // newest generation first
  std::vector<AncestryStepStats> step_stats;  // one entry per backward step
};

// Traces the sampled plant lineages backwards through the recorded
// ancestries (ancestries[0] = oldest step). Blocks merge when lineages meet
// in the same plant slot; flags track the current location.
AncestryTrace extract_ancestral_process(const DiscreteParams& params,
                                        std::span<const GenerationAncestry> ancestries,
                                        std::span<const std::int64_t> sample_plants);

}  // namespace sbcoal::wf

#endif
