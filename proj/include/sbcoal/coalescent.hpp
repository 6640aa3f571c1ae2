#ifndef SBCOAL_COALESCENT_HPP
#define SBCOAL_COALESCENT_HPP

#include <cstdint>
#include <vector>

#include "sbcoal/params.hpp"
#include "sbcoal/rng.hpp"

namespace sbcoal::coal {

enum class Flag : unsigned char { plant, seed };
enum class Colour : unsigned char { white, blue };

struct Block {
  std::vector<int> members;  // sorted, 0-based individual labels
  Flag flag = Flag::plant;
};

// Partition of a k-sample where every block carries a plant/seed flag.
// Colours, when enabled, decorate individuals: an individual turns blue the
// first time its block leaves the seed-bank.
struct MarkedPartition {
  std::vector<Block> blocks;
  std::vector<Colour> colours;  // size k when colouring enabled, else empty

  int sample_size() const;
  bool colouring_enabled() const { return !colours.empty(); }
  // (number of plant blocks, number of seed blocks)
  std::pair<std::int64_t, std::int64_t> flag_counts() const;
  // Throws std::logic_error if blocks are not a partition of [k] or a block
  // is empty/unsorted.
  void check_invariants() const;
};

// Singletons {0},...,{k-1}; the first n_plants carry the plant flag, the rest
// the seed flag. Colours (when enabled) start all white.
MarkedPartition init_partition(int n_plants, int m_seeds, bool with_colours = false);

struct CoalescentEvent {
  enum class Kind : unsigned char { merge, deactivate, activate };
  Kind kind;
  int block_i = -1;  // merge: lower block index; flips: the flipped block
  int block_j = -1;  // merge only
  double holding_time = 0.0;
};

// One transition of the seed-bank k-coalescent: each plant pair merges at
// rate 1, each plant block deactivates at rate c, each seed block activates
// at rate cK. Mutates the partition and returns the event. Throws
// std::logic_error if no transition has positive rate.
CoalescentEvent gillespie_step(const ScaledParams& params, MarkedPartition& partition,
                               Xoshiro256& rng);

struct MrcaResult {
  double t_mrca = 0.0;
  std::vector<CoalescentEvent> history;
};

// Runs gillespie_step until a single block remains. k = 1 returns t = 0.
MrcaResult simulate_until_mrca(const ScaledParams& params, MarkedPartition partition,
                               Xoshiro256& rng, std::uint64_t max_events = 1000000000ULL);

struct BlockCounts {
  std::int64_t n = 0;  // plant blocks
  std::int64_t m = 0;  // seed blocks
};

struct CountTrajectory {
  std::vector<double> times;  // event times, starting at 0
  std::vector<BlockCounts> states;
};

// Block-counting chain: (n,m) -> (n-1,m+1) at cn, (n+1,m-1) at cKm,
// (n-1,m) at n(n-1)/2. Runs until n+m == 1 or t_end, whichever first.
// Observer is called as obs(t, counts) after every jump; returns final time.
template <class Observer>
double run_block_counting(const ScaledParams& params, BlockCounts counts, double t_end,
                          Xoshiro256& rng, Observer&& obs);

CountTrajectory simulate_block_counting(const ScaledParams& params, BlockCounts counts0,
                                        double t_end, Xoshiro256& rng);

// Time until n+m == 1 (no trajectory kept).
double block_counting_absorption_time(const ScaledParams& params, BlockCounts counts0,
                                      Xoshiro256& rng);

// State at time t (chain frozen at absorption).
BlockCounts block_counting_state_at(const ScaledParams& params, BlockCounts counts0, double t,
                                    Xoshiro256& rng);

// Fraction of [0, t_end] a single lineage started as a plant spends in the
// plant state.
double single_lineage_plant_fraction(const ScaledParams& params, double t_end, Xoshiro256& rng);

// White-count chain of the coloured coalescent: only never-activated lineages
// are tracked, so activation discards the block. Transitions from (n,m):
//   (n-1,m)   at n(n-1)/2   merge
//   (n-1,m+1) at cn         deactivation
//   (n,m-1)   at cKm        activation: the block turns blue and drops out
// Runs until n+m <= 1. `deactivations` counts only the deactivations that
// happen while n >= 2, matching the per-level merge/deactivation race whose
// success probabilities are 2c/(j+2c-1) for j = n0..2.
struct WhiteCountResult {
  std::int64_t deactivations = 0;
  double final_time = 0.0;
  BlockCounts final_counts;
};
WhiteCountResult simulate_white_counts(const ScaledParams& params, std::int64_t n0,
                                       Xoshiro256& rng);

// Sum_{k=2}^{n} 2c/(k+2c-1), the expected deactivation count above.
double expected_deactivations(double c, std::int64_t n);

// Bounding chain: same rates as block counting but coalescence is suppressed
// unless n >= ceil(sqrt(n+m)). Runs until n+m == 1 or t_end.
template <class Observer>
double run_bounded_counts(const ScaledParams& params, BlockCounts counts, double t_end,
                          Xoshiro256& rng, Observer&& obs);

double bounded_counts_absorption_time(const ScaledParams& params, BlockCounts counts0,
                                      Xoshiro256& rng);
BlockCounts bounded_counts_state_at(const ScaledParams& params, BlockCounts counts0, double t,
                                    Xoshiro256& rng);

// Kingman baseline: pure death at rate n(n-1)/2.
std::int64_t kingman_count_at(std::int64_t n0, double t, Xoshiro256& rng);
CountTrajectory simulate_kingman_counts(std::int64_t n0, double t_end, Xoshiro256& rng);

// ---- template definitions ----

namespace detail {

// Shared CTMC loop. merge_allowed(n, m) gates the coalescence rate.
template <class Observer, class MergeGate>
double run_counts_ctmc(const ScaledParams& params, BlockCounts s, double t_end, Xoshiro256& rng,
                       Observer&& obs, MergeGate&& merge_allowed) {
  double t = 0.0;
  while (s.n + s.m > 1) {
    const double merge_rate =
        merge_allowed(s.n, s.m) ? 0.5 * static_cast<double>(s.n) * static_cast<double>(s.n - 1)
                                : 0.0;
    const double deact_rate = params.c * static_cast<double>(s.n);
    const double act_rate = params.c * params.K * static_cast<double>(s.m);
    const double total = merge_rate + deact_rate + act_rate;
    if (total <= 0.0) break;  // unreachable for c > 0
    const double dt = exponential(rng, total);
    if (t + dt >= t_end) return t_end;
    t += dt;
    const double u = uniform01(rng) * total;
    // The act branch guards act_rate > 0: rounding of u can otherwise land in
    // an empty interval. When act_rate is 0, n >= 2 so deactivation is valid.
    if (u < merge_rate) {
      s.n -= 1;
    } else if (u < merge_rate + deact_rate || act_rate <= 0.0) {
      s.n -= 1;
      s.m += 1;
    } else {
      s.n += 1;
      s.m -= 1;
    }
    obs(t, s);
  }
  return t;
}

}  // namespace detail

template <class Observer>
double run_block_counting(const ScaledParams& params, BlockCounts counts, double t_end,
                          Xoshiro256& rng, Observer&& obs) {
  return detail::run_counts_ctmc(params, counts, t_end, rng, std::forward<Observer>(obs),
                                 [](std::int64_t, std::int64_t) { return true; });
}

template <class Observer>
double run_bounded_counts(const ScaledParams& params, BlockCounts counts, double t_end,
                          Xoshiro256& rng, Observer&& obs) {
  auto gate = [](std::int64_t n, std::int64_t m) {
    // n >= ceil(sqrt(n+m)) is exactly n^2 >= n+m for integers.
    return n * n >= n + m;
  };
  return detail::run_counts_ctmc(params, counts, t_end, rng, std::forward<Observer>(obs), gate);
}

}  // namespace sbcoal::coal

#endif
