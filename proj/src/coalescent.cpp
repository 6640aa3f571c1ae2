#include "sbcoal/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbcoal::coal {

int MarkedPartition::sample_size() const {
  std::size_t k = 0;
  for (const auto& b : blocks) k += b.members.size();
  return static_cast<int>(k);
}

std::pair<std::int64_t, std::int64_t> MarkedPartition::flag_counts() const {
  std::int64_t p = 0, s = 0;
  for (const auto& b : blocks) (b.flag == Flag::plant ? p : s) += 1;
  return {p, s};
}

void MarkedPartition::check_invariants() const {
  std::vector<int> seen;
  for (const auto& b : blocks) {
    if (b.members.empty()) throw std::logic_error("MarkedPartition: empty block");
    if (!std::is_sorted(b.members.begin(), b.members.end())) {
      throw std::logic_error("MarkedPartition: unsorted block members");
    }
    seen.insert(seen.end(), b.members.begin(), b.members.end());
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] != static_cast<int>(i)) {
      throw std::logic_error("MarkedPartition: blocks do not partition [k]");
    }
  }
  if (!colours.empty() && colours.size() != seen.size()) {
    throw std::logic_error("MarkedPartition: colour vector size mismatch");
  }
}

MarkedPartition init_partition(int n_plants, int m_seeds, bool with_colours) {
  if (n_plants < 0 || m_seeds < 0 || n_plants + m_seeds < 1) {
    throw std::domain_error("init_partition: need at least one individual");
  }
  MarkedPartition p;
  const int k = n_plants + m_seeds;
  p.blocks.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    p.blocks.push_back(Block{{i}, i < n_plants ? Flag::plant : Flag::seed});
  }
  if (with_colours) p.colours.assign(static_cast<std::size_t>(k), Colour::white);
  return p;
}

CoalescentEvent gillespie_step(const ScaledParams& params, MarkedPartition& partition,
                               Xoshiro256& rng) {
  const auto [np, ns] = partition.flag_counts();
  const double pair_rate = 0.5 * static_cast<double>(np) * static_cast<double>(np - 1);
  const double deact_rate = params.c * static_cast<double>(np);
  const double act_rate = params.c * params.K * static_cast<double>(ns);
  const double total = pair_rate + deact_rate + act_rate;
  if (total <= 0.0) {
    throw std::logic_error("gillespie_step: no transition has positive rate");
  }

  CoalescentEvent event;
  event.holding_time = exponential(rng, total);

  double u = uniform01(rng) * total;
  // Rounding can push u to the top of an empty interval; snap it back into
  // the last interval with positive rate.
  if (u >= pair_rate + deact_rate && act_rate <= 0.0) {
    u = pair_rate + 0.5 * deact_rate;
  }
  if (u < pair_rate) {
    // Merge a uniform pair of plant blocks; the merged block stays a plant.
    const std::int64_t pair_index = uniform_below(rng, np * (np - 1) / 2);
    // Map the flat pair index to the (a-th, b-th) plant blocks, a < b.
    std::int64_t a = 0, skipped = 0;
    while (pair_index >= skipped + (np - 1 - a)) {
      skipped += np - 1 - a;
      ++a;
    }
    const std::int64_t b = a + 1 + (pair_index - skipped);
    // Translate plant ordinals to block indices.
    int bi = -1, bj = -1;
    std::int64_t ordinal = 0;
    for (int i = 0; i < static_cast<int>(partition.blocks.size()); ++i) {
      if (partition.blocks[static_cast<std::size_t>(i)].flag != Flag::plant) continue;
      if (ordinal == a) bi = i;
      if (ordinal == b) bj = i;
      ++ordinal;
    }
    auto& keep = partition.blocks[static_cast<std::size_t>(bi)];
    auto& drop = partition.blocks[static_cast<std::size_t>(bj)];
    std::vector<int> merged;
    merged.reserve(keep.members.size() + drop.members.size());
    std::merge(keep.members.begin(), keep.members.end(), drop.members.begin(),
               drop.members.end(), std::back_inserter(merged));
    keep.members = std::move(merged);
    partition.blocks.erase(partition.blocks.begin() + bj);
    event.kind = CoalescentEvent::Kind::merge;
    event.block_i = bi;
    event.block_j = bj;
    return event;
  }

  if (u < pair_rate + deact_rate) {
    const std::int64_t which = uniform_below(rng, np);
    std::int64_t ordinal = 0;
    for (int i = 0; i < static_cast<int>(partition.blocks.size()); ++i) {
      auto& b = partition.blocks[static_cast<std::size_t>(i)];
      if (b.flag != Flag::plant) continue;
      if (ordinal == which) {
        b.flag = Flag::seed;
        event.kind = CoalescentEvent::Kind::deactivate;
        event.block_i = i;
        return event;
      }
      ++ordinal;
    }
  }

  const std::int64_t which = uniform_below(rng, ns);
  std::int64_t ordinal = 0;
  for (int i = 0; i < static_cast<int>(partition.blocks.size()); ++i) {
    auto& b = partition.blocks[static_cast<std::size_t>(i)];
    if (b.flag != Flag::seed) continue;
    if (ordinal == which) {
      b.flag = Flag::plant;
      if (partition.colouring_enabled()) {
        // Leaving the seed-bank colours every individual in the block blue.
        for (int member : b.members) {
          partition.colours[static_cast<std::size_t>(member)] = Colour::blue;
        }
      }
      event.kind = CoalescentEvent::Kind::activate;
      event.block_i = i;
      return event;
    }
    ++ordinal;
  }
  throw std::logic_error("gillespie_step: event selection fell through");
}

MrcaResult simulate_until_mrca(const ScaledParams& params, MarkedPartition partition,
                               Xoshiro256& rng, std::uint64_t max_events) {
  validate_scaled(params);
  partition.check_invariants();
  MrcaResult result;
  std::uint64_t events = 0;
  while (partition.blocks.size() > 1) {
    if (events++ >= max_events) {
      throw std::runtime_error("simulate_until_mrca: event budget exhausted");
    }
    CoalescentEvent ev = gillespie_step(params, partition, rng);
    result.t_mrca += ev.holding_time;
    result.history.push_back(ev);
  }
  return result;
}

CountTrajectory simulate_block_counting(const ScaledParams& params, BlockCounts counts0,
                                        double t_end, Xoshiro256& rng) {
  CountTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(counts0);
  run_block_counting(params, counts0, t_end, rng, [&](double t, BlockCounts s) {
    traj.times.push_back(t);
    traj.states.push_back(s);
  });
  return traj;
}

double block_counting_absorption_time(const ScaledParams& params, BlockCounts counts0,
                                      Xoshiro256& rng) {
  return run_block_counting(params, counts0, std::numeric_limits<double>::infinity(), rng,
                            [](double, BlockCounts) {});
}

BlockCounts block_counting_state_at(const ScaledParams& params, BlockCounts counts0, double t,
                                    Xoshiro256& rng) {
  BlockCounts last = counts0;
  run_block_counting(params, counts0, t, rng, [&](double, BlockCounts s) { last = s; });
  return last;
}

double single_lineage_plant_fraction(const ScaledParams& params, double t_end, Xoshiro256& rng) {
  // Two-state chain (1,0) <-> (0,1); integrate occupation of the plant state.
  bool plant = true;
  double t = 0.0, occupied = 0.0;
  while (t < t_end) {
    const double rate = plant ? params.c : params.c * params.K;
    const double hold = exponential(rng, rate);
    const double step = std::min(hold, t_end - t);
    if (plant) occupied += step;
    t += step;
    if (hold < t_end - (t - step)) plant = !plant;
  }
  return occupied / t_end;
}

WhiteCountResult simulate_white_counts(const ScaledParams& params, std::int64_t n0,
                                       Xoshiro256& rng) {
  if (n0 < 0) throw std::domain_error("simulate_white_counts: n0 must be >= 0");
  WhiteCountResult result;
  BlockCounts s{n0, 0};
  double t = 0.0;
  while (s.n + s.m > 1) {
    const double merge_rate = 0.5 * static_cast<double>(s.n) * static_cast<double>(s.n - 1);
    const double deact_rate = params.c * static_cast<double>(s.n);
    const double act_rate = params.c * params.K * static_cast<double>(s.m);
    const double total = merge_rate + deact_rate + act_rate;
    if (total <= 0.0) break;
    t += exponential(rng, total);
    const double u = uniform01(rng) * total;
    if (u < merge_rate) {
      s.n -= 1;
    } else if (u < merge_rate + deact_rate || act_rate <= 0.0) {
      if (s.n >= 2) result.deactivations += 1;
      s.n -= 1;
      s.m += 1;
    } else {
      s.m -= 1;  // white seed activates, turns blue, leaves the white system
    }
  }
  result.final_time = t;
  result.final_counts = s;
  return result;
}

double expected_deactivations(double c, std::int64_t n) {
  if (!(c > 0.0)) throw std::domain_error("expected_deactivations: c must be positive");
  if (n < 2) throw std::domain_error("expected_deactivations: n must be >= 2");
  double sum = 0.0;
  for (std::int64_t k = n; k >= 2; --k) {
    sum += 2.0 * c / (static_cast<double>(k) + 2.0 * c - 1.0);
  }
  return sum;
}

double bounded_counts_absorption_time(const ScaledParams& params, BlockCounts counts0,
                                      Xoshiro256& rng) {
  return run_bounded_counts(params, counts0, std::numeric_limits<double>::infinity(), rng,
                            [](double, BlockCounts) {});
}

BlockCounts bounded_counts_state_at(const ScaledParams& params, BlockCounts counts0, double t,
                                    Xoshiro256& rng) {
  BlockCounts last = counts0;
  run_bounded_counts(params, counts0, t, rng, [&](double, BlockCounts s) { last = s; });
  return last;
}

std::int64_t kingman_count_at(std::int64_t n0, double t, Xoshiro256& rng) {
  if (n0 < 1) throw std::domain_error("kingman_count_at: n0 must be >= 1");
  std::int64_t n = n0;
  double elapsed = 0.0;
  while (n > 1) {
    const double rate = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    elapsed += exponential(rng, rate);
    if (elapsed >= t) break;
    --n;
  }
  return n;
}

CountTrajectory simulate_kingman_counts(std::int64_t n0, double t_end, Xoshiro256& rng) {
  if (n0 < 1) throw std::domain_error("simulate_kingman_counts: n0 must be >= 1");
  CountTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(BlockCounts{n0, 0});
  std::int64_t n = n0;
  double t = 0.0;
  while (n > 1) {
    const double rate = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    t += exponential(rng, rate);
    if (t >= t_end) break;
    --n;
    traj.times.push_back(t);
    traj.states.push_back(BlockCounts{n, 0});
  }
  return traj;
}

}  // namespace sbcoal::coal
