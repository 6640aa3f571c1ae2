#ifndef SBCOAL_PARALLEL_HPP
#define SBCOAL_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "sbcoal/rng.hpp"

namespace sbcoal {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(replicate_index, rng) for indices 0..replicates-1 across a worker
// pool. Each replicate owns the stream derived from (master_seed,
// stream_offset + index), so results do not depend on scheduling; the output
// vector is ordered by replicate index.
template <class T, class Fn>
std::vector<T> parallel_replicates(std::int64_t replicates, std::uint64_t master_seed,
                                   std::uint64_t stream_offset, int threads, Fn fn) {
  std::vector<T> results(static_cast<std::size_t>(replicates));
  const int nthreads = std::min<std::int64_t>(resolve_threads(threads), replicates);
  if (nthreads <= 1) {
    for (std::int64_t i = 0; i < replicates; ++i) {
      Xoshiro256 rng = ReplicateSeed{master_seed, stream_offset + static_cast<std::uint64_t>(i)}
                           .make_rng();
      results[static_cast<std::size_t>(i)] = fn(i, rng);
    }
    return results;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= replicates) return;
      try {
        Xoshiro256 rng =
            ReplicateSeed{master_seed, stream_offset + static_cast<std::uint64_t>(i)}.make_rng();
        results[static_cast<std::size_t>(i)] = fn(i, rng);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(replicates);  // drain remaining work
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace sbcoal

#endif
