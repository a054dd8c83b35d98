#pragma once

#include <cstdint>
#include <functional>

namespace ebvs {

// Worker count: EBVS_THREADS when set (>=1), otherwise hardware concurrency.
int worker_count();

// Static-partition parallel map over [0, n): body(i) runs exactly once per
// index; exceptions are captured and the first one rethrown after join.
// Callers own output slots per index, so results never depend on schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Deterministic per-task seed stream: splitmix64 over (seed, index, tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0);

}  // namespace ebvs
