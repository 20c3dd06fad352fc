#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace nclab {

/// Worker count: NCLAB_THREADS if set to a positive integer, else hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [0, n) on up to thread_count() threads. Each index is visited
/// exactly once; callers write results into per-index slots so output is order-free.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Pairwise (cascade) summation; result depends only on the element order.
double pairwise_sum(std::span<const double> values);

/// splitmix64 finalizer; used to derive independent seeds from (master, index).
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

}  // namespace nclab
