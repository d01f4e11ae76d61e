#ifndef SSM_PARALLEL_HPP
#define SSM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace ssm {

/// Worker cap: SSM_SMC_THREADS when set to a positive integer, otherwise the
/// hardware parallelism (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// visited exactly once; the first exception thrown is rethrown after all
/// workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t workers = worker_count());

}  // namespace ssm

#endif  // SSM_PARALLEL_HPP
