#pragma once

#include <cstddef>
#include <functional>

namespace dnf {

/// Name of the environment variable that caps the worker count.
inline constexpr const char* kThreadEnvVar = "DNF_ROM_THREADS";

/// Worker count from DNF_ROM_THREADS, or the hardware concurrency when unset.
int configured_thread_count();

/**
 * Runs body(i) for i in [0, n) on the configured worker pool.
 *
 * Each index must write only to storage it owns; callers reduce the
 * per-index results afterwards in index order, which keeps floating-point
 * sums independent of scheduling.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dnf
