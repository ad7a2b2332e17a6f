#pragma once

#include <cstddef>
#include <functional>

namespace stou {

/// Worker count from STOU_WORKERS, else 1.
unsigned default_workers() noexcept;

/// Runs body(i) for i in [0, n) on up to `workers` threads. Indices are
/// handed out dynamically; callers write results into slot i so that the
/// outcome never depends on scheduling. If any body throws, the exception
/// of the smallest failing index is rethrown after all threads join.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace stou
