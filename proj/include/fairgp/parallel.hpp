#pragma once

#include <cstddef>
#include <functional>

namespace fairgp {

/// Runs fn(begin, end) over a contiguous split of [0, n). Each index is owned
/// by exactly one worker and inner loops run in fixed order, so results are
/// bitwise independent of the worker count.
void parallel_for_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Worker count used by parallel_for_rows (hardware concurrency, overridable
/// via the FAIRGP_THREADS environment variable).
unsigned worker_count();

}  // namespace fairgp
