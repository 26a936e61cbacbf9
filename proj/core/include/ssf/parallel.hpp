#pragma once

#include <functional>

namespace ssf {

/// Maps jobs<=0 to the hardware thread count (at least 1).
int resolve_jobs(int jobs);

/// Runs fn over [begin, end) split into at most `jobs` contiguous chunks,
/// one thread per chunk. fn receives half-open [chunk_begin, chunk_end).
/// Chunk boundaries depend only on (begin, end, jobs), so callers that keep
/// writes disjoint per index stay deterministic for any job count.
void parallel_chunks(int begin, int end, int jobs,
                     const std::function<void(int, int)>& fn);

} // namespace ssf
