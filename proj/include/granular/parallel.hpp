#pragma once

#include <cstddef>
#include <functional>

namespace granular {

// Worker count used when a caller passes threads == 0.
int default_thread_count();
void set_default_thread_count(int threads);

// Run fn(begin, end, chunk_index) over disjoint index ranges covering
// [0, n). Callers must make results independent of the chunking: draw from
// per-unit RNG streams and write only to per-unit slots or integer
// accumulators merged in chunk order.
void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t, int)>& fn);

} // namespace granular
