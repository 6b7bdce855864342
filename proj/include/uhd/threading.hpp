#pragma once

#include <cstdint>
#include <functional>

namespace uhd {

// Maximum worker threads: min(UHD_THREADS, hardware concurrency), at least 1.
int max_threads();

// Runs f(begin, end, chunk_index) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on (n, chunk); threads only decide which worker
// executes which chunk. Callers that reduce results must combine per-chunk
// outputs in chunk-index order so results are bit-identical for any thread
// count.
void parallel_chunks(std::int64_t n, std::int64_t chunk,
                     const std::function<void(std::int64_t, std::int64_t, std::size_t)>& f);

}  // namespace uhd
