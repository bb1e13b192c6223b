#pragma once

#include <cstddef>
#include <functional>

namespace lotenet {

/// Number of worker threads the engine may use. Reads LOTENET_THREADS once;
/// defaults to the hardware concurrency, always at least 1.
std::size_t worker_count();

/// Run fn(begin, end) over [0, count) partitioned into fixed-size chunks.
///
/// Chunk boundaries depend only on (count, chunk_size), never on the number
/// of workers, so per-chunk results reduced in chunk order are bitwise
/// reproducible across any thread count. fn must write only to per-chunk
/// state.
void parallel_chunks(std::size_t count, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace lotenet
