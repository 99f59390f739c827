#pragma once

#include <cstdint>
#include <functional>

namespace sparse_spike {

/// Worker count: `requested` if positive, else SPARSE_SPIKE_THREADS if set to
/// a positive integer, else the hardware concurrency (at least 1).
int resolve_threads(int requested = 0);

/// Runs body(chunk, begin, end) over [0, count) split into fixed chunks of
/// `chunk_size` indices. Chunk boundaries depend only on count and
/// chunk_size, never on the thread count, so callers that reduce per-chunk
/// results in chunk order get identical output for any width.
///
/// If bodies throw, the exception from the lowest-numbered failing chunk is
/// rethrown after all workers stop; chunks not yet started are abandoned.
void parallel_chunks(std::uint64_t count, std::uint64_t chunk_size, int threads,
                     const std::function<void(std::uint64_t chunk, std::uint64_t begin,
                                              std::uint64_t end)>& body);

inline std::uint64_t chunk_count(std::uint64_t count, std::uint64_t chunk_size) {
  return (count + chunk_size - 1) / chunk_size;
}

}  // namespace sparse_spike
