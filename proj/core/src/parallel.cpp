#include "sparse_spike/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sparse_spike {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPARSE_SPIKE_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != nullptr && *end == '\0' && value > 0 && value <= 4096) {
      return static_cast<int>(value);
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_chunks(std::uint64_t count, std::uint64_t chunk_size, int threads,
                     const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& body) {
  if (chunk_size == 0) throw std::invalid_argument("parallel_chunks: chunk_size must be positive");
  const std::uint64_t chunks = chunk_count(count, chunk_size);
  if (chunks == 0) return;
  const auto run = [&](std::uint64_t c) {
    const std::uint64_t begin = c * chunk_size;
    const std::uint64_t end = std::min(count, begin + chunk_size);
    body(c, begin, end);
  };

  const std::uint64_t width = std::min<std::uint64_t>(
      chunks, static_cast<std::uint64_t>(threads < 1 ? 1 : threads));
  if (width == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run(c);
    return;
  }

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::uint64_t error_chunk = std::numeric_limits<std::uint64_t>::max();
  std::exception_ptr error;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        run(c);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (c < error_chunk) {
          error_chunk = c;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(width - 1);
  for (std::uint64_t w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace sparse_spike
