#include "uhd/threading.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace uhd {

int max_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("UHD_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, 256));
  }
  return hw;
}

void parallel_chunks(std::int64_t n, std::int64_t chunk,
                     const std::function<void(std::int64_t, std::int64_t, std::size_t)>& f) {
  if (n <= 0) return;
  if (chunk < 1) chunk = 1;
  const std::size_t n_chunks = static_cast<std::size_t>((n + chunk - 1) / chunk);
  const int workers = std::min<std::int64_t>(max_threads(), static_cast<std::int64_t>(n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::int64_t b = static_cast<std::int64_t>(c) * chunk;
      f(b, std::min(n, b + chunk), c);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::int64_t b = static_cast<std::int64_t>(c) * chunk;
      f(b, std::min(n, b + chunk), c);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

}  // namespace uhd
