#include "graphflow/core.hpp"

#include <atomic>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

namespace graphflow {

int worker_count() {
  static const int count = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("GRAPHFLOW_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1 && v < 1024) hw = std::min(hw, static_cast<int>(v));
    }
    return hw;
  }();
  return count;
}

void parallel_blocks(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  const std::int64_t blocks = block_count(n);
  const int workers = static_cast<int>(std::min<std::int64_t>(worker_count(), blocks));
  if (workers <= 1) {
    for (std::int64_t b = 0; b < blocks; ++b)
      fn(b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          const std::int64_t b = next.fetch_add(1);
          if (b >= blocks || failed.load()) return;
          fn(b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
        }
      } catch (...) {
        std::scoped_lock lock(error_mu);
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

template <typename Init, typename Fold>
double block_reduce(std::int64_t n, const std::function<double(std::int64_t)>& value, Init init,
                    Fold fold) {
  const std::int64_t blocks = block_count(n);
  std::vector<double> partial(static_cast<std::size_t>(std::max<std::int64_t>(blocks, 1)), init());
  parallel_blocks(n, [&](std::int64_t lo, std::int64_t hi) {
    double acc = init();
    for (std::int64_t i = lo; i < hi; ++i) acc = fold(acc, value(i));
    partial[static_cast<std::size_t>(lo / kBlockSize)] = acc;
  });
  double acc = init();
  for (double p : partial) acc = fold(acc, p);
  return acc;
}

}  // namespace

double block_max(std::int64_t n, const std::function<double(std::int64_t)>& value) {
  return block_reduce(
      n, value, [] { return -std::numeric_limits<double>::infinity(); },
      [](double a, double b) { return a > b ? a : b; });
}

double block_min(std::int64_t n, const std::function<double(std::int64_t)>& value) {
  return block_reduce(
      n, value, [] { return std::numeric_limits<double>::infinity(); },
      [](double a, double b) { return a < b ? a : b; });
}

double block_sum(std::int64_t n, const std::function<double(std::int64_t)>& value) {
  return block_reduce(
      n, value, [] { return 0.0; }, [](double a, double b) { return a + b; });
}

}  // namespace graphflow
