#include "mondi/parallel.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mondi {
namespace {

std::atomic<int> g_override{0};

int env_thread_count() {
  static const int value = [] {
    if (const char* env = std::getenv("MONDI_THREADS")) {
      try {
        const int n = std::stoi(env);
        if (n > 0) return n;
      } catch (...) {
      }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return value;
}

}  // namespace

int thread_count() {
  const int n = g_override.load(std::memory_order_relaxed);
  return n > 0 ? n : env_thread_count();
}

void set_thread_count(int n) { g_override.store(std::max(n, 0), std::memory_order_relaxed); }

void parallel_rows(int rows, const std::function<void(int)>& body) {
  if (rows <= 0) return;
  const int workers = std::min(thread_count(), rows);
  if (workers <= 1) {
    for (int r = 0; r < rows; ++r) body(r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const int block = (rows + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const int begin = w * block;
    const int end = std::min(rows, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (int r = begin; r < end; ++r) body(r);
    });
  }
  for (int r = 0; r < std::min(rows, block); ++r) body(r);
}

}  // namespace mondi
