#include "nlshape/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace nlshape {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads = std::max(1, n); }
int num_threads() { return g_threads.load(); }

void parallel_blocks(std::size_t n,
                     const std::function<void(int, std::size_t, std::size_t)>& fn) {
  const int nt = static_cast<int>(std::min<std::size_t>(std::max(1, num_threads()),
                                                         std::max<std::size_t>(n, 1)));
  if (nt == 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nt);
  for (int b = 0; b < nt; ++b) {
    const std::size_t lo = n * b / nt, hi = n * (b + 1) / nt;
    pool.emplace_back([&, b, lo, hi] {
      try {
        fn(b, lo, hi);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace nlshape
