#include "dgpsim/parallel.hpp"

#include <map>
#include <memory>
#include <mutex>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace dgpsim {

namespace {

// Arenas are reused per thread count. The global worker limit is raised to the
// largest count requested so far, so a request for k threads gets k even when
// the host reports fewer cores.
tbb::task_arena& arena_for(unsigned threads) {
  static std::mutex mutex;
  static std::unique_ptr<tbb::global_control> limit;
  static unsigned limit_value = 0;
  static std::map<unsigned, std::unique_ptr<tbb::task_arena>> arenas;

  std::lock_guard<std::mutex> lock(mutex);
  if (threads > limit_value) {
    limit = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, threads);
    limit_value = threads;
  }
  auto& slot = arenas[threads];
  if (!slot) slot = std::make_unique<tbb::task_arena>(static_cast<int>(threads));
  return *slot;
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  arena_for(threads).execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count), [&](const auto& range) {
      for (std::size_t i = range.begin(); i != range.end(); ++i) body(i);
    });
  });
}

}  // namespace dgpsim
