#include "sofic/parallel.hpp"

#include "sofic/errors.hpp"

namespace sofic {

namespace {
std::atomic<int> g_threads{1};
}

void set_worker_threads(int threads) {
  if (threads < 1)
    throw InvalidArgument("worker thread count must be >= 1");
  g_threads = threads;
}

int worker_threads() { return g_threads.load(); }

} // namespace sofic
