#include "spadesim/parallel.hpp"

#include <atomic>

namespace spadesim {

namespace {
std::atomic<int> g_max_threads{0};
}

int max_threads() { return g_max_threads.load(); }

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

} // namespace spadesim
