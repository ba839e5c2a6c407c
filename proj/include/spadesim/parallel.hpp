#ifndef SPADESIM_PARALLEL_HPP
#define SPADESIM_PARALLEL_HPP

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spadesim {

// Global cap on worker threads.  0 means "use the OpenMP default",
// 1 forces the serial reference path.  Results must not depend on the
// setting: every parallel loop writes through a per-index slot.
int max_threads();
void set_max_threads(int n);

template <class F>
void parallel_for(int n, F&& body) {
#ifdef _OPENMP
    const int cap = max_threads();
    if (cap != 1 && n > 1) {
        if (cap > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(cap)
            for (int i = 0; i < n; ++i) body(i);
        } else {
#pragma omp parallel for schedule(dynamic)
            for (int i = 0; i < n; ++i) body(i);
        }
        return;
    }
#endif
    for (int i = 0; i < n; ++i) body(i);
}

// Serial loop kept as an explicit reference implementation; the tests and
// the benchmark compare it against parallel_for.
template <class F>
void serial_for(int n, F&& body) {
    for (int i = 0; i < n; ++i) body(i);
}

} // namespace spadesim

#endif
