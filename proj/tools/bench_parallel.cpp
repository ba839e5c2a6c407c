// Timing comparison of the serial reference path against the OpenMP work
// pool on the three data-parallel kernels: quadrature Fourier transforms,
// Fisher/Helstrom sweeps, and Monte Carlo ML batches.
#include <chrono>
#include <cstdio>

#include "spadesim/estimate.hpp"
#include "spadesim/experiments.hpp"
#include "spadesim/fourier.hpp"
#include "spadesim/parallel.hpp"

using namespace spadesim;

namespace {

template <class F>
double time_seconds(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %.2fx\n", name, serial,
                parallel, serial / parallel);
}

} // namespace

int main() {
    const Psf psf = Psf::gaussian(0.5, Psf::default_xgrid());

    // 1. quadrature Fourier transform
    std::vector<cd> amp(psf.amplitude().begin(), psf.amplitude().end());
    auto transform = [&] {
        auto F = fourier_forward(psf.xgrid(), amp, psf.kgrid());
        volatile double sink = F[0].real();
        (void)sink;
    };
    set_max_threads(1);
    const double t_serial = time_seconds(transform);
    set_max_threads(0);
    const double t_parallel = time_seconds(transform);
    report("fourier transform 4096^2", t_serial, t_parallel);

    // 2. Fisher information sweep
    ExperimentSpec spec;
    spec.experiment = "fisher-sweep";
    spec.theta_grid = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
    auto sweep = [&] { run_fisher_sweep(spec); };
    set_max_threads(1);
    const double s_serial = time_seconds(sweep);
    set_max_threads(0);
    const double s_parallel = time_seconds(sweep);
    report("fisher sweep (8 points)", s_serial, s_parallel);

    // 3. Monte Carlo ML batch
    const ModeBasis hg = hermite_gauss_basis(psf, 11);
    const ModeCountModel model(hg, psf);
    auto mc = [&] { run_ml_trials(model, 0.2, 1e4, 200, 42, 0.0, 1.0); };
    set_max_threads(1);
    const double m_serial = time_seconds(mc);
    set_max_threads(0);
    const double m_parallel = time_seconds(mc);
    report("spade ML batch (200 trials)", m_serial, m_parallel);

    return 0;
}
