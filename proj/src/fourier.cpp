#include "spadesim/fourier.hpp"

#include <cmath>
#include <numbers>

#include "spadesim/parallel.hpp"

namespace spadesim {

namespace {

constexpr int kResyncStride = 256;

// out[m] = norm * sum_j w_j in[j] exp(i sign k_m x_j), trapezoid weights w.
std::vector<cd> transform(const Grid& in_grid, std::span<const cd> in,
                          const Grid& out_grid, double sign) {
    const int n_in = in_grid.samples();
    const int n_out = out_grid.samples();
    const double h = in_grid.spacing();
    const double norm = h / std::sqrt(2.0 * std::numbers::pi);

    std::vector<cd> weighted(in.begin(), in.end());
    weighted.front() *= 0.5;
    weighted.back() *= 0.5;

    std::vector<cd> out(n_out);
    parallel_for(n_out, [&](int m) {
        const double freq = sign * out_grid.point(m);
        const cd step = std::polar(1.0, freq * h);
        cd phase = std::polar(1.0, freq * in_grid.lower());
        cd acc{};
        for (int j = 0; j < n_in; ++j) {
            if (j % kResyncStride == 0)
                phase = std::polar(1.0, freq * in_grid.point(j));
            acc += weighted[j] * phase;
            phase *= step;
        }
        out[m] = acc * norm;
    });
    return out;
}

} // namespace

std::vector<cd> fourier_forward(const Grid& xgrid, std::span<const cd> fx, const Grid& kgrid) {
    return transform(xgrid, fx, kgrid, -1.0);
}

std::vector<cd> fourier_inverse(const Grid& kgrid, std::span<const cd> Fk, const Grid& xgrid) {
    return transform(kgrid, Fk, xgrid, +1.0);
}

} // namespace spadesim
