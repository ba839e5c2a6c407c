#include "spadesim/grid.hpp"

#include <cmath>
#include <string>

namespace spadesim {

Grid::Grid(double lower, double upper, int samples)
    : lower_(lower), upper_(upper), samples_(samples) {
    if (samples < 16)
        throw InputError("grid: samples must be >= 16, got " + std::to_string(samples));
    if (!(upper > lower))
        throw InputError("grid: upper bound must exceed lower bound");
    spacing_ = (upper - lower) / (samples - 1);
    if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
        throw InputError("grid: non-positive or non-finite spacing");
}

std::vector<double> Grid::points() const {
    std::vector<double> xs(samples_);
    for (int i = 0; i < samples_; ++i) xs[i] = point(i);
    return xs;
}

bool Grid::is_symmetric(double tol) const {
    return std::abs(lower_ + upper_) <= tol * std::max(1.0, std::abs(upper_));
}

double trapezoid(std::span<const double> y, double spacing) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * spacing;
}

cd trapezoid(std::span<const cd> y, double spacing) {
    if (y.size() < 2) return {};
    cd s = 0.5 * (y.front() + y.back());
    for (size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * spacing;
}

cd inner_product(std::span<const cd> a, std::span<const cd> b, double spacing) {
    cd s = 0.5 * (std::conj(a.front()) * b.front() + std::conj(a.back()) * b.back());
    for (size_t i = 1; i + 1 < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s * spacing;
}

double inner_product(std::span<const double> a, std::span<const double> b, double spacing) {
    double s = 0.5 * (a.front() * b.front() + a.back() * b.back());
    for (size_t i = 1; i + 1 < a.size(); ++i) s += a[i] * b[i];
    return s * spacing;
}

namespace {

template <class T>
T cubic_impl(const Grid& g, std::span<const T> y, double x) {
    if (x < g.lower() || x > g.upper()) return T{};
    const double t = (x - g.lower()) / g.spacing();
    int i = static_cast<int>(std::floor(t));
    if (i < 0) i = 0;
    if (i > g.samples() - 2) i = g.samples() - 2;
    const double u = t - i;
    const T p1 = y[i];
    const T p2 = y[i + 1];
    const T p0 = (i > 0) ? y[i - 1] : T{};
    const T p3 = (i + 2 < g.samples()) ? y[i + 2] : T{};
    const T a = 2.0 * p1;
    const T b = p2 - p0;
    const T c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    const T d = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    return 0.5 * (a + b * u + c * u * u + d * u * u * u);
}

} // namespace

double cubic_interpolate(const Grid& g, std::span<const double> y, double x) {
    return cubic_impl(g, y, x);
}

cd cubic_interpolate(const Grid& g, std::span<const cd> y, double x) {
    return cubic_impl(g, y, x);
}

} // namespace spadesim
