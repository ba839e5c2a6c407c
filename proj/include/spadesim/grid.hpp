#ifndef SPADESIM_GRID_HPP
#define SPADESIM_GRID_HPP

#include <span>
#include <vector>

#include "spadesim/common.hpp"

namespace spadesim {

// Uniform 1-D coordinate grid used for image-plane positions x and spatial
// frequencies k.  All integrals in the library are trapezoid sums on such
// grids.
class Grid {
public:
    Grid(double lower, double upper, int samples);

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    int samples() const { return samples_; }
    double spacing() const { return spacing_; }
    double point(int i) const { return lower_ + spacing_ * i; }
    std::vector<double> points() const;

    bool is_symmetric(double tol = 1e-9) const;
    bool contains(double x) const { return x >= lower_ && x <= upper_; }

    bool operator==(const Grid& o) const {
        return lower_ == o.lower_ && upper_ == o.upper_ && samples_ == o.samples_;
    }

private:
    double lower_, upper_, spacing_;
    int samples_;
};

double trapezoid(std::span<const double> y, double spacing);
cd trapezoid(std::span<const cd> y, double spacing);

// trapezoid integral of conj(a)*b
cd inner_product(std::span<const cd> a, std::span<const cd> b, double spacing);
double inner_product(std::span<const double> a, std::span<const double> b, double spacing);

// Catmull-Rom cubic interpolation of regularly sampled data; returns 0
// outside the grid.
double cubic_interpolate(const Grid& g, std::span<const double> y, double x);
cd cubic_interpolate(const Grid& g, std::span<const cd> y, double x);

} // namespace spadesim

#endif
