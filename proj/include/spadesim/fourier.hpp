#ifndef SPADESIM_FOURIER_HPP
#define SPADESIM_FOURIER_HPP

#include <span>
#include <vector>

#include "spadesim/common.hpp"
#include "spadesim/grid.hpp"

namespace spadesim {

// Unitary continuous Fourier transform evaluated by trapezoid quadrature:
//
//   forward:  F(k) = (2*pi)^(-1/2) Integral f(x) exp(-i k x) dx
//   inverse:  f(x) = (2*pi)^(-1/2) Integral F(k) exp(+i k x) dk
//
// The output grid is free, so a narrow frequency window can be sampled
// densely regardless of the x-grid.  Cost is O(len(out) * len(in)); the
// outer loop is parallel and each output point uses a phase recurrence
// that is periodically resynchronized against std::polar.
std::vector<cd> fourier_forward(const Grid& xgrid, std::span<const cd> fx, const Grid& kgrid);
std::vector<cd> fourier_inverse(const Grid& kgrid, std::span<const cd> Fk, const Grid& xgrid);

} // namespace spadesim

#endif
