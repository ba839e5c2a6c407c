#ifndef SPADESIM_POLYNOMIAL_HPP
#define SPADESIM_POLYNOMIAL_HPP

#include <span>
#include <vector>

#include "spadesim/grid.hpp"

namespace spadesim {

// Polynomial as ascending coefficients: p[0] + p[1] k + p[2] k^2 + ...
using Poly = std::vector<double>;

double poly_eval(const Poly& p, double x);
Poly poly_derivative(const Poly& p);

struct OrthonormalPolys {
    std::vector<Poly> polys;     // b_q, orthonormal under the weighted inner product
    double scale = 1.0;          // internal variable scaling sqrt(<k^2>)
    double gram_condition = 1.0; // condition number of the normalized monomial Gram
};

// Orthogonal polynomials b_q under the inner product
//   <u, v> = Integral w(k) u(k) v(k) dk   (trapezoid on kgrid)
// obtained by modified Gram-Schmidt with one reorthogonalization pass on
// variance-scaled monomials.  The weight is renormalized to unit mass.
// Throws IllConditionedError when the normalized monomial Gram matrix has
// condition number above 1e12 (max_order too high for the grid/weight).
OrthonormalPolys gram_schmidt_polynomials(const Grid& kgrid, std::span<const double> weight,
                                          int max_order);

// Orthonormal Hermite polynomials for a Gaussian weight of given variance:
// b_q(k) = He_q(k / sqrt(v)) / sqrt(q!), built from the He recurrence.
std::vector<Poly> hermite_orthonormal(int max_order, double variance);

} // namespace spadesim

#endif
