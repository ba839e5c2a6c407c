#ifndef SPADESIM_STATS_HPP
#define SPADESIM_STATS_HPP

#include <span>
#include <vector>

namespace spadesim {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs); // unbiased (n-1)

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys);
// least-squares slope of log(y) against log(x); inputs must be positive
LineFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

// Regularized incomplete gamma functions P(a,x), Q(a,x) = 1 - P(a,x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Survival function and quantile of the chi-square distribution.
double chi_square_sf(double statistic, int dof);
double chi_square_quantile(double p, int dof);

} // namespace spadesim

#endif
