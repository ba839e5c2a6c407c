#ifndef SPADESIM_ESTIMATE_HPP
#define SPADESIM_ESTIMATE_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "spadesim/simulate.hpp"

namespace spadesim {

// Measurement model for scalar separation estimation: maps a separation to
// an outcome distribution, samples synthetic data, and builds a per-dataset
// log-likelihood.  The returned closure owns everything it needs, so it can
// be evaluated concurrently.
class SeparationModel {
public:
    virtual ~SeparationModel() = default;
    virtual std::function<double(double)> log_likelihood(const PhotonData& data) const = 0;
    virtual PhotonData sample(double separation, double photons, uint64_t seed,
                              uint64_t stream) const = 0;
};

class ModeCountModel : public SeparationModel {
public:
    ModeCountModel(ModeBasis basis, Psf psf, double centroid = 0.0);
    std::function<double(double)> log_likelihood(const PhotonData& data) const override;
    PhotonData sample(double separation, double photons, uint64_t seed,
                      uint64_t stream) const override;
    OutcomeDistribution distribution(double separation) const;

private:
    ModeBasis basis_;
    Psf psf_;
    double centroid_;
};

// Direct imaging with continuous photon positions; the likelihood bins the
// positions onto the image grid cells (the model's own resolution).
class DirectImagingModel : public SeparationModel {
public:
    DirectImagingModel(Psf psf, Grid image_grid, double centroid = 0.0);
    std::function<double(double)> log_likelihood(const PhotonData& data) const override;
    PhotonData sample(double separation, double photons, uint64_t seed,
                      uint64_t stream) const override;
    OutcomeDistribution distribution(double separation) const;

private:
    Psf psf_;
    Grid image_;
    double centroid_;
};

struct MlResult {
    double estimate = 0.0;
    bool flat_likelihood = false;
};

// Maximum-likelihood separation: coarse bracket scan followed by
// golden-section refinement to 1e-6; the estimate is clipped to the bounds.
MlResult ml_separation(const PhotonData& data, const SeparationModel& model, double lower,
                       double upper);

// moment estimators from photon counts in a pad (or hermite-gauss) basis:
//   even:  theta_2q     = n_q / (N c_q^2)
//   odd:   theta_2q+1   = (n_q+ - n_q-) / (2 N c_q c_{q+1})  (ipad counts)
double even_moment_estimate(const PhotonData& counts, const ModeBasis& basis, double photons,
                            int q);
double odd_moment_estimate(const PhotonData& counts, const ModeBasis& ipad_basis,
                           double photons, int q);

// closed-form error predictions for the estimators above
double predicted_even_moment_mse(const MomentVector& moments, const ModeBasis& basis,
                                 double photons, int q);
double predicted_odd_moment_mse(const MomentVector& moments, const ModeBasis& basis,
                                double photons, int q);

// Per-trial batch summary.
struct EstimatorResult {
    std::vector<double> estimates;
    double true_value = 0.0;
    double mean = 0.0;
    double bias = 0.0;
    double mse = 0.0;
    double snr = 0.0; // true_value^2 / mse
    int trials = 0;

    static EstimatorResult from_estimates(std::vector<double> estimates, double true_value);
    std::string to_csv() const; // one row per trial
    nlohmann::json summary_json() const;
};

// Monte Carlo driver: trials are independent streams of `seed`, run in the
// work pool and assembled by index, so results do not depend on thread count.
EstimatorResult run_ml_trials(const SeparationModel& model, double true_separation,
                              double photons, int trials, uint64_t seed, double lower,
                              double upper);

// Generalized Fourier expansion of a source density against a nonnegative
// reference density G: F(X) ~ sum_mu coeff_mu h_mu(X) G(X) with h_mu
// orthonormal polynomials under G and coeff_mu = sum_nu H_{mu nu} theta_nu.
struct FourierModel {
    Grid grid{-1.0, 1.0, 16};
    std::vector<double> reference;      // G samples on grid
    std::vector<Poly> polynomials;      // h_mu
    Eigen::MatrixXd coefficient_matrix; // H, lower triangular
    std::vector<double> coefficients;   // generalized Fourier coefficients
};

FourierModel fourier_coefficients(const MomentVector& moments, const Grid& grid,
                                  std::span<const double> reference, int max_order);

// evaluate the truncated expansion; clip = clamp negative values and
// renormalize to unit mass
std::vector<double> reconstruct_object(const FourierModel& model, const Grid& out_grid,
                                       bool clip);

} // namespace spadesim

#endif
