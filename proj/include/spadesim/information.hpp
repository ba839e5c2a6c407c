#ifndef SPADESIM_INFORMATION_HPP
#define SPADESIM_INFORMATION_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spadesim/modes.hpp"
#include "spadesim/psf.hpp"
#include "spadesim/scene.hpp"

namespace spadesim {

// Classical/quantum information report.  All values are per detected photon;
// multiply by N for a total-photon budget.
struct InfoReport {
    Eigen::MatrixXd fi;  // classical Fisher information (0x0 when not computed)
    Eigen::MatrixXd hi;  // Helstrom information (0x0 when not computed)
    Eigen::MatrixXd crb; // inverse (or pseudo-inverse) of fi when present, else hi
    bool crb_singular = false;
    int crb_rank = 0;
    int truncation = 0;
    double step = 0.0;
    double sld_residual = 0.0; // relative SLD equation residual on retained pairs
    std::string method;        // classical | sld-onephoton | thermal-exact
    std::string grid_note;
    std::vector<std::string> parameter_names;

    double scalar_fi() const;
    double scalar_hi() const;
    double scalar_crb() const;
    nlohmann::json to_json() const;
};

struct FiOptions {
    double step = 1e-4;
    bool check_step_stability = true;
    double stability_tolerance = 0.01; // relative change allowed when the step halves
    double probability_floor = 1e-15;  // discrete outcomes below this merge into residual
};

// Fisher information of ideal direct imaging (spatial Poisson process):
// FI_mn = Integral (1/f) (df/dtheta_m)(df/dtheta_n) dx, derivatives by
// central differences on the scene family.
InfoReport fi_direct(const SceneFamily& family, const Psf& psf,
                     const std::vector<double>& theta, const Grid& image_grid,
                     const FiOptions& options = {});

// Fisher information of photon counting in a mode basis (independent
// Poisson counters per outcome, residual bucket included).
InfoReport fi_modes(const SceneFamily& family, const ModeBasis& basis, const Psf& psf,
                    const std::vector<double>& theta, const FiOptions& options = {});

// Small-separation direct-imaging approximations for two equal sources.
// `full` keeps the quadratic intensity correction in the denominator;
// `quadratic` drops it and may diverge when |psi|^2 has zeros, which is
// reported through divergence_warning (grid-refinement instability).
struct SmallSepFi {
    double full = 0.0;
    double quadratic = 0.0;
    bool divergence_warning = false;
};
SmallSepFi fi_direct_small_sep(const Psf& psf, double theta);

struct HelstromOptions {
    int truncation = 16; // polynomial-in-k modes spanning the one-photon state
    double step = 1e-4;
    double eigenvalue_floor = 1e-12; // eigenvalue pairs below this contribute 0
    bool check_truncation_stability = false;
    double stability_tolerance = 0.005;
};

// Orthonormal working basis holding the one-photon density operators of a
// set of scenes: polynomial-weighted spectra k^t Psi(k) up to `truncation`,
// completed with the exact shifted spectra of the scenes' support nodes.
class OnePhotonModel {
public:
    static OnePhotonModel build(const Psf& psf, const std::vector<SourceScene>& span_scenes,
                                int truncation);
    Eigen::MatrixXcd density_matrix(const SourceScene& scene) const;
    int rank() const { return static_cast<int>(basis_.cols()); }

private:
    Grid kgrid_{-1.0, 1.0, 16};
    Eigen::MatrixXcd basis_; // weighted orthonormal columns
    std::vector<double> sqrt_weights_;
    const Psf* psf_ = nullptr;
    std::vector<cd> spectrum_;
};

// Helstrom information from the one-photon density operator: the symmetric
// logarithmic derivative is solved spectrally in the eigenbasis of rho.
InfoReport helstrom_onephoton(const SceneFamily& family, const Psf& psf,
                              const std::vector<double>& theta,
                              const HelstromOptions& options = {});

// Helstrom information of a thermal state with mutual-coherence matrix
// Gamma(theta): solves dGamma = (Gamma Y (I+Gamma) + (I+Gamma) Y Gamma)/2
// in Gamma's eigenbasis and returns tr(dGamma Y).
using MatrixFamily = std::function<Eigen::MatrixXcd(const std::vector<double>&)>;
InfoReport helstrom_thermal(const MatrixFamily& gamma, const std::vector<double>& theta,
                            double step = 1e-4);

struct CrbResult {
    Eigen::MatrixXd matrix;
    bool singular = false;
    int rank = 0;
};
CrbResult crb(const Eigen::MatrixXd& fisher);
Eigen::MatrixXd crb(const InfoReport& report);

// Direct-imaging Fisher information in moment coordinates for a
// subdiffraction object: the intensity is linear in the moments through the
// derivative kernels (-1)^mu (d/dx)^mu |psi(x)|^2 / mu!, so the matrix is
// exact at the scene's moment values.  Rows/columns run over mu = 1..max_order.
Eigen::MatrixXd fi_direct_moments(const Psf& psf, const Grid& image_grid, int max_order,
                                  const MomentVector& at);

} // namespace spadesim

#endif
