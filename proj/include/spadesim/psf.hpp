#ifndef SPADESIM_PSF_HPP
#define SPADESIM_PSF_HPP

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "spadesim/grid.hpp"

namespace spadesim {

enum class PsfKind { gaussian, signum_masked_gaussian, custom };

std::string to_string(PsfKind kind);

// Amplitude point-spread function psi(x) together with its spatial-frequency
// image Psi(k), both on explicit grids and in dimensionless image-plane
// units.  Instances are immutable after construction and safe to share
// across threads.
//
// psi is stored with unit trapezoid norm on its grid.  Psi is the forward
// transform of the stored psi, so the pair is self-consistent; for localized
// kinds (gaussian, custom) the two norms agree to ~1e-9.  The ideal
// signum-masked PSF has |psi(x)|^2 ~ x^-2 tails, so a finite window loses
// real mass before renormalization and the frequency-side norm then matches
// only to about 1e-5 on default grids.
class Psf {
public:
    static Psf gaussian(double sigma, const Grid& xgrid);
    static Psf gaussian(double sigma, const Grid& xgrid, const Grid& kgrid);
    static Psf signum_masked(double sigma, const Grid& xgrid);
    static Psf signum_masked(double sigma, const Grid& xgrid, const Grid& kgrid);
    static Psf from_samples(const Grid& xgrid, std::vector<cd> amplitude, double nominal_sigma);
    // two-column (x, amplitude) or four-column (x, re, im, reserved) CSV with
    // a mandatory header row
    static Psf from_csv(const std::string& path, double nominal_sigma = 0.5);

    static Grid default_xgrid() { return Grid(-10.0, 10.0, 4096); }
    static Grid default_kgrid_for_sigma(double sigma, int samples = 4096);

    const Grid& xgrid() const { return x_; }
    const Grid& kgrid() const { return k_; }
    std::span<const cd> amplitude() const { return psi_; }
    std::span<const cd> spectrum() const { return Psi_; }
    double sigma() const { return sigma_; }
    PsfKind kind() const { return kind_; }

    // psi(x - shift) by frequency-domain phase ramp, evaluated on `out`
    // (default: the PSF's own grid).  Requires a 6*sigma support margin.
    std::vector<cd> shifted_amplitude(double shift) const;
    std::vector<cd> shifted_amplitude(double shift, const Grid& out) const;

    // e^{-ikX} Psi(k) on the frequency grid (phase-ramp recurrence)
    std::vector<cd> shifted_spectrum(double shift) const;

    cd amplitude_at(double x) const;     // cubic interpolation
    double intensity_at(double x) const; // |psi(x)|^2, cubic on samples

    std::span<const double> intensity() const { return intensity_; }
    // m-th spatial derivative of |psi|^2 via the intensity spectrum
    // (results are cached; the cache does not change observable state)
    const std::vector<double>& intensity_derivative(int order) const;

    // largest |shift| such that the shifted support keeps a 6*sigma margin
    double max_shift() const;
    void require_shift(double shift) const; // throws OutOfSupportError

private:
    Psf(Grid x, Grid k, std::vector<cd> psi, double sigma, PsfKind kind);

    Grid x_, k_;
    std::vector<cd> psi_, Psi_;
    std::vector<double> intensity_;
    double sigma_;
    PsfKind kind_;

    struct DerivativeCache {
        std::mutex mutex;
        std::map<int, std::vector<double>> values;
    };
    std::shared_ptr<DerivativeCache> derivative_cache_ =
        std::make_shared<DerivativeCache>();
};

} // namespace spadesim

#endif
