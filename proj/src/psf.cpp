#include "spadesim/psf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spadesim/fourier.hpp"

namespace spadesim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<cd> phase_ramp(const Grid& kgrid, std::span<const cd> Fk, double shift) {
    std::vector<cd> out(Fk.size());
    const cd step = std::polar(1.0, -shift * kgrid.spacing());
    cd phase = std::polar(1.0, -shift * kgrid.lower());
    for (int j = 0; j < kgrid.samples(); ++j) {
        if (j % 256 == 0) phase = std::polar(1.0, -shift * kgrid.point(j));
        out[j] = Fk[j] * phase;
        phase *= step;
    }
    return out;
}

} // namespace

std::string to_string(PsfKind kind) {
    switch (kind) {
        case PsfKind::gaussian: return "gaussian";
        case PsfKind::signum_masked_gaussian: return "signum-masked-gaussian";
        case PsfKind::custom: return "custom";
    }
    return "unknown";
}

Grid Psf::default_kgrid_for_sigma(double sigma, int samples) {
    const double kmax = 10.0 / sigma;
    return Grid(-kmax, kmax, samples);
}

Psf::Psf(Grid x, Grid k, std::vector<cd> psi, double sigma, PsfKind kind)
    : x_(x), k_(k), psi_(std::move(psi)), sigma_(sigma), kind_(kind) {
    // unit trapezoid norm on the grid
    std::vector<double> absq(psi_.size());
    for (size_t i = 0; i < psi_.size(); ++i) absq[i] = std::norm(psi_[i]);
    const double mass = trapezoid(absq, x_.spacing());
    if (!(mass > 0.0)) throw InputError("psf: amplitude has zero norm on the grid");
    const double scale = 1.0 / std::sqrt(mass);
    for (auto& v : psi_) v *= scale;

    Psi_ = fourier_forward(x_, psi_, k_);

    intensity_.resize(psi_.size());
    for (size_t i = 0; i < psi_.size(); ++i) intensity_[i] = std::norm(psi_[i]);
}

Psf Psf::gaussian(double sigma, const Grid& xgrid) {
    return gaussian(sigma, xgrid, default_kgrid_for_sigma(sigma, xgrid.samples()));
}

Psf Psf::gaussian(double sigma, const Grid& xgrid, const Grid& kgrid) {
    if (!(sigma > 0.0)) throw InputError("gaussian psf: sigma must be positive");
    if (xgrid.lower() > -8.0 * sigma || xgrid.upper() < 8.0 * sigma)
        throw InputError("gaussian psf: grid must span at least +/-8 sigma");
    const double amp = std::pow(kTwoPi * sigma * sigma, -0.25);
    std::vector<cd> psi(xgrid.samples());
    std::vector<double> absq(xgrid.samples());
    for (int i = 0; i < xgrid.samples(); ++i) {
        const double x = xgrid.point(i);
        const double v = amp * std::exp(-x * x / (4.0 * sigma * sigma));
        psi[i] = v;
        absq[i] = v * v;
    }
    const double captured = trapezoid(absq, xgrid.spacing());
    if (captured < 1.0 - 1e-6)
        throw InputError("gaussian psf: grid too narrow, captured |psi|^2 = " +
                         std::to_string(captured));
    return Psf(xgrid, kgrid, std::move(psi), sigma, PsfKind::gaussian);
}

Psf Psf::signum_masked(double sigma, const Grid& xgrid) {
    return signum_masked(sigma, xgrid, default_kgrid_for_sigma(sigma, xgrid.samples()));
}

Psf Psf::signum_masked(double sigma, const Grid& xgrid, const Grid& kgrid) {
    if (!(sigma > 0.0)) throw InputError("signum psf: sigma must be positive");
    if (!xgrid.is_symmetric(1e-9))
        throw InputError("signum psf: grid must be symmetric about 0");
    // sgn(k) * Psi_gauss(k), then back to the image plane
    const double amp = std::pow(2.0 * sigma * sigma / std::numbers::pi, 0.25);
    std::vector<cd> Psi(kgrid.samples());
    for (int i = 0; i < kgrid.samples(); ++i) {
        const double k = kgrid.point(i);
        const double sgn = (k > 0.0) - (k < 0.0);
        Psi[i] = sgn * amp * std::exp(-sigma * sigma * k * k);
    }
    std::vector<cd> psi = fourier_inverse(kgrid, Psi, xgrid);
    // the inverse transform of an odd real spectrum is imaginary odd;
    // rotate the global phase by -i to make psi real
    for (auto& v : psi) v = cd(v.imag(), -v.real());
    return Psf(xgrid, kgrid, std::move(psi), sigma, PsfKind::signum_masked_gaussian);
}

Psf Psf::from_samples(const Grid& xgrid, std::vector<cd> amplitude, double nominal_sigma) {
    if (static_cast<int>(amplitude.size()) != xgrid.samples())
        throw InputError("custom psf: sample count does not match grid");
    if (!(nominal_sigma > 0.0)) throw InputError("custom psf: nominal sigma must be positive");
    const double h = xgrid.spacing();
    const double kmax = std::min(0.5 * std::numbers::pi / h, 200.0);
    Grid kgrid(-kmax, kmax, xgrid.samples());
    return Psf(xgrid, kgrid, std::move(amplitude), nominal_sigma, PsfKind::custom);
}

Psf Psf::from_csv(const std::string& path, double nominal_sigma) {
    std::ifstream in(path);
    if (!in) throw InputError("custom psf: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw InputError("custom psf: empty file '" + path + "'");
    {
        // header row is mandatory; reject files that start with numbers
        std::istringstream probe(line);
        double v;
        char comma;
        if ((probe >> v) && (probe >> comma))
            throw InputError("custom psf: missing header row in '" + path + "'");
    }
    std::vector<double> xs;
    std::vector<cd> amps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x, re, im = 0.0, reserved = 0.0;
        if (!(row >> x >> re))
            throw InputError("custom psf: malformed row '" + line + "'");
        if (row >> im) row >> reserved;
        xs.push_back(x);
        amps.emplace_back(re, im);
    }
    if (xs.size() < 16) throw InputError("custom psf: need at least 16 samples");
    const double h = xs[1] - xs[0];
    for (size_t i = 1; i < xs.size(); ++i)
        if (std::abs(xs[i] - xs[i - 1] - h) > 1e-6 * std::abs(h))
            throw InputError("custom psf: x column must be uniformly spaced");
    Grid g(xs.front(), xs.back(), static_cast<int>(xs.size()));
    return from_samples(g, std::move(amps), nominal_sigma);
}

double Psf::max_shift() const {
    const double half = std::min(-x_.lower(), x_.upper());
    return half - 6.0 * sigma_;
}

void Psf::require_shift(double shift) const {
    if (std::abs(shift) > max_shift())
        throw OutOfSupportError("psf shift " + std::to_string(shift) +
                                " leaves less than a 6 sigma margin on the grid");
}

std::vector<cd> Psf::shifted_spectrum(double shift) const {
    return phase_ramp(k_, Psi_, shift);
}

std::vector<cd> Psf::shifted_amplitude(double shift) const {
    return shifted_amplitude(shift, x_);
}

std::vector<cd> Psf::shifted_amplitude(double shift, const Grid& out) const {
    require_shift(shift);
    if (shift == 0.0 && out == x_) return psi_;
    const std::vector<cd> ramped = shifted_spectrum(shift);
    return fourier_inverse(k_, ramped, out);
}

cd Psf::amplitude_at(double x) const { return cubic_interpolate(x_, psi_, x); }

double Psf::intensity_at(double x) const {
    return std::max(0.0, cubic_interpolate(x_, std::span<const double>(intensity_), x));
}

const std::vector<double>& Psf::intensity_derivative(int order) const {
    if (order < 0 || order > 8) throw InputError("intensity_derivative: order out of range");
    std::lock_guard<std::mutex> lock(derivative_cache_->mutex);
    auto it = derivative_cache_->values.find(order);
    if (it != derivative_cache_->values.end()) return it->second;

    std::vector<double> out;
    if (order == 0) {
        out = intensity_;
    } else {
        // the intensity spectrum lives within twice the amplitude band
        Grid k2(2.0 * k_.lower(), 2.0 * k_.upper(), k_.samples());
        std::vector<cd> I(intensity_.begin(), intensity_.end());
        std::vector<cd> Ik = fourier_forward(x_, I, k2);
        for (int j = 0; j < k2.samples(); ++j) {
            const cd ik(0.0, k2.point(j));
            cd f = 1.0;
            for (int m = 0; m < order; ++m) f *= ik;
            Ik[j] *= f;
        }
        std::vector<cd> d = fourier_inverse(k2, Ik, x_);
        out.resize(d.size());
        for (size_t i = 0; i < d.size(); ++i) out[i] = d[i].real();
    }
    return derivative_cache_->values.emplace(order, std::move(out)).first->second;
}

} // namespace spadesim
