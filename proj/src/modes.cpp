#include "spadesim/modes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "spadesim/fourier.hpp"
#include "spadesim/io.hpp"

namespace spadesim {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// i^q cycling through {1, i, -1, -i}
cd ipow(int q) {
    switch (((q % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

void require_even_psf(const Psf& psf, const char* who) {
    const auto& x = psf.xgrid();
    if (!x.is_symmetric(1e-9))
        throw InputError(std::string(who) + ": psf grid is not symmetric");
    const auto psi = psf.amplitude();
    double worst = 0.0, scale = 0.0;
    const int n = x.samples();
    for (int i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(psi[i] - psi[n - 1 - i]));
        scale = std::max(scale, std::abs(psi[i]));
    }
    if (worst > 1e-8 * scale)
        throw InputError(std::string(who) + ": psf is not even (asymmetry " +
                         std::to_string(worst / scale) + ")");
}

} // namespace

ModeBasis ModeBasis::make_k_space(BasisKind kind, const Psf& psf, std::vector<Poly> polys) {
    const Grid& kg = psf.kgrid();
    const auto Psi = psf.spectrum();
    const int n = static_cast<int>(polys.size());

    // c_q = <b_q, k^q> / q! under the |Psi|^2 weight; flip b_q when negative
    std::vector<double> weight(kg.samples());
    for (int i = 0; i < kg.samples(); ++i) weight[i] = std::norm(Psi[i]);
    std::vector<double> constants(n);
    for (int q = 0; q < n; ++q) {
        std::vector<double> integrand(kg.samples());
        for (int i = 0; i < kg.samples(); ++i) {
            const double k = kg.point(i);
            integrand[i] = weight[i] * poly_eval(polys[q], k) * std::pow(k, q);
        }
        double c = trapezoid(integrand, kg.spacing()) / factorial(q);
        if (c < 0.0) {
            for (auto& a : polys[q]) a = -a;
            c = -c;
        }
        constants[q] = c;
    }

    ModeBasis b;
    b.kind_ = kind;
    b.kgrid_ = kg;
    b.polys_ = std::move(polys);
    b.constants_ = std::move(constants);
    b.modes_k_.resize(n);
    b.pair_tags_.resize(n);
    for (int q = 0; q < n; ++q) {
        const cd phase = ipow(-q); // (-i)^q
        auto& mode = b.modes_k_[q];
        mode.resize(kg.samples());
        for (int i = 0; i < kg.samples(); ++i)
            mode[i] = phase * poly_eval(b.polys_[q], kg.point(i)) * Psi[i];
        b.labels_.push_back(std::to_string(q));
    }
    return b;
}

std::string to_string(BasisKind kind) {
    switch (kind) {
        case BasisKind::hermite_gauss: return "hermite-gauss";
        case BasisKind::pad: return "pad";
        case BasisKind::ipad: return "ipad";
        case BasisKind::parity: return "parity";
        case BasisKind::splice: return "splice";
    }
    return "unknown";
}

double OutcomeDistribution::total() const {
    if (is_density()) {
        double s = 0.0;
        for (double m : cell_masses()) s += m;
        return s;
    }
    double s = residual;
    for (double p : probabilities) s += p;
    return s;
}

std::vector<double> OutcomeDistribution::cell_masses() const {
    if (!is_density()) throw InputError("cell_masses: discrete distribution");
    std::vector<double> m(grid->samples() - 1);
    const double h = grid->spacing();
    for (int i = 0; i + 1 < grid->samples(); ++i)
        m[i] = 0.5 * (density[i] + density[i + 1]) * h;
    return m;
}

int ModeBasis::size() const {
    if (kind_ == BasisKind::parity) return 2;
    if (kind_ == BasisKind::splice) return 1;
    return static_cast<int>(modes_k_.size());
}

int ModeBasis::find_pair_mode(int pad_lo, int sign) const {
    for (size_t m = 0; m < pair_tags_.size(); ++m)
        if (pair_tags_[m].pad_lo == pad_lo && pair_tags_[m].sign == sign)
            return static_cast<int>(m);
    throw InputError("ipad basis: no mode for pad pair starting at " + std::to_string(pad_lo));
}

ModeBasis pad_basis(const Psf& psf, int max_order) {
    if (max_order < 0 || max_order > 12)
        throw InputError("pad_basis: max_order must be in [0, 12]");
    const Grid& kg = psf.kgrid();
    const auto Psi = psf.spectrum();
    std::vector<double> weight(kg.samples());
    for (int i = 0; i < kg.samples(); ++i) weight[i] = std::norm(Psi[i]);
    auto gs = gram_schmidt_polynomials(kg, weight, max_order);
    return ModeBasis::make_k_space(BasisKind::pad, psf, std::move(gs.polys));
}

ModeBasis hermite_gauss_basis(const Psf& psf, int max_order) {
    if (max_order < 0) throw InputError("hermite_gauss_basis: negative order");
    const double sigma = psf.sigma();
    const double variance = 1.0 / (4.0 * sigma * sigma); // k-space variance of |Psi|^2
    return ModeBasis::make_k_space(BasisKind::hermite_gauss, psf,
                                   hermite_orthonormal(max_order, variance));
}

ModeBasis ipad_pairs(const ModeBasis& pad, int first) {
    if (pad.kind() != BasisKind::pad && pad.kind() != BasisKind::hermite_gauss)
        throw InputError("ipad_pairs: input must be a pad or hermite-gauss basis");
    const int n = pad.size();
    if (n < 2) throw InputError("ipad_pairs: need at least two modes");
    if (first < 0 || first >= n) throw InputError("ipad_pairs: bad first index");

    ModeBasis b;
    b.kind_ = BasisKind::ipad;
    b.kgrid_ = pad.kgrid();
    b.polys_ = pad.generating_polynomials();
    b.constants_ = pad.constants();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int q = 0; q < first; ++q) {
        b.modes_k_.push_back(pad.mode(q));
        b.labels_.push_back(std::to_string(q));
        b.pair_tags_.push_back({-1, 0});
    }
    for (int q = first; q + 1 < n; q += 2) {
        const auto& lo = pad.mode(q);
        const auto& hi = pad.mode(q + 1);
        std::vector<cd> plus(lo.size()), minus(lo.size());
        for (size_t i = 0; i < lo.size(); ++i) {
            plus[i] = (lo[i] + hi[i]) * inv_sqrt2;
            minus[i] = (lo[i] - hi[i]) * inv_sqrt2;
        }
        b.modes_k_.push_back(std::move(plus));
        b.labels_.push_back(std::to_string(q) + "+");
        b.pair_tags_.push_back({q, +1});
        b.modes_k_.push_back(std::move(minus));
        b.labels_.push_back(std::to_string(q) + "-");
        b.pair_tags_.push_back({q, -1});
    }
    // a trailing unpaired mode passes through
    const int paired_end = first + 2 * ((n - first) / 2);
    for (int q = paired_end; q < n; ++q) {
        b.modes_k_.push_back(pad.mode(q));
        b.labels_.push_back(std::to_string(q));
        b.pair_tags_.push_back({-1, 0});
    }
    return b;
}

ModeBasis parity_basis() {
    ModeBasis b;
    b.kind_ = BasisKind::parity;
    b.labels_ = {"even", "odd"};
    return b;
}

ModeBasis splice_mode(const Psf& psf) {
    require_even_psf(psf, "splice_mode");
    const Grid& xg = psf.xgrid();
    const auto psi = psf.amplitude();
    std::vector<double> mode(xg.samples());
    for (int i = 0; i < xg.samples(); ++i) {
        const double x = xg.point(i);
        const double sgn = (x > 0.0) - (x < 0.0);
        mode[i] = sgn * psi[i].real();
    }
    const double nrm = std::sqrt(inner_product(std::span<const double>(mode),
                                               std::span<const double>(mode), xg.spacing()));
    if (!(nrm > 0.0)) throw InputError("splice_mode: degenerate mode");
    for (auto& v : mode) v /= nrm;

    ModeBasis b;
    b.kind_ = BasisKind::splice;
    b.xgrid_ = xg;
    b.mode_x_ = std::move(mode);
    b.labels_ = {"splice"};
    return b;
}

namespace {

cd splice_overlap(const ModeBasis& basis, const Psf& psf, double X) {
    psf.require_shift(X);
    const Grid& xg = basis.xgrid();
    const auto& m = basis.splice_mode_x();
    std::vector<cd> integrand(xg.samples());
    for (int i = 0; i < xg.samples(); ++i)
        integrand[i] = m[i] * psf.amplitude_at(xg.point(i) - X);
    return trapezoid(integrand, xg.spacing());
}

} // namespace

cd overlap(const ModeBasis& basis, int q, const Psf& psf, double X) {
    if (basis.kind() == BasisKind::parity)
        throw InputError("overlap: parity ports have no mode function");
    if (basis.kind() == BasisKind::splice) {
        if (q != 0) throw InputError("overlap: splice basis has a single mode");
        return splice_overlap(basis, psf, X);
    }
    psf.require_shift(X);
    if (!(basis.kgrid() == psf.kgrid()))
        throw InputError("overlap: basis and psf use different frequency grids");
    const auto shifted = psf.shifted_spectrum(X);
    return inner_product(std::span<const cd>(basis.mode(q)), std::span<const cd>(shifted),
                         basis.kgrid().spacing());
}

double splice_derivative_match(const Psf& psf) {
    const auto basis = splice_mode(psf);
    // normalized derivative mode from the spectral derivative
    const Grid& kg = psf.kgrid();
    const auto Psi = psf.spectrum();
    std::vector<cd> dPsi(kg.samples());
    for (int i = 0; i < kg.samples(); ++i) dPsi[i] = cd(0.0, kg.point(i)) * Psi[i];
    std::vector<cd> dpsi = fourier_inverse(kg, dPsi, psf.xgrid());
    const double nrm =
        std::sqrt(std::abs(inner_product(std::span<const cd>(dpsi), std::span<const cd>(dpsi),
                                         psf.xgrid().spacing())));
    std::vector<cd> integrand(dpsi.size());
    const auto& m = basis.splice_mode_x();
    for (size_t i = 0; i < dpsi.size(); ++i) integrand[i] = m[i] * dpsi[i] / nrm;
    return std::abs(trapezoid(std::span<const cd>(integrand), psf.xgrid().spacing()));
}

OutcomeDistribution mode_probabilities(const ModeBasis& basis, const SourceScene& scene,
                                       const Psf& psf) {
    if (basis.kind() == BasisKind::parity) {
        auto d = sliver_probabilities(scene, psf);
        return d;
    }
    const auto points = scene.quadrature_points();
    const int n = basis.size();
    std::vector<double> g(n, 0.0);
    if (basis.kind() == BasisKind::splice) {
        for (const auto& p : points) {
            const cd a = splice_overlap(basis, psf, p.position);
            g[0] += p.weight * std::norm(a);
        }
    } else {
        if (!(basis.kgrid() == psf.kgrid()))
            throw InputError("mode_probabilities: basis and psf frequency grids differ");
        const double hk = basis.kgrid().spacing();
        for (const auto& p : points) {
            psf.require_shift(p.position);
            const auto shifted = psf.shifted_spectrum(p.position);
            for (int q = 0; q < n; ++q) {
                const cd a = inner_product(std::span<const cd>(basis.mode(q)),
                                           std::span<const cd>(shifted), hk);
                g[q] += p.weight * std::norm(a);
            }
        }
    }
    OutcomeDistribution d;
    d.probabilities = std::move(g);
    d.labels = basis.labels();
    double total = 0.0;
    for (double v : d.probabilities) total += v;
    if (total > 1.0 + 1e-9)
        throw StabilityError("mode_probabilities: captured probability exceeds 1 by " +
                             std::to_string(total - 1.0));
    d.residual = std::max(0.0, 1.0 - total);
    return d;
}

OutcomeDistribution direct_intensity(const SourceScene& scene, const Psf& psf,
                                     const Grid& image_grid) {
    const auto points = scene.quadrature_points();
    double extent = 0.0;
    for (const auto& p : points) extent = std::max(extent, std::abs(p.position));
    psf.require_shift(extent);

    std::vector<double> f(image_grid.samples(), 0.0);
    for (const auto& p : points) {
        for (int i = 0; i < image_grid.samples(); ++i)
            f[i] += p.weight * psf.intensity_at(image_grid.point(i) - p.position);
    }
    OutcomeDistribution d;
    d.grid = image_grid;
    d.density = std::move(f);
    return d;
}

OutcomeDistribution sliver_probabilities(const SourceScene& scene, const Psf& psf) {
    require_even_psf(psf, "sliver_probabilities");
    const Grid& kg = psf.kgrid();
    const auto Psi = psf.spectrum();
    const int n = kg.samples();
    // |Psi(k)|^2 paired with the mirrored sample Psi(-k)
    std::vector<cd> parity_kernel(n);
    for (int i = 0; i < n; ++i) parity_kernel[i] = std::conj(Psi[i]) * Psi[n - 1 - i];

    double p_odd = 0.0;
    for (const auto& p : scene.quadrature_points()) {
        psf.require_shift(p.position);
        std::vector<cd> integrand(n);
        const double two_x = 2.0 * p.position;
        for (int i = 0; i < n; ++i)
            integrand[i] = parity_kernel[i] * std::polar(1.0, two_x * kg.point(i));
        const double inversion_overlap =
            trapezoid(std::span<const cd>(integrand), kg.spacing()).real();
        p_odd += p.weight * 0.5 * (1.0 - inversion_overlap);
    }
    p_odd = std::clamp(p_odd, 0.0, 1.0);
    OutcomeDistribution d;
    d.probabilities = {1.0 - p_odd, p_odd};
    d.labels = {"even", "odd"};
    d.residual = 0.0;
    return d;
}

void write_basis_csv(const ModeBasis& basis, const std::string& path) {
    if (basis.kind() == BasisKind::parity)
        throw InputError("write_basis_csv: parity ports have no mode functions");
    std::ofstream out(path);
    if (!out) throw InputError("write_basis_csv: cannot open '" + path + "'");
    if (basis.kind() == BasisKind::splice) {
        out << "x,mode\n";
        const Grid& g = basis.xgrid();
        for (int i = 0; i < g.samples(); ++i)
            out << io::format_double(g.point(i)) << ','
                << io::format_double(basis.splice_mode_x()[i]) << '\n';
        return;
    }
    out << "k";
    for (const auto& label : basis.labels()) out << ",re_" << label << ",im_" << label;
    out << '\n';
    const Grid& g = basis.kgrid();
    for (int i = 0; i < g.samples(); ++i) {
        out << io::format_double(g.point(i));
        for (int q = 0; q < basis.size(); ++q) {
            out << ',' << io::format_double(basis.mode(q)[i].real()) << ','
                << io::format_double(basis.mode(q)[i].imag());
        }
        out << '\n';
    }
}

} // namespace spadesim
