#include "spadesim/information.hpp"

#include <algorithm>
#include <cmath>

#include "spadesim/io.hpp"

namespace spadesim {

namespace {

using Vec = std::vector<double>;

Vec perturbed(const Vec& theta, size_t index, double delta) {
    Vec t = theta;
    t[index] += delta;
    return t;
}

// ---- generic finite-difference Fisher information ------------------------

using DistributionFn = std::function<OutcomeDistribution(const Vec&)>;

Eigen::MatrixXd fisher_discrete(const DistributionFn& model, const Vec& theta,
                                const Vec& steps, double floor) {
    const int npar = static_cast<int>(theta.size());
    const OutcomeDistribution center = model(theta);
    const int n = static_cast<int>(center.probabilities.size());

    // fixed outcome partition: live outcomes vs merged residual bucket
    std::vector<int> live;
    for (int q = 0; q < n; ++q)
        if (center.probabilities[q] >= floor) live.push_back(q);

    auto collapse = [&](const OutcomeDistribution& d) {
        std::vector<double> p(live.size() + 1, 0.0);
        double bucket = d.residual;
        std::vector<char> kept(n, 0);
        for (size_t i = 0; i < live.size(); ++i) {
            p[i] = d.probabilities[live[i]];
            kept[live[i]] = 1;
        }
        for (int q = 0; q < n; ++q)
            if (!kept[q]) bucket += d.probabilities[q];
        p.back() = bucket;
        return p;
    };

    const std::vector<double> p0 = collapse(center);
    std::vector<std::vector<double>> deriv(npar);
    for (int m = 0; m < npar; ++m) {
        const auto pp = collapse(model(perturbed(theta, m, steps[m])));
        const auto pm = collapse(model(perturbed(theta, m, -steps[m])));
        deriv[m].resize(p0.size());
        for (size_t q = 0; q < p0.size(); ++q)
            deriv[m][q] = (pp[q] - pm[q]) / (2.0 * steps[m]);
    }

    Eigen::MatrixXd fi = Eigen::MatrixXd::Zero(npar, npar);
    for (size_t q = 0; q < p0.size(); ++q) {
        if (p0[q] < floor) continue;
        for (int a = 0; a < npar; ++a)
            for (int b = 0; b < npar; ++b) fi(a, b) += deriv[a][q] * deriv[b][q] / p0[q];
    }
    return fi;
}

Eigen::MatrixXd fisher_density(const DistributionFn& model, const Vec& theta,
                               const Vec& steps, double floor) {
    const int npar = static_cast<int>(theta.size());
    const OutcomeDistribution center = model(theta);
    const auto& f0 = center.density;
    const Grid& g = *center.grid;
    const double fmax = *std::max_element(f0.begin(), f0.end());

    std::vector<std::vector<double>> deriv(npar);
    for (int m = 0; m < npar; ++m) {
        const auto fp = model(perturbed(theta, m, steps[m])).density;
        const auto fm = model(perturbed(theta, m, -steps[m])).density;
        deriv[m].resize(f0.size());
        for (size_t i = 0; i < f0.size(); ++i)
            deriv[m][i] = (fp[i] - fm[i]) / (2.0 * steps[m]);
    }

    Eigen::MatrixXd fi = Eigen::MatrixXd::Zero(npar, npar);
    std::vector<double> integrand(f0.size());
    for (int a = 0; a < npar; ++a)
        for (int b = a; b < npar; ++b) {
            for (size_t i = 0; i < f0.size(); ++i)
                integrand[i] =
                    (f0[i] > floor * fmax) ? deriv[a][i] * deriv[b][i] / f0[i] : 0.0;
            const double v = trapezoid(integrand, g.spacing());
            fi(a, b) = v;
            fi(b, a) = v;
        }
    return fi;
}

Eigen::MatrixXd fisher_matrix(const DistributionFn& model, const Vec& theta, const Vec& steps,
                              double floor) {
    if (model(theta).is_density()) return fisher_density(model, theta, steps, floor);
    return fisher_discrete(model, theta, steps, floor);
}

void check_step_stability(const DistributionFn& model, const Vec& theta, const Vec& steps,
                          double floor, const Eigen::MatrixXd& fi, double tol,
                          const char* who) {
    Vec half = steps;
    for (auto& s : half) s *= 0.5;
    const Eigen::MatrixXd fi_half = fisher_matrix(model, theta, half, floor);
    const double scale = std::max(fi.norm(), 1e-300);
    const double change = (fi_half - fi).norm() / scale;
    if (change > tol)
        throw StabilityError(std::string(who) + ": Fisher information changed by " +
                             std::to_string(100.0 * change) +
                             "% when the step halved; derivative step is unstable");
}

Vec default_steps(const Vec& theta, double step) {
    Vec s(theta.size(), step);
    return s;
}

CrbResult invert_info(const Eigen::MatrixXd& info) {
    CrbResult out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
    const auto& vals = es.eigenvalues();
    const double lmax = std::max(vals.maxCoeff(), 0.0);
    const double tol = std::max(lmax, 1.0e-300) * 1e-12;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(vals.size());
    out.rank = 0;
    for (int i = 0; i < vals.size(); ++i) {
        if (vals(i) > tol) {
            inv(i) = 1.0 / vals(i);
            ++out.rank;
        }
    }
    out.singular = out.rank < info.rows();
    out.matrix = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    return out;
}

} // namespace

double InfoReport::scalar_fi() const {
    if (fi.size() == 0) throw InputError("report has no classical Fisher information");
    return fi(0, 0);
}

double InfoReport::scalar_hi() const {
    if (hi.size() == 0) throw InputError("report has no Helstrom information");
    return hi(0, 0);
}

double InfoReport::scalar_crb() const {
    if (crb.size() == 0) throw InputError("report has no bound matrix");
    return crb(0, 0);
}

nlohmann::json InfoReport::to_json() const {
    nlohmann::json j;
    auto dump = [](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(row);
        }
        return rows;
    };
    if (fi.size()) j["fi"] = dump(fi);
    if (hi.size()) j["hi"] = dump(hi);
    if (crb.size()) j["crb"] = dump(crb);
    j["crb_singular"] = crb_singular;
    j["crb_rank"] = crb_rank;
    if (truncation) j["truncation"] = truncation;
    j["step"] = step;
    j["method"] = method;
    j["grid"] = grid_note;
    j["parameters"] = parameter_names;
    if (method == "sld-onephoton") j["sld_residual"] = sld_residual;
    return j;
}

InfoReport fi_direct(const SceneFamily& family, const Psf& psf, const Vec& theta,
                     const Grid& image_grid, const FiOptions& options) {
    if (theta.size() != family.parameter_names.size())
        throw InputError("fi_direct: parameter count mismatch");
    DistributionFn model = [&](const Vec& t) {
        return direct_intensity(family.map(t), psf, image_grid);
    };
    const Vec steps = default_steps(theta, options.step);
    InfoReport rep;
    rep.fi = fisher_matrix(model, theta, steps, options.probability_floor);
    if (options.check_step_stability)
        check_step_stability(model, theta, steps, options.probability_floor, rep.fi,
                             options.stability_tolerance, "fi_direct");
    const auto inv = invert_info(rep.fi);
    rep.crb = inv.matrix;
    rep.crb_singular = inv.singular;
    rep.crb_rank = inv.rank;
    rep.step = options.step;
    rep.method = "classical";
    rep.grid_note = "image[" + io::format_double(image_grid.lower()) + "," +
                    io::format_double(image_grid.upper()) + "]x" +
                    std::to_string(image_grid.samples());
    rep.parameter_names = family.parameter_names;
    return rep;
}

InfoReport fi_modes(const SceneFamily& family, const ModeBasis& basis, const Psf& psf,
                    const Vec& theta, const FiOptions& options) {
    if (theta.size() != family.parameter_names.size())
        throw InputError("fi_modes: parameter count mismatch");
    DistributionFn model = [&](const Vec& t) {
        return mode_probabilities(basis, family.map(t), psf);
    };
    const Vec steps = default_steps(theta, options.step);
    InfoReport rep;
    rep.fi = fisher_matrix(model, theta, steps, options.probability_floor);
    if (options.check_step_stability)
        check_step_stability(model, theta, steps, options.probability_floor, rep.fi,
                             options.stability_tolerance, "fi_modes");
    const auto inv = invert_info(rep.fi);
    rep.crb = inv.matrix;
    rep.crb_singular = inv.singular;
    rep.crb_rank = inv.rank;
    rep.step = options.step;
    rep.method = "classical";
    rep.grid_note = to_string(basis.kind()) + " basis, " + std::to_string(basis.size()) +
                    " outcomes + residual";
    rep.parameter_names = family.parameter_names;
    return rep;
}

SmallSepFi fi_direct_small_sep(const Psf& psf, double theta) {
    if (!(theta > 0.0) || theta > 0.2)
        throw InputError("fi_direct_small_sep: theta must be in (0, 0.2]");
    const auto I = psf.intensity();
    const std::vector<double> d2 = psf.intensity_derivative(2);
    const Grid& g = psf.xgrid();
    const double imax = *std::max_element(I.begin(), I.end());

    auto integrate = [&](bool keep_correction, double floor_rel) {
        const double floor = floor_rel * imax;
        std::vector<double> vals(I.size());
        for (size_t i = 0; i < I.size(); ++i) {
            const double den = keep_correction ? I[i] + theta * theta / 8.0 * d2[i] : I[i];
            vals[i] = den > floor ? d2[i] * d2[i] / den : 0.0;
        }
        return theta * theta / 16.0 * trapezoid(vals, g.spacing());
    };

    SmallSepFi out;
    out.full = integrate(true, 1e-15);
    out.quadratic = integrate(false, 1e-15);
    // When |psi|^2 has interior zeros the no-correction integrand behaves
    // like 1/x^2 there and the grid sum keeps growing under refinement.
    // Flag it when a material share of the integral comes from cells whose
    // intensity is far below the peak.
    double low_intensity_share = 0.0;
    {
        std::vector<double> vals(I.size(), 0.0);
        for (size_t i = 0; i < I.size(); ++i)
            if (I[i] > 1e-15 * imax && I[i] < 1e-4 * imax)
                vals[i] = d2[i] * d2[i] / I[i];
        low_intensity_share = theta * theta / 16.0 * trapezoid(vals, g.spacing());
    }
    if (low_intensity_share > 0.05 * std::abs(out.quadratic)) out.divergence_warning = true;
    return out;
}

// ---- one-photon Helstrom information --------------------------------------

OnePhotonModel OnePhotonModel::build(const Psf& psf, const std::vector<SourceScene>& scenes,
                                     int truncation) {
    if (truncation < 1 || truncation > 24)
        throw InputError("helstrom: truncation must be in [1, 24]");
    OnePhotonModel m;
    m.kgrid_ = psf.kgrid();
    m.psf_ = &psf;
    m.spectrum_.assign(psf.spectrum().begin(), psf.spectrum().end());

    const int nk = m.kgrid_.samples();
    m.sqrt_weights_.resize(nk);
    for (int i = 0; i < nk; ++i) {
        const double w = (i == 0 || i + 1 == nk) ? 0.5 : 1.0;
        m.sqrt_weights_[i] = std::sqrt(w * m.kgrid_.spacing());
    }

    std::vector<double> nodes;
    for (const auto& s : scenes)
        for (double x : s.support_nodes()) nodes.push_back(x);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                nodes.end());

    const int cols = truncation + static_cast<int>(nodes.size());
    Eigen::MatrixXcd A(nk, cols);
    for (int t = 0; t < truncation; ++t) {
        double colmax = 0.0;
        for (int i = 0; i < nk; ++i) {
            const cd v = std::pow(m.kgrid_.point(i), t) * m.spectrum_[i];
            A(i, t) = v * m.sqrt_weights_[i];
            colmax = std::max(colmax, std::abs(A(i, t)));
        }
        if (colmax > 0.0) A.col(t) /= colmax;
    }
    for (size_t j = 0; j < nodes.size(); ++j) {
        const auto s = psf.shifted_spectrum(nodes[j]);
        for (int i = 0; i < nk; ++i)
            A(i, truncation + static_cast<int>(j)) = s[i] * m.sqrt_weights_[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    m.basis_ = qr.householderQ() * Eigen::MatrixXcd::Identity(nk, rank);
    return m;
}

Eigen::MatrixXcd OnePhotonModel::density_matrix(const SourceScene& scene) const {
    const int r = rank();
    const int nk = kgrid_.samples();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(r, r);
    Eigen::VectorXcd state(nk);
    for (const auto& p : scene.quadrature_points()) {
        const auto s = psf_->shifted_spectrum(p.position);
        for (int i = 0; i < nk; ++i) state(i) = s[i] * sqrt_weights_[i];
        const Eigen::VectorXcd coeff = basis_.adjoint() * state;
        rho.noalias() += p.weight * coeff * coeff.adjoint();
    }
    return rho;
}

namespace {

struct SldSolution {
    Eigen::MatrixXd hi;     // information matrix
    double residual = 0.0;  // relative SLD equation residual
};

SldSolution sld_information(const Eigen::MatrixXcd& rho,
                            const std::vector<Eigen::MatrixXcd>& drho, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXcd U = es.eigenvectors();
    const int n = static_cast<int>(lam.size());
    const int npar = static_cast<int>(drho.size());

    std::vector<Eigen::MatrixXcd> B(npar), L(npar);
    for (int m = 0; m < npar; ++m) {
        B[m] = U.adjoint() * drho[m] * U;
        L[m] = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double den = lam(i) + lam(j);
                if (den > floor) L[m](i, j) = 2.0 * B[m](i, j) / den;
            }
    }

    SldSolution out;
    out.hi = Eigen::MatrixXd::Zero(npar, npar);
    for (int a = 0; a < npar; ++a)
        for (int b = 0; b < npar; ++b) {
            cd s = (B[a] * L[b]).trace();
            out.hi(a, b) = s.real();
        }

    // residual of dRho = (rho L + L rho)/2 projected on retained pairs
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (lam(i) + lam(j) <= floor) continue;
            const cd r = B[0](i, j) - 0.5 * (lam(i) + lam(j)) * L[0](i, j);
            num += std::norm(r);
            den += std::norm(B[0](i, j));
        }
    out.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return out;
}

InfoReport helstrom_onephoton_at(const SceneFamily& family, const Psf& psf, const Vec& theta,
                                 const HelstromOptions& options, int truncation) {
    const int npar = static_cast<int>(theta.size());
    std::vector<SourceScene> scenes;
    scenes.push_back(family.map(theta));
    for (int m = 0; m < npar; ++m) {
        scenes.push_back(family.map(perturbed(theta, m, options.step)));
        scenes.push_back(family.map(perturbed(theta, m, -options.step)));
    }
    const auto model = OnePhotonModel::build(psf, scenes, truncation);

    const Eigen::MatrixXcd rho = model.density_matrix(scenes[0]);
    std::vector<Eigen::MatrixXcd> drho(npar);
    for (int m = 0; m < npar; ++m) {
        const Eigen::MatrixXcd rp = model.density_matrix(scenes[1 + 2 * m]);
        const Eigen::MatrixXcd rm = model.density_matrix(scenes[2 + 2 * m]);
        drho[m] = (rp - rm) / (2.0 * options.step);
    }

    const auto sol = sld_information(rho, drho, options.eigenvalue_floor);
    InfoReport rep;
    rep.hi = sol.hi;
    rep.sld_residual = sol.residual;
    const auto inv = invert_info(rep.hi);
    rep.crb = inv.matrix;
    rep.crb_singular = inv.singular;
    rep.crb_rank = inv.rank;
    rep.truncation = truncation;
    rep.step = options.step;
    rep.method = "sld-onephoton";
    rep.grid_note = "rank " + std::to_string(model.rank());
    rep.parameter_names = family.parameter_names;
    return rep;
}

} // namespace

InfoReport helstrom_onephoton(const SceneFamily& family, const Psf& psf, const Vec& theta,
                              const HelstromOptions& options) {
    if (theta.size() != family.parameter_names.size())
        throw InputError("helstrom_onephoton: parameter count mismatch");
    InfoReport rep = helstrom_onephoton_at(family, psf, theta, options, options.truncation);
    if (options.check_truncation_stability) {
        const int bumped = std::min(options.truncation + 4, 24);
        const InfoReport rep2 = helstrom_onephoton_at(family, psf, theta, options, bumped);
        const double change = (rep2.hi - rep.hi).norm() / std::max(rep.hi.norm(), 1e-300);
        if (change > options.stability_tolerance)
            throw StabilityError("helstrom_onephoton: information changed by " +
                                 std::to_string(100.0 * change) +
                                 "% when truncation increased by 4");
    }
    return rep;
}

InfoReport helstrom_thermal(const MatrixFamily& gamma, const Vec& theta, double step) {
    const Eigen::MatrixXcd G = gamma(theta);
    if (G.rows() != G.cols()) throw InputError("helstrom_thermal: Gamma must be square");
    if (G.rows() > 64) throw InputError("helstrom_thermal: dimension must be <= 64");
    if ((G - G.adjoint()).norm() > 1e-10 * std::max(1.0, G.norm()))
        throw InputError("helstrom_thermal: Gamma must be hermitian");

    const int npar = static_cast<int>(theta.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    const Eigen::VectorXd gam = es.eigenvalues();
    const Eigen::MatrixXcd U = es.eigenvectors();
    if (gam.minCoeff() < -1e-10 * std::max(1.0, gam.maxCoeff()))
        throw InputError("helstrom_thermal: Gamma must be positive semidefinite");
    const int n = static_cast<int>(gam.size());

    std::vector<Eigen::MatrixXcd> B(npar), Y(npar);
    const double floor = 1e-14 * std::max(1.0, gam.maxCoeff());
    for (int m = 0; m < npar; ++m) {
        const Eigen::MatrixXcd Gp = gamma(perturbed(theta, m, step));
        const Eigen::MatrixXcd Gm = gamma(perturbed(theta, m, -step));
        const Eigen::MatrixXcd D = (Gp - Gm) / (2.0 * step);
        B[m] = U.adjoint() * D * U;
        // finite differences leave O(step) noise on the null space; only a
        // genuinely large excluded component marks a singular equation
        const double singular_tol = std::max(1e-6, 10.0 * step) * std::max(D.norm(), 1e-300);
        Y[m] = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double den = gam(i) + gam(j) + 2.0 * gam(i) * gam(j);
                if (den > floor)
                    Y[m](i, j) = 2.0 * B[m](i, j) / den;
                else if (std::abs(B[m](i, j)) > singular_tol)
                    throw StabilityError(
                        "helstrom_thermal: derivative has support on the null space of "
                        "Gamma; the solver equation is singular");
            }
    }

    InfoReport rep;
    rep.hi = Eigen::MatrixXd::Zero(npar, npar);
    for (int a = 0; a < npar; ++a)
        for (int b = 0; b < npar; ++b) rep.hi(a, b) = (B[a] * Y[b]).trace().real();
    const auto inv = invert_info(rep.hi);
    rep.crb = inv.matrix;
    rep.crb_singular = inv.singular;
    rep.crb_rank = inv.rank;
    rep.step = step;
    rep.method = "thermal-exact";
    rep.grid_note = "dim " + std::to_string(n);
    for (int m = 0; m < npar; ++m) rep.parameter_names.push_back("theta_" + std::to_string(m));
    return rep;
}

CrbResult crb(const Eigen::MatrixXd& fisher) { return invert_info(fisher); }

Eigen::MatrixXd crb(const InfoReport& report) {
    if (report.fi.size()) return invert_info(report.fi).matrix;
    if (report.hi.size()) return invert_info(report.hi).matrix;
    throw InputError("crb: report carries no information matrix");
}

Eigen::MatrixXd fi_direct_moments(const Psf& psf, const Grid& image_grid, int max_order,
                                  const MomentVector& at) {
    if (max_order < 1 || max_order > 8)
        throw InputError("fi_direct_moments: max_order must be in [1, 8]");
    if (at.max_order() < max_order)
        throw InputError("fi_direct_moments: moment vector shorter than max_order");

    // derivative kernels on the psf grid, interpolated to the image grid
    std::vector<std::vector<double>> kernels(max_order + 1);
    double fact = 1.0;
    for (int mu = 0; mu <= max_order; ++mu) {
        if (mu > 0) fact *= mu;
        const auto d = psf.intensity_derivative(mu);
        auto& k = kernels[mu];
        k.resize(image_grid.samples());
        const double sign = (mu % 2 == 0) ? 1.0 : -1.0;
        for (int i = 0; i < image_grid.samples(); ++i)
            k[i] = sign / fact *
                   cubic_interpolate(psf.xgrid(), std::span<const double>(d),
                                     image_grid.point(i));
    }

    std::vector<double> f(image_grid.samples(), 0.0);
    for (int mu = 0; mu <= max_order; ++mu)
        for (int i = 0; i < image_grid.samples(); ++i) f[i] += at[mu] * kernels[mu][i];
    const double fmax = *std::max_element(f.begin(), f.end());
    const double floor = 1e-15 * fmax;

    Eigen::MatrixXd fi = Eigen::MatrixXd::Zero(max_order, max_order);
    std::vector<double> integrand(image_grid.samples());
    for (int a = 1; a <= max_order; ++a)
        for (int b = a; b <= max_order; ++b) {
            for (int i = 0; i < image_grid.samples(); ++i)
                integrand[i] =
                    (f[i] > floor) ? kernels[a][i] * kernels[b][i] / f[i] : 0.0;
            const double v = trapezoid(integrand, image_grid.spacing());
            fi(a - 1, b - 1) = v;
            fi(b - 1, a - 1) = v;
        }
    return fi;
}

} // namespace spadesim
