#include "spadesim/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "spadesim/io.hpp"
#include "spadesim/parallel.hpp"

namespace spadesim {

namespace {

constexpr double kGolden = 0.61803398874989484;

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    double a = lo, b = hi;
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

// ---- models ---------------------------------------------------------------

ModeCountModel::ModeCountModel(ModeBasis basis, Psf psf, double centroid)
    : basis_(std::move(basis)), psf_(std::move(psf)), centroid_(centroid) {}

OutcomeDistribution ModeCountModel::distribution(double separation) const {
    return mode_probabilities(basis_, SourceScene::two_point(separation, centroid_), psf_);
}

PhotonData ModeCountModel::sample(double separation, double photons, uint64_t seed,
                                  uint64_t stream) const {
    return sample_mode_counts(distribution(separation), photons, seed, stream);
}

std::function<double(double)> ModeCountModel::log_likelihood(const PhotonData& data) const {
    std::vector<long long> counts = data.counts;
    return [this, counts = std::move(counts)](double theta) {
        const auto dist = distribution(theta);
        const size_t n = dist.probabilities.size();
        if (counts.size() != n + 1)
            throw InputError("mode-count likelihood: outcome count mismatch");
        double ll = 0.0;
        for (size_t q = 0; q <= n; ++q) {
            if (counts[q] == 0) continue;
            const double g = (q < n) ? dist.probabilities[q] : dist.residual;
            if (g <= 0.0) return -1e300;
            ll += static_cast<double>(counts[q]) * std::log(g);
        }
        return ll;
    };
}

DirectImagingModel::DirectImagingModel(Psf psf, Grid image_grid, double centroid)
    : psf_(std::move(psf)), image_(image_grid), centroid_(centroid) {}

OutcomeDistribution DirectImagingModel::distribution(double separation) const {
    return direct_intensity(SourceScene::two_point(separation, centroid_), psf_, image_);
}

PhotonData DirectImagingModel::sample(double separation, double photons, uint64_t seed,
                                      uint64_t stream) const {
    return sample_direct_positions(distribution(separation), photons, seed, stream);
}

std::function<double(double)> DirectImagingModel::log_likelihood(const PhotonData& data) const {
    // bin the continuous positions onto the model's image cells once
    std::vector<long long> binned(image_.samples() - 1, 0);
    for (double x : data.positions) {
        if (x < image_.lower() || x >= image_.upper()) continue;
        const int cell = std::min(image_.samples() - 2,
                                  static_cast<int>((x - image_.lower()) / image_.spacing()));
        ++binned[cell];
    }
    return [this, binned = std::move(binned)](double theta) {
        const auto masses = distribution(theta).cell_masses();
        double ll = 0.0;
        for (size_t c = 0; c < binned.size(); ++c) {
            if (binned[c] == 0) continue;
            if (masses[c] <= 0.0) return -1e300;
            ll += static_cast<double>(binned[c]) * std::log(masses[c]);
        }
        return ll;
    };
}

// ---- maximum likelihood ----------------------------------------------------

MlResult ml_separation(const PhotonData& data, const SeparationModel& model, double lower,
                       double upper) {
    if (!(upper > lower)) throw InputError("ml_separation: bad bounds");
    const auto ll = model.log_likelihood(data);

    constexpr int kScan = 33;
    double best = lower, best_ll = -1e308, lo_ll = 1e308, hi_ll = -1e308;
    const double step = (upper - lower) / (kScan - 1);
    std::vector<double> values(kScan);
    for (int i = 0; i < kScan; ++i) {
        const double th = std::max(lower + i * step, lower + 1e-12);
        values[i] = ll(th);
        if (values[i] > best_ll) {
            best_ll = values[i];
            best = th;
        }
        lo_ll = std::min(lo_ll, values[i]);
        hi_ll = std::max(hi_ll, values[i]);
    }
    MlResult res;
    if (hi_ll - lo_ll < 1e-12) {
        res.estimate = lower;
        res.flat_likelihood = true;
        return res;
    }
    const double a = std::max(lower, best - step);
    const double b = std::min(upper, best + step);
    res.estimate = std::clamp(golden_section_max(ll, a, b, 1e-6), lower, upper);
    return res;
}

// ---- moment estimators ------------------------------------------------------

double even_moment_estimate(const PhotonData& counts, const ModeBasis& basis, double photons,
                            int q) {
    if (basis.kind() != BasisKind::pad && basis.kind() != BasisKind::hermite_gauss)
        throw InputError("even_moment_estimate: need a pad or hermite-gauss basis");
    if (q < 0 || q >= basis.size()) throw InputError("even_moment_estimate: bad mode index");
    if (!(photons > 0.0)) throw InputError("even_moment_estimate: photons must be positive");
    const double c = basis.constants().at(q);
    if (!(c > 1e-12)) throw InputError("even_moment_estimate: degenerate basis constant c_q");
    return static_cast<double>(counts.counts.at(q)) / (photons * c * c);
}

double odd_moment_estimate(const PhotonData& counts, const ModeBasis& ipad_basis,
                           double photons, int q) {
    if (ipad_basis.kind() != BasisKind::ipad)
        throw InputError("odd_moment_estimate: need an ipad basis");
    if (!(photons > 0.0)) throw InputError("odd_moment_estimate: photons must be positive");
    const int plus = ipad_basis.find_pair_mode(q, +1);
    const int minus = ipad_basis.find_pair_mode(q, -1);
    const double cq = ipad_basis.constants().at(q);
    const double cq1 = ipad_basis.constants().at(q + 1);
    if (!(cq > 1e-12) || !(cq1 > 1e-12))
        throw InputError("odd_moment_estimate: degenerate basis constants");
    const double diff = static_cast<double>(counts.counts.at(plus)) -
                        static_cast<double>(counts.counts.at(minus));
    return diff / (2.0 * photons * cq * cq1);
}

double predicted_even_moment_mse(const MomentVector& moments, const ModeBasis& basis,
                                 double photons, int q) {
    const double c = basis.constants().at(q);
    return moments[2 * q] / (photons * c * c);
}

double predicted_odd_moment_mse(const MomentVector& moments, const ModeBasis& basis,
                                double photons, int q) {
    const double cq = basis.constants().at(q);
    const double cq1 = basis.constants().at(q + 1);
    return (moments[2 * q] / (cq1 * cq1) + moments[2 * q + 2] / (cq * cq)) / (4.0 * photons);
}

// ---- batch summaries --------------------------------------------------------

EstimatorResult EstimatorResult::from_estimates(std::vector<double> estimates,
                                                double true_value) {
    EstimatorResult r;
    r.estimates = std::move(estimates);
    r.true_value = true_value;
    r.trials = static_cast<int>(r.estimates.size());
    if (r.trials == 0) return r;
    double m = 0.0, sq = 0.0;
    for (double e : r.estimates) {
        m += e;
        sq += (e - true_value) * (e - true_value);
    }
    r.mean = m / r.trials;
    r.bias = r.mean - true_value;
    r.mse = sq / r.trials;
    r.snr = r.mse > 0.0 ? true_value * true_value / r.mse
                        : std::numeric_limits<double>::infinity();
    return r;
}

std::string EstimatorResult::to_csv() const {
    std::string out = "trial,estimate,error\n";
    for (size_t i = 0; i < estimates.size(); ++i) {
        out += std::to_string(i) + ',' + io::format_double(estimates[i]) + ',' +
               io::format_double(estimates[i] - true_value) + '\n';
    }
    return out;
}

nlohmann::json EstimatorResult::summary_json() const {
    nlohmann::json j;
    j["trials"] = trials;
    j["true_value"] = true_value;
    j["mean"] = mean;
    j["bias"] = bias;
    j["mse"] = mse;
    j["snr"] = std::isfinite(snr) ? nlohmann::json(snr) : nlohmann::json();
    return j;
}

EstimatorResult run_ml_trials(const SeparationModel& model, double true_separation,
                              double photons, int trials, uint64_t seed, double lower,
                              double upper) {
    if (trials < 1) throw InputError("run_ml_trials: need at least one trial");
    std::vector<double> estimates(trials);
    parallel_for(trials, [&](int t) {
        const PhotonData data =
            model.sample(true_separation, photons, seed, static_cast<uint64_t>(t));
        estimates[t] = ml_separation(data, model, lower, upper).estimate;
    });
    return EstimatorResult::from_estimates(std::move(estimates), true_separation);
}

// ---- generalized Fourier expansion -------------------------------------------

FourierModel fourier_coefficients(const MomentVector& moments, const Grid& grid,
                                  std::span<const double> reference, int max_order) {
    if (moments.max_order() < max_order)
        throw InputError("fourier_coefficients: moment vector shorter than max_order");
    for (double g : reference)
        if (g < -1e-12) throw InputError("fourier_coefficients: reference must be nonnegative");

    FourierModel model;
    model.grid = grid;
    model.reference.assign(reference.begin(), reference.end());
    // normalize the reference to unit mass
    const double mass = trapezoid(model.reference, grid.spacing());
    if (!(mass > 0.0)) throw InputError("fourier_coefficients: reference has zero mass");
    for (auto& v : model.reference) v /= mass;

    auto gs = gram_schmidt_polynomials(grid, model.reference, max_order);
    model.polynomials = std::move(gs.polys);
    model.coefficient_matrix = Eigen::MatrixXd::Zero(max_order + 1, max_order + 1);
    for (int mu = 0; mu <= max_order; ++mu)
        for (size_t nu = 0; nu < model.polynomials[mu].size(); ++nu)
            model.coefficient_matrix(mu, static_cast<int>(nu)) = model.polynomials[mu][nu];

    model.coefficients.resize(max_order + 1, 0.0);
    for (int mu = 0; mu <= max_order; ++mu) {
        double c = 0.0;
        for (int nu = 0; nu <= mu; ++nu)
            c += model.coefficient_matrix(mu, nu) * moments[nu];
        model.coefficients[mu] = c;
    }
    return model;
}

std::vector<double> reconstruct_object(const FourierModel& model, const Grid& out_grid,
                                       bool clip) {
    std::vector<double> f(out_grid.samples(), 0.0);
    for (int i = 0; i < out_grid.samples(); ++i) {
        const double x = out_grid.point(i);
        const double g =
            cubic_interpolate(model.grid, std::span<const double>(model.reference), x);
        double s = 0.0;
        for (size_t mu = 0; mu < model.coefficients.size(); ++mu)
            s += model.coefficients[mu] * poly_eval(model.polynomials[mu], x);
        f[i] = s * g;
    }
    if (clip) {
        for (auto& v : f) v = std::max(0.0, v);
        const double mass = trapezoid(f, out_grid.spacing());
        if (mass > 0.0)
            for (auto& v : f) v /= mass;
    }
    return f;
}

} // namespace spadesim
