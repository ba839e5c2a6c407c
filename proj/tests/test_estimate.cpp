#include <doctest.h>

#include <cmath>

#include "spadesim/estimate.hpp"
#include "spadesim/information.hpp"
#include "spadesim/stats.hpp"
#include "test_support.hpp"

using namespace spadesim;

namespace {

constexpr double kSigma = 0.5;

const Psf& psf() {
    static const Psf p = Psf::gaussian(kSigma, Psf::default_xgrid());
    return p;
}

} // namespace

TEST_SUITE("estimate") {

TEST_CASE("zero signal drives the ML separation to the lower bound") {
    const ModeBasis hg = hermite_gauss_basis(psf(), 7);
    const ModeCountModel model(hg, psf());
    PhotonData data;
    data.counts.assign(9, 0); // 8 modes + residual
    data.counts[0] = 1000;    // all photons in the fundamental
    const auto res = ml_separation(data, model, 0.0, 1.0);
    CHECK(res.estimate < 1e-5); // within the optimizer tolerance of zero
    CHECK(!res.flat_likelihood);
}

TEST_CASE("an empty record flags a flat likelihood") {
    const ModeBasis hg = hermite_gauss_basis(psf(), 7);
    const ModeCountModel model(hg, psf());
    PhotonData data;
    data.counts.assign(9, 0);
    const auto res = ml_separation(data, model, 0.0, 1.0);
    CHECK(res.flat_likelihood);
    CHECK(res.estimate == 0.0);
}

TEST_CASE("direct-imaging ML error sits near its Cramer-Rao bound at moderate separation") {
    const double theta = 0.5, photons = 1e4;
    const DirectImagingModel model(psf(), psf().xgrid());
    const auto res = run_ml_trials(model, theta, photons, 1000, 2025, 0.0, 1.5);
    const double fi = fi_direct(separation_family(), psf(), {theta}, psf().xgrid()).scalar_fi();
    const double bound = 1.0 / (photons * fi);
    CHECK(res.mse > 0.8 * bound);
    CHECK(res.mse < 3.0 * bound);
}

TEST_CASE("demultiplexed ML error approaches the quantum bound") {
    const double theta = 0.2, photons = 1e4;
    const ModeBasis hg = hermite_gauss_basis(psf(), 11);
    const ModeCountModel model(hg, psf());
    const auto res = run_ml_trials(model, theta, photons, 300, 17, 0.0, 1.0);
    const double hi = helstrom_onephoton(separation_family(), psf(), {theta}).scalar_hi();
    CHECK(res.mse <= 1.5 / (photons * hi));
}

TEST_CASE("ML at zero separation stays pinned, and the error falls with photon number") {
    const ModeBasis hg = hermite_gauss_basis(psf(), 7);
    const ModeCountModel model(hg, psf());
    // at exactly zero separation only the fundamental fires, so every trial
    // returns the lower bound
    const double tiny = 1e-12;
    const auto at_zero = run_ml_trials(model, tiny, 1e4, 50, 5, 0.0, 1.0);
    CHECK(at_zero.mse <= 1e-11); // pinned at zero within optimizer tolerance

    const double theta = 0.05;
    double previous = 1e308;
    for (double n : {1e3, 1e4, 1e5}) {
        const auto r = run_ml_trials(model, theta, n, 200, 31, 0.0, 1.0);
        CHECK(r.mse < previous * 1.05);
        previous = r.mse;
    }
}

TEST_CASE("even-moment estimator: bias and error against the closed forms") {
    const double delta = 0.1, photons = 1e6;
    const ModeBasis pad = pad_basis(psf(), 5);
    const auto scene = SourceScene::uniform(delta);
    const auto moments = scene.moments(6);
    const auto dist = mode_probabilities(pad, scene, psf());

    PhotonData empty;
    empty.counts.assign(pad.size() + 1, 0);
    CHECK(even_moment_estimate(empty, pad, photons, 1) == 0.0);

    const int trials = 1000;
    std::vector<double> est(trials);
    for (int t = 0; t < trials; ++t)
        est[t] = even_moment_estimate(sample_mode_counts(dist, photons, 808, t), pad,
                                      photons, 1);
    const auto res = EstimatorResult::from_estimates(est, moments[2]);
    const double se = std::sqrt(res.mse / trials);
    CHECK(std::abs(res.bias) <= std::max(0.02 * moments[2], 3.0 * se));
    const double predicted = predicted_even_moment_mse(moments, pad, photons, 1);
    CHECK(std::abs(res.mse / predicted - 1.0) < 0.2);
}

TEST_CASE("odd-moment estimator: symmetric counts cancel; asymmetric scene is recovered") {
    const ModeBasis pad = pad_basis(psf(), 5);
    const ModeBasis ipad = ipad_pairs(pad, 1);

    PhotonData sym;
    sym.counts.assign(ipad.size() + 1, 0);
    sym.counts[ipad.find_pair_mode(1, +1)] = 42;
    sym.counts[ipad.find_pair_mode(1, -1)] = 42;
    CHECK(odd_moment_estimate(sym, ipad, 1e6, 1) == 0.0);

    const double photons = 1e7;
    const auto scene = SourceScene::points({{-0.02, 0.3}, {0.06, 0.7}});
    const auto moments = scene.moments(4);
    const auto dist = mode_probabilities(ipad, scene, psf());
    const int trials = 400;
    std::vector<double> est(trials);
    for (int t = 0; t < trials; ++t)
        est[t] = odd_moment_estimate(sample_mode_counts(dist, photons, 909, t), ipad,
                                     photons, 1);
    const auto res = EstimatorResult::from_estimates(est, moments[3]);
    const double se = std::sqrt(res.mse / trials);
    CHECK(std::abs(res.bias) <= 3.0 * se + 0.02 * std::abs(moments[3]));
    const double predicted = predicted_odd_moment_mse(moments, ipad, photons, 1);
    CHECK(std::abs(res.mse / predicted - 1.0) < 0.3);
}

TEST_CASE("demultiplexed second-moment error beats the direct-imaging bound by 10x") {
    const double delta = 0.05, photons = 1e6;
    const ModeBasis pad = pad_basis(psf(), 5);
    const auto scene = SourceScene::uniform(delta);
    const auto moments = scene.moments(6);
    const auto dist = mode_probabilities(pad, scene, psf());
    const int trials = 400;
    std::vector<double> est(trials);
    for (int t = 0; t < trials; ++t)
        est[t] = even_moment_estimate(sample_mode_counts(dist, photons, 313, t), pad,
                                      photons, 1);
    const auto res = EstimatorResult::from_estimates(est, moments[2]);

    const auto fi = fi_direct_moments(psf(), psf().xgrid(), 4, moments);
    const double direct_crb = crb(fi).matrix(0, 0) / photons; // theta_2 entry
    CHECK(res.mse * 10.0 <= direct_crb);
}

TEST_CASE("estimator batches summarize and export") {
    auto res = EstimatorResult::from_estimates({1.0, 2.0, 3.0}, 2.0);
    CHECK(res.trials == 3);
    CHECK(res.mean == doctest::Approx(2.0));
    CHECK(res.bias == doctest::Approx(0.0));
    CHECK(res.mse == doctest::Approx(2.0 / 3.0));
    CHECK(res.snr == doctest::Approx(4.0 * 3.0 / 2.0));
    CHECK(res.mse >= res.bias * res.bias);
    const auto csv = res.to_csv();
    CHECK(csv.find("trial,estimate,error") == 0);
    const auto j = res.summary_json();
    CHECK(j["trials"] == 3);
}

TEST_CASE("fourier expansion of the reference itself") {
    Grid g(-1.5, 1.5, 1001);
    std::vector<double> G(g.samples());
    for (int i = 0; i < g.samples(); ++i)
        G[i] = std::exp(-g.point(i) * g.point(i) / (2.0 * 0.2 * 0.2));
    // scene = reference: moments of the normalized G itself
    double mass = trapezoid(G, g.spacing());
    std::vector<double> norm(G);
    for (auto& v : norm) v /= mass;
    const auto scene = SourceScene::sampled(g, norm);
    const auto model = fourier_coefficients(scene.moments(6), g, G, 6);
    CHECK(model.coefficients[0] == doctest::Approx(1.0).epsilon(1e-6));
    for (int mu = 1; mu <= 6; ++mu)
        CHECK(std::abs(model.coefficients[mu]) < 1e-6);
}

TEST_CASE("point source at the origin picks out the constant column") {
    Grid g(-1.0, 1.0, 801);
    std::vector<double> G(g.samples());
    for (int i = 0; i < g.samples(); ++i)
        G[i] = std::exp(-g.point(i) * g.point(i) / (2.0 * 0.2 * 0.2));
    const auto scene = SourceScene::points({{0.0, 1.0}});
    const auto model = fourier_coefficients(scene.moments(6), g, G, 6);
    for (int mu = 0; mu <= 6; ++mu)
        CHECK(model.coefficients[mu] ==
              doctest::Approx(model.coefficient_matrix(mu, 0)).epsilon(1e-12));
}

TEST_CASE("higher expansion order improves the uniform-scene reconstruction") {
    const double delta = 0.1;
    Grid g(-1.2, 1.2, 2001);
    std::vector<double> G(g.samples());
    for (int i = 0; i < g.samples(); ++i)
        G[i] = std::exp(-g.point(i) * g.point(i) / (2.0 * 0.15 * 0.15));
    const auto scene = SourceScene::uniform(delta);
    const auto moments = scene.moments(6);

    auto l1_distance = [&](int order) {
        const auto model = fourier_coefficients(moments, g, G, order);
        const auto f = reconstruct_object(model, g, false);
        std::vector<double> diff(g.samples());
        for (int i = 0; i < g.samples(); ++i) {
            const double x = g.point(i);
            const double truth = (std::abs(x) <= delta) ? 1.0 / (2.0 * delta) : 0.0;
            diff[i] = std::abs(f[i] - truth);
        }
        return trapezoid(diff, g.spacing());
    };
    CHECK(l1_distance(6) < l1_distance(2));
}

TEST_CASE("reconstruction: trivial coefficients reproduce the reference") {
    Grid g(-1.0, 1.0, 801);
    std::vector<double> G(g.samples());
    for (int i = 0; i < g.samples(); ++i)
        G[i] = std::exp(-g.point(i) * g.point(i) / (2.0 * 0.2 * 0.2));
    FourierModel model;
    model.grid = g;
    model.reference = G;
    const double mass = trapezoid(model.reference, g.spacing());
    for (auto& v : model.reference) v /= mass;
    model.polynomials = {Poly{1.0}};
    model.coefficient_matrix = Eigen::MatrixXd::Identity(1, 1);
    model.coefficients = {1.0};
    const auto f = reconstruct_object(model, g, false);
    for (int i = 0; i < g.samples(); i += 97)
        CHECK(f[i] == doctest::Approx(model.reference[i]).epsilon(1e-9));
}

TEST_CASE("two-point reconstruction resolves both peaks") {
    const double sep = 0.3, ref_sigma = 0.15;
    Grid g(-8.0 * ref_sigma, 8.0 * ref_sigma, 2001);
    std::vector<double> G(g.samples());
    for (int i = 0; i < g.samples(); ++i)
        G[i] = std::exp(-g.point(i) * g.point(i) / (2.0 * ref_sigma * ref_sigma));
    const auto scene = SourceScene::two_point(sep);
    const auto model = fourier_coefficients(scene.moments(8), g, G, 8);
    const auto f = reconstruct_object(model, g, true);

    std::vector<double> peaks;
    const double fmax = *std::max_element(f.begin(), f.end());
    for (int i = 1; i + 1 < g.samples(); ++i)
        if (f[i] > f[i - 1] && f[i] > f[i + 1] && f[i] > 0.2 * fmax)
            peaks.push_back(g.point(i));
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0] + sep / 2.0) < 0.05);
    CHECK(std::abs(peaks[1] - sep / 2.0) < 0.05);

    // clipping returns a normalized nonnegative density
    for (double v : f) CHECK(v >= 0.0);
    std::vector<double> copy(f.begin(), f.end());
    CHECK(trapezoid(copy, g.spacing()) == doctest::Approx(1.0).epsilon(1e-9));
}

} // TEST_SUITE
