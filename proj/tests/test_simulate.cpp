#include <doctest.h>

#include <cmath>

#include "spadesim/simulate.hpp"
#include "spadesim/stats.hpp"
#include "test_support.hpp"

using namespace spadesim;

namespace {

OutcomeDistribution toy_distribution() {
    OutcomeDistribution d;
    d.probabilities = {0.9, 0.1};
    d.labels = {"0", "1"};
    d.residual = 0.0;
    return d;
}

} // namespace

TEST_SUITE("simulate") {

TEST_CASE("zero expected photons give zero counts and no positions") {
    const auto counts = sample_mode_counts(toy_distribution(), 0.0, 1);
    for (long long c : counts.counts) CHECK(c == 0);

    OutcomeDistribution f;
    f.grid = Grid(-5.0, 5.0, 64);
    f.density.assign(64, 0.1);
    const auto pos = sample_direct_positions(f, 0.0, 1);
    CHECK(pos.positions.empty());
}

TEST_CASE("poisson mode counts have the right means") {
    const auto dist = toy_distribution();
    const double n = 1e6;
    const int trials = 1000;
    std::vector<double> c0(trials), c1(trials);
    for (int t = 0; t < trials; ++t) {
        const auto d = sample_mode_counts(dist, n, 2024, t);
        c0[t] = static_cast<double>(d.counts[0]);
        c1[t] = static_cast<double>(d.counts[1]);
    }
    const double se0 = std::sqrt(n * 0.9 / trials);
    const double se1 = std::sqrt(n * 0.1 / trials);
    CHECK(std::abs(mean(c0) - n * 0.9) < 3.0 * se0);
    CHECK(std::abs(mean(c1) - n * 0.1) < 3.0 * se1);
}

TEST_CASE("index of dispersion is one") {
    OutcomeDistribution d;
    d.probabilities = {0.01};
    d.labels = {"0"};
    d.residual = 0.99;
    const double n = 1e4; // mean count 100
    const int trials = 10000;
    std::vector<double> counts(trials);
    for (int t = 0; t < trials; ++t)
        counts[t] = static_cast<double>(sample_mode_counts(d, n, 55, t).counts[0]);
    const double ratio = variance(counts) / mean(counts);
    CHECK(ratio > 0.95);
    CHECK(ratio < 1.05);
}

TEST_CASE("direct positions reproduce the density") {
    const double sigma = 0.5;
    Grid g(-5.0, 5.0, 2001);
    OutcomeDistribution f;
    f.grid = g;
    f.density.resize(g.samples());
    for (int i = 0; i < g.samples(); ++i)
        f.density[i] = std::pow(test_support::gaussian_amplitude(sigma, g.point(i)), 2);

    const double n = 1e5;
    const auto data = sample_direct_positions(f, n, 77);
    CHECK(std::abs(static_cast<double>(data.positions.size()) - n) < 3.0 * std::sqrt(n));

    std::vector<double> xs(data.positions.begin(), data.positions.end());
    const double sample_var = variance(xs);
    // variance of the variance estimator for a normal sample: 2 sigma^4/(n-1)
    const double se = std::sqrt(2.0 / (xs.size() - 1)) * sigma * sigma;
    CHECK(std::abs(sample_var - sigma * sigma) < 3.0 * se);

    // goodness of fit against the sampling density at the 1% level
    const int bins = 40;
    const double lo = -2.0, hi = 2.0;
    std::vector<double> observed(bins, 0.0), expected(bins, 0.0);
    const double width = (hi - lo) / bins;
    for (double x : xs) {
        if (x < lo || x >= hi) continue;
        observed[static_cast<int>((x - lo) / width)] += 1.0;
    }
    const double total = static_cast<double>(xs.size());
    for (int b = 0; b < bins; ++b) {
        const double center = lo + (b + 0.5) * width;
        expected[b] = total * width *
                      std::pow(test_support::gaussian_amplitude(sigma, center), 2);
    }
    const double stat = test_support::chi_square_statistic(observed, expected);
    CHECK(stat < chi_square_quantile(0.99, bins - 1));
}

TEST_CASE("thermal sampler: totals and fractions") {
    const std::vector<double> g{0.5, 0.3, 0.15, 0.05};
    const double eps = 1e-3;
    const long long modes = 1000000;
    const double n = eps * modes;

    const auto zero = sample_thermal_mode_counts(g, 0.0, modes, 3);
    for (long long c : zero.counts) CHECK(c == 0);

    std::vector<double> totals(200);
    std::vector<double> frac0(200);
    for (int t = 0; t < 200; ++t) {
        const auto d = sample_thermal_mode_counts(g, eps, modes, 99, t);
        totals[t] = static_cast<double>(d.total_count());
        frac0[t] = static_cast<double>(d.counts[0]) / std::max(1.0, totals[t]);
    }
    CHECK(std::abs(mean(totals) - n) < 3.0 * std::sqrt(n / 200.0));
    CHECK(std::abs(mean(frac0) - 0.5) < 3.0 * std::sqrt(0.25 / (n * 200)) * 10);
    CHECK_THROWS_AS(sample_thermal_mode_counts(g, 0.5, modes, 1), InputError);
}

TEST_CASE("thermal counts match poisson counts in the weak-source limit") {
    // two-sample chi-square on the count histogram of one outcome
    const std::vector<double> g{0.5, 0.3, 0.15, 0.05};
    const double eps = 1e-3;
    const long long modes = 1000000;
    const double n = eps * modes; // 1000 photons
    OutcomeDistribution dist;
    dist.probabilities = g;
    dist.labels = {"0", "1", "2", "3"};
    dist.residual = 0.0;

    const int trials = 10000;
    const int outcome = 2; // mean count 150
    const double mu = n * g[outcome];
    const double sd = std::sqrt(mu);
    const int bins = 24;
    std::vector<double> a(bins, 0.0), b(bins, 0.0);
    auto bin_of = [&](long long c) {
        const double z = (static_cast<double>(c) - mu) / sd;
        int idx = static_cast<int>(std::floor((z + 3.0) / 6.0 * bins));
        return std::clamp(idx, 0, bins - 1);
    };
    for (int t = 0; t < trials; ++t) {
        a[bin_of(sample_thermal_mode_counts(g, eps, modes, 1234, t).counts[outcome])] += 1.0;
        b[bin_of(sample_mode_counts(dist, n, 4321, t).counts[outcome])] += 1.0;
    }
    // merge sparse bins
    std::vector<double> am, bm;
    double accA = 0.0, accB = 0.0;
    for (int i = 0; i < bins; ++i) {
        accA += a[i];
        accB += b[i];
        if (accA + accB >= 20.0) {
            am.push_back(accA);
            bm.push_back(accB);
            accA = accB = 0.0;
        }
    }
    if (accA + accB > 0.0) {
        am.back() += accA;
        bm.back() += accB;
    }
    double stat = 0.0;
    for (size_t i = 0; i < am.size(); ++i) {
        const double s = am[i] + bm[i];
        if (s <= 0.0) continue;
        const double d = am[i] - bm[i]; // equal sample sizes
        stat += d * d / s;
    }
    CHECK(stat < chi_square_quantile(0.99, static_cast<int>(am.size()) - 1));
}

TEST_CASE("identical seeds reproduce identical data, distinct streams differ") {
    const auto dist = toy_distribution();
    const auto a = sample_mode_counts(dist, 1e4, 7, 3);
    const auto b = sample_mode_counts(dist, 1e4, 7, 3);
    CHECK(a.counts == b.counts);
    const auto c = sample_mode_counts(dist, 1e4, 7, 4);
    CHECK(a.counts != c.counts);

    OutcomeDistribution f;
    f.grid = Grid(-5.0, 5.0, 512);
    f.density.resize(512);
    for (int i = 0; i < 512; ++i)
        f.density[i] = std::pow(test_support::gaussian_amplitude(0.5, f.grid->point(i)), 2);
    const auto p1 = sample_direct_positions(f, 1e3, 7, 3);
    const auto p2 = sample_direct_positions(f, 1e3, 7, 3);
    CHECK(p1.positions == p2.positions);
}

TEST_CASE("photon data serialization") {
    const auto data = sample_mode_counts(toy_distribution(), 1e3, 11, 0);
    const auto j = data.to_json(0xabcdef);
    CHECK(j["seed"] == 11);
    CHECK(j["model_hash"] == 0xabcdef);
    CHECK(j["counts"].size() == 3); // two outcomes + residual
    CHECK(j["labels"].back() == "residual");

    PhotonData pos;
    pos.positions = {0.25, -0.5};
    const auto csv = pos.positions_csv();
    CHECK(csv == "position\n0.25\n-0.5\n");
}

} // TEST_SUITE
