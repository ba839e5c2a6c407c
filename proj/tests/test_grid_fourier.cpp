#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spadesim/fourier.hpp"
#include "spadesim/parallel.hpp"
#include "spadesim/rng.hpp"
#include "spadesim/stats.hpp"
#include "test_support.hpp"

using namespace spadesim;

TEST_SUITE("grid_fourier") {

TEST_CASE("grid validation and spacing") {
    Grid g(-10.0, 10.0, 4096);
    CHECK(g.spacing() == doctest::Approx(20.0 / 4095));
    CHECK(g.is_symmetric());
    CHECK_THROWS_AS(Grid(-1.0, 1.0, 8), InputError);
    CHECK_THROWS_AS(Grid(1.0, -1.0, 64), InputError);
}

TEST_CASE("trapezoid integrates a gaussian to spectral accuracy") {
    Grid g(-10.0, 10.0, 2048);
    std::vector<double> f(g.samples());
    for (int i = 0; i < g.samples(); ++i)
        f[i] = std::exp(-g.point(i) * g.point(i) / 2.0) / std::sqrt(2.0 * std::numbers::pi);
    CHECK(trapezoid(f, g.spacing()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward transform of a gaussian matches the closed form") {
    const double sigma = 0.5;
    Grid x(-10.0, 10.0, 4096);
    Grid k(-20.0, 20.0, 4096);
    std::vector<cd> psi(x.samples());
    for (int i = 0; i < x.samples(); ++i)
        psi[i] = test_support::gaussian_amplitude(sigma, x.point(i));
    const auto Psi = fourier_forward(x, psi, k);
    const double amp = std::pow(2.0 * sigma * sigma / std::numbers::pi, 0.25);
    for (int i = 0; i < k.samples(); i += 97) {
        const double expected = amp * std::exp(-sigma * sigma * k.point(i) * k.point(i));
        CHECK(Psi[i].real() == doctest::Approx(expected).epsilon(1e-9));
        CHECK(std::abs(Psi[i].imag()) < 1e-12);
    }
}

TEST_CASE("round trip and Parseval") {
    const double sigma = 0.7;
    Grid x(-12.0, 12.0, 3000);
    Grid k(-15.0, 15.0, 3000);
    std::vector<cd> psi(x.samples());
    for (int i = 0; i < x.samples(); ++i)
        psi[i] = test_support::gaussian_amplitude(sigma, x.point(i));
    const auto Psi = fourier_forward(x, psi, k);
    const auto back = fourier_inverse(k, Psi, x);
    double worst = 0.0;
    for (int i = 0; i < x.samples(); ++i) worst = std::max(worst, std::abs(back[i] - psi[i]));
    CHECK(worst < 1e-10);

    std::vector<double> ax(x.samples()), ak(k.samples());
    for (int i = 0; i < x.samples(); ++i) ax[i] = std::norm(psi[i]);
    for (int i = 0; i < k.samples(); ++i) ak[i] = std::norm(Psi[i]);
    CHECK(trapezoid(ax, x.spacing()) ==
          doctest::Approx(trapezoid(ak, k.spacing())).epsilon(1e-10));
}

TEST_CASE("parallel and serial transforms agree bit for bit") {
    Grid x(-10.0, 10.0, 1024);
    Grid k(-20.0, 20.0, 1024);
    std::vector<cd> f(x.samples());
    for (int i = 0; i < x.samples(); ++i)
        f[i] = {std::exp(-x.point(i) * x.point(i)), 0.1 * std::sin(x.point(i))};
    set_max_threads(1);
    const auto serial = fourier_forward(x, f, k);
    set_max_threads(0);
    const auto parallel = fourier_forward(x, f, k);
    set_max_threads(0);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("cubic interpolation error on a smooth function") {
    Grid g(-5.0, 5.0, 2048);
    std::vector<double> f(g.samples());
    for (int i = 0; i < g.samples(); ++i) f[i] = std::sin(2.0 * g.point(i));
    TrialRng rng(7, 0);
    for (int t = 0; t < 200; ++t) {
        const double x = -4.5 + 9.0 * rng.uniform();
        CHECK(cubic_interpolate(g, std::span<const double>(f), x) ==
              doctest::Approx(std::sin(2.0 * x)).epsilon(1e-7));
    }
}

TEST_CASE("chi-square helpers") {
    CHECK(chi_square_sf(0.0, 5) == doctest::Approx(1.0));
    // median of chi2(2) is 2 ln 2
    CHECK(chi_square_quantile(0.5, 2) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-8));
    CHECK(chi_square_sf(chi_square_quantile(0.99, 7), 7) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("loglog slope fit recovers a power law") {
    std::vector<double> xs{0.02, 0.05, 0.1, 0.2};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 * x * x);
    CHECK(fit_loglog(xs, ys).slope == doctest::Approx(2.0).epsilon(1e-12));
}

} // TEST_SUITE
