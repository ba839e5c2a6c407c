#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "spadesim/modes.hpp"
#include "spadesim/rng.hpp"
#include "spadesim/stats.hpp"
#include "test_support.hpp"

using namespace spadesim;

namespace {

const Psf& gaussian_psf() {
    static const Psf psf = Psf::gaussian(0.5, Psf::default_xgrid());
    return psf;
}

double gram_entry(const ModeBasis& b, int q, int p) {
    return std::abs(inner_product(std::span<const cd>(b.mode(q)),
                                  std::span<const cd>(b.mode(p)), b.kgrid().spacing()) -
                    (q == p ? cd{1.0, 0.0} : cd{0.0, 0.0}));
}

} // namespace

TEST_SUITE("modes") {

TEST_CASE("gram-schmidt: constant leading polynomial and hermite oracle") {
    const Psf& psf = gaussian_psf();
    std::vector<double> weight(psf.kgrid().samples());
    for (int i = 0; i < psf.kgrid().samples(); ++i) weight[i] = std::norm(psf.spectrum()[i]);
    const auto gs = gram_schmidt_polynomials(psf.kgrid(), weight, 8);

    // b_0 is the normalized constant
    REQUIRE(gs.polys[0].size() == 1);
    CHECK(gs.polys[0][0] == doctest::Approx(1.0).epsilon(1e-9));

    // for a Gaussian weight of variance v the b_q are orthonormalized Hermite
    const double v = 1.0; // sigma = 0.5 -> k-space variance 1/(4 sigma^2) = 1
    const auto oracle = test_support::hermite_oracle(8, v);
    for (int q = 0; q <= 8; ++q)
        for (size_t a = 0; a < gs.polys[q].size(); ++a) {
            const double ref = oracle[q][a];
            if (std::abs(ref) < 1e-9) {
                CHECK(std::abs(gs.polys[q][a]) < 1e-7);
            } else {
                CHECK(gs.polys[q][a] == doctest::Approx(ref).epsilon(1e-6));
            }
        }
    CHECK(gs.gram_condition < 1e12);
}

TEST_CASE("gram-schmidt: first-order polynomial is k/sqrt(v) for any variance") {
    const Psf psf = Psf::gaussian(0.8, Psf::default_xgrid());
    std::vector<double> weight(psf.kgrid().samples());
    for (int i = 0; i < psf.kgrid().samples(); ++i) weight[i] = std::norm(psf.spectrum()[i]);
    const auto gs = gram_schmidt_polynomials(psf.kgrid(), weight, 2);
    const double v = 1.0 / (4.0 * 0.8 * 0.8);
    CHECK(gs.polys[1][0] == doctest::Approx(0.0).scale(1e-7));
    CHECK(gs.polys[1][1] == doctest::Approx(1.0 / std::sqrt(v)).epsilon(1e-7));
}

TEST_CASE("gram-schmidt: degenerate weight trips the conditioning guard") {
    Grid kg(-20.0, 20.0, 64);
    std::vector<double> weight(kg.samples(), 0.0);
    weight[20] = weight[32] = weight[44] = 1.0; // rank-3 weight cannot support order 12
    CHECK_THROWS_AS(gram_schmidt_polynomials(kg, weight, 12), IllConditionedError);
}

TEST_CASE("pad basis: orthonormal modes and closed-form constants") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 8);
    for (int q = 0; q <= 8; ++q)
        for (int p = q; p <= 8; ++p) CHECK(gram_entry(pad, q, p) < 1e-7);

    const double sigma = 0.5;
    CHECK(pad.constants()[1] == doctest::Approx(1.0 / (2.0 * sigma)).epsilon(1e-6));
    double fact = 1.0;
    for (int q = 0; q <= 6; ++q) {
        if (q > 0) fact *= q;
        const double expected = std::pow(2.0 * sigma, -q) / std::sqrt(fact);
        CHECK(pad.constants()[q] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("pad modes factor pointwise into (-i)^q b_q(k) Psi(k)") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 6);
    const cd minus_i{0.0, -1.0};
    for (int q = 0; q <= 6; ++q) {
        cd phase{1.0, 0.0};
        for (int m = 0; m < q; ++m) phase *= minus_i;
        double worst = 0.0;
        for (int i = 0; i < psf.kgrid().samples(); i += 13) {
            const cd expected = phase *
                                poly_eval(pad.generating_polynomials()[q],
                                          psf.kgrid().point(i)) *
                                psf.spectrum()[i];
            worst = std::max(worst, std::abs(pad.mode(q)[i] - expected));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("generating polynomials reject all lower-order monomials") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 6);
    const Grid& kg = psf.kgrid();
    std::vector<double> weight(kg.samples());
    for (int i = 0; i < kg.samples(); ++i) weight[i] = std::norm(psf.spectrum()[i]);
    for (int q = 1; q <= 6; ++q)
        for (int p = 0; p < q; ++p) {
            std::vector<double> integrand(kg.samples());
            for (int i = 0; i < kg.samples(); ++i) {
                const double k = kg.point(i);
                integrand[i] = weight[i] *
                               poly_eval(pad.generating_polynomials()[q], k) *
                               std::pow(k, p);
            }
            CHECK(std::abs(trapezoid(integrand, kg.spacing())) < 1e-7);
        }
}

TEST_CASE("pad basis of a gaussian psf matches hermite-gauss modes") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 8);
    const ModeBasis hg = hermite_gauss_basis(psf, 8);
    for (int q = 0; q <= 8; ++q) {
        double worst = 0.0;
        for (int i = 0; i < psf.kgrid().samples(); ++i)
            worst = std::max(worst, std::abs(pad.mode(q)[i] - hg.mode(q)[i]));
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("ipad pairs stay orthonormal") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 5);
    const ModeBasis ipad = ipad_pairs(pad, 0);
    for (int q = 0; q < ipad.size(); ++q)
        for (int p = q; p < ipad.size(); ++p) CHECK(gram_entry(ipad, q, p) < 1e-7);
    // offset pairing keeps mode 0 unpaired
    const ModeBasis ipad1 = ipad_pairs(pad, 1);
    CHECK(ipad1.pair_tags()[0].sign == 0);
    CHECK(ipad1.find_pair_mode(1, +1) >= 0);
    for (int q = 0; q < ipad1.size(); ++q)
        for (int p = q; p < ipad1.size(); ++p) CHECK(gram_entry(ipad1, q, p) < 1e-7);
}

TEST_CASE("ipad asymmetry against brute-force quadrature") {
    const double sigma = 0.5, X = 0.1;
    const Psf& psf = gaussian_psf();
    const ModeBasis ipad = ipad_pairs(pad_basis(psf, 3), 0);
    const int plus = ipad.find_pair_mode(0, +1);
    const int minus = ipad.find_pair_mode(0, -1);
    const double module_diff =
        std::norm(overlap(ipad, plus, psf, X)) - std::norm(overlap(ipad, minus, psf, X));

    // oracle: analytic fundamental and derivative hermite-gauss modes in x
    Grid fine(-12.0, 12.0, 20001);
    double op = 0.0, om = 0.0;
    {
        std::vector<double> ip(fine.samples()), im(fine.samples());
        for (int i = 0; i < fine.samples(); ++i) {
            const double x = fine.point(i);
            const double f0 = test_support::gaussian_amplitude(sigma, x);
            const double f1 = (x / sigma) * f0;
            const double shifted = test_support::gaussian_amplitude(sigma, x - X);
            ip[i] = (f0 + f1) / std::sqrt(2.0) * shifted;
            im[i] = (f0 - f1) / std::sqrt(2.0) * shifted;
        }
        op = trapezoid(ip, fine.spacing());
        om = trapezoid(im, fine.spacing());
    }
    const double oracle_diff = op * op - om * om;
    CHECK(module_diff == doctest::Approx(oracle_diff).epsilon(1e-6));
    // leading behavior 2 c_0 c_1 X (1 + O(X^2))
    CHECK(module_diff ==
          doctest::Approx(2.0 * ipad.constants()[0] * ipad.constants()[1] * X).epsilon(0.02));
}

TEST_CASE("overlap amplitudes at zero shift") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 6);
    CHECK(std::abs(overlap(pad, 0, psf, 0.0) - cd{1.0, 0.0}) < 1e-8);
    for (int q = 1; q <= 6; ++q) CHECK(std::abs(overlap(pad, q, psf, 0.0)) < 1e-8);
}

TEST_CASE("gaussian mode-2 overlap has the closed poissonian form") {
    const double sigma = 0.5, X = 0.1;
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 4);
    const double Q = X * X / (4.0 * sigma * sigma);
    const double expected = std::exp(-Q) * Q * Q / 2.0;
    CHECK(std::norm(overlap(pad, 2, psf, X)) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("mode probabilities: point source at the origin feeds only mode 0") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 6);
    const auto d = mode_probabilities(pad, SourceScene::points({{0.0, 1.0}}), psf);
    CHECK(d.probabilities[0] == doctest::Approx(1.0).epsilon(1e-8));
    for (int q = 1; q <= 6; ++q) CHECK(d.probabilities[q] < 1e-8);
}

TEST_CASE("two-point mode-1 probability approaches c_1^2 theta^2 / 4") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 6);
    const double theta = 0.05;
    const auto d = mode_probabilities(pad, SourceScene::two_point(theta), psf);
    const double c1 = pad.constants()[1];
    const double leading = c1 * c1 * theta * theta / 4.0;
    CHECK(std::abs(d.probabilities[1] / leading - 1.0) < 0.01);
}

TEST_CASE("subdiffraction scene: g_q approaches c_q^2 theta_2q") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 6);
    const auto scene = SourceScene::uniform(0.05);
    const auto moments = scene.moments(8);
    const auto d = mode_probabilities(pad, scene, psf);
    for (int q : {1, 2}) {
        const double c = pad.constants()[q];
        const double leading = c * c * moments[2 * q];
        CHECK(std::abs(d.probabilities[q] / leading - 1.0) < 0.02);
    }
}

TEST_CASE("background rejection: relative error of the leading term scales as width^2") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 6);
    const std::vector<double> deltas{0.05, 0.1, 0.2, 0.4};
    for (int q : {1, 2}) {
        std::vector<double> err;
        for (double delta : deltas) {
            const auto scene = SourceScene::uniform(delta);
            const auto moments = scene.moments(2 * q);
            const auto d = mode_probabilities(pad, scene, psf);
            const double c = pad.constants()[q];
            err.push_back(std::abs(d.probabilities[q] / (c * c * moments[2 * q]) - 1.0));
        }
        const double slope = fit_loglog(deltas, err).slope;
        CHECK(slope > 1.8);
        CHECK(slope < 2.2);
    }
}

TEST_CASE("completeness: captured plus residual is one") {
    const Psf& psf = gaussian_psf();
    TrialRng rng(21, 0);
    for (int t = 0; t < 10; ++t) {
        const int order = 2 + static_cast<int>(rng.uniform() * 6);
        const ModeBasis pad = pad_basis(psf, order);
        std::vector<PointSource> srcs;
        const int n = 1 + static_cast<int>(rng.uniform() * 3);
        for (int j = 0; j < n; ++j)
            srcs.push_back({1.5 * (rng.uniform() - 0.5), rng.uniform() + 0.1});
        const auto d = mode_probabilities(pad, SourceScene::points(srcs), psf);
        for (double g : d.probabilities) CHECK(g >= 0.0);
        CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(d.residual >= 0.0);
    }
}

TEST_CASE("direct intensity: single source reproduces |psi|^2 and mixtures are linear") {
    const Psf& psf = gaussian_psf();
    const Grid image(-6.0, 6.0, 1501);
    const auto single = direct_intensity(SourceScene::points({{0.0, 1.0}}), psf, image);
    for (int i = 0; i < image.samples(); i += 41) {
        const double expected =
            std::pow(test_support::gaussian_amplitude(0.5, image.point(i)), 2);
        CHECK(std::abs(single.density[i] - expected) < 1e-7);
    }
    std::vector<double> masses = single.cell_masses();
    double total = 0.0;
    for (double v : masses) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));

    const double theta = 0.4;
    const auto mix = direct_intensity(SourceScene::two_point(theta), psf, image);
    const auto left = direct_intensity(SourceScene::points({{-theta / 2, 1.0}}), psf, image);
    const auto right = direct_intensity(SourceScene::points({{theta / 2, 1.0}}), psf, image);
    for (int i = 0; i < image.samples(); i += 67)
        CHECK(mix.density[i] ==
              doctest::Approx(0.5 * left.density[i] + 0.5 * right.density[i]).epsilon(1e-12));
}

TEST_CASE("scenes outside the support margin are rejected") {
    const Psf& psf = gaussian_psf();
    const auto far = SourceScene::points({{8.0, 1.0}});
    CHECK_THROWS_AS(direct_intensity(far, psf, Grid(-6.0, 6.0, 256)), OutOfSupportError);
    const ModeBasis pad = pad_basis(psf, 3);
    CHECK_THROWS_AS(mode_probabilities(pad, far, psf), OutOfSupportError);
}

TEST_CASE("small-separation expansion of the two-point intensity") {
    const Psf& psf = gaussian_psf();
    const double theta = 0.1;
    const Grid image(-6.0, 6.0, 2001);
    const auto mix = direct_intensity(SourceScene::two_point(theta), psf, image);
    const auto d2 = psf.intensity_derivative(2);
    double worst = 0.0;
    for (int i = 0; i < image.samples(); ++i) {
        const double x = image.point(i);
        const double base = psf.intensity_at(x);
        const double d2x = cubic_interpolate(psf.xgrid(), std::span<const double>(d2), x);
        worst = std::max(worst, std::abs(mix.density[i] - (base + theta * theta / 8.0 * d2x)));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("sliver probabilities: central source, closed form, completeness") {
    const Psf& psf = gaussian_psf();
    const auto center = sliver_probabilities(SourceScene::points({{0.0, 1.0}}), psf);
    CHECK(center.probabilities[1] == doctest::Approx(0.0).scale(1e-10));

    const double sigma = 0.5;
    for (double theta : {0.05, 0.1, 0.5, 1.0}) {
        const auto d = sliver_probabilities(SourceScene::two_point(theta), psf);
        const double expected =
            0.5 * (1.0 - std::exp(-theta * theta / (8.0 * sigma * sigma)));
        CHECK(d.probabilities[1] == doctest::Approx(expected).epsilon(1e-6).scale(1e-9));
        CHECK(d.probabilities[0] + d.probabilities[1] == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("sliver rejects an odd psf") {
    const Psf odd = Psf::signum_masked(0.5, Psf::default_xgrid());
    CHECK_THROWS_AS(sliver_probabilities(SourceScene::two_point(0.1), odd), InputError);
}

TEST_CASE("parity consistency with the pad decomposition") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 11);
    const auto scene = SourceScene::two_point(0.3);
    const auto modes = mode_probabilities(pad, scene, psf);
    const auto ports = sliver_probabilities(scene, psf);
    double odd_sum = 0.0;
    for (int q = 1; q <= 11; q += 2) odd_sum += modes.probabilities[q];
    CHECK(odd_sum == doctest::Approx(ports.probabilities[1]).epsilon(1e-6));
}

TEST_CASE("splice mode: unit norm, orthogonality, derivative match") {
    const Psf& psf = gaussian_psf();
    const ModeBasis splice = splice_mode(psf);
    const auto& m = splice.splice_mode_x();
    std::vector<double> sq(m.size());
    for (size_t i = 0; i < m.size(); ++i) sq[i] = m[i] * m[i];
    CHECK(trapezoid(sq, splice.xgrid().spacing()) == doctest::Approx(1.0).epsilon(1e-8));

    // orthogonal to the even fundamental
    std::vector<double> integrand(m.size());
    for (size_t i = 0; i < m.size(); ++i) integrand[i] = m[i] * psf.amplitude()[i].real();
    CHECK(std::abs(trapezoid(integrand, splice.xgrid().spacing())) < 1e-8);

    CHECK(splice_derivative_match(psf) ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-4));
}

TEST_CASE("splice probabilities match the matched-filter signal") {
    const Psf& psf = gaussian_psf();
    const ModeBasis splice = splice_mode(psf);
    const double theta = 0.1;
    const auto d = mode_probabilities(splice, SourceScene::two_point(theta), psf);
    // leading order: (2/pi) c_1^2 theta^2 / 4
    const double c1 = 1.0; // 1/(2 sigma) at sigma = 0.5
    const double expected = (2.0 / std::numbers::pi) * c1 * c1 * theta * theta / 4.0;
    CHECK(d.probabilities[0] == doctest::Approx(expected).epsilon(0.02));
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("basis CSV export") {
    const Psf& psf = gaussian_psf();
    const ModeBasis pad = pad_basis(psf, 2);
    const std::string path = "basis_export_test.csv";
    write_basis_csv(pad, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "k,re_0,im_0,re_1,im_1,re_2,im_2");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == psf.kgrid().samples());
    in.close();
    std::remove(path.c_str());
}

} // TEST_SUITE
