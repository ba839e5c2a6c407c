#include "spadesim/polynomial.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace spadesim {

double poly_eval(const Poly& p, double x) {
    double r = 0.0;
    for (size_t i = p.size(); i-- > 0;) r = r * x + p[i];
    return r;
}

Poly poly_derivative(const Poly& p) {
    if (p.size() <= 1) return {0.0};
    Poly d(p.size() - 1);
    for (size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<double>(i);
    return d;
}

OrthonormalPolys gram_schmidt_polynomials(const Grid& kgrid, std::span<const double> weight,
                                          int max_order) {
    if (max_order < 0 || max_order > 12)
        throw InputError("gram_schmidt_polynomials: max_order must be in [0, 12]");
    if (static_cast<int>(weight.size()) != kgrid.samples())
        throw InputError("gram_schmidt_polynomials: weight length does not match grid");
    for (double w : weight)
        if (w < -1e-12) throw InputError("gram_schmidt_polynomials: weight must be nonnegative");

    const int n = max_order + 1;
    const double h = kgrid.spacing();

    // moments of the (renormalized) weight up to order 2*max_order
    std::vector<double> moments(2 * max_order + 1, 0.0);
    {
        std::vector<double> integrand(kgrid.samples());
        std::vector<double> kpow(kgrid.samples(), 1.0);
        for (int m = 0; m <= 2 * max_order; ++m) {
            for (int i = 0; i < kgrid.samples(); ++i) integrand[i] = weight[i] * kpow[i];
            moments[m] = trapezoid(integrand, h);
            for (int i = 0; i < kgrid.samples(); ++i) kpow[i] *= kgrid.point(i);
        }
    }
    const double mass = moments[0];
    if (mass <= 0.0) throw InputError("gram_schmidt_polynomials: weight has zero mass");
    for (double& m : moments) m /= mass;

    // variance scaling keeps the monomial Gram matrix scale-free
    const double scale = std::sqrt(std::max(moments.size() > 2 ? moments[2] : 1.0, 1e-300));
    std::vector<double> sm(moments.size());
    double sp = 1.0;
    for (size_t m = 0; m < moments.size(); ++m) {
        sm[m] = moments[m] / sp;
        sp *= scale;
    }

    // Gram matrix of unit-norm scaled monomials; condition check
    Eigen::VectorXd colnorm(n);
    for (int a = 0; a < n; ++a) colnorm(a) = std::sqrt(sm[2 * a]);
    Eigen::MatrixXd gram(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) gram(a, b) = sm[a + b] / (colnorm(a) * colnorm(b));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    double cond = (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12))
        throw IllConditionedError(
            "gram_schmidt_polynomials: monomial Gram condition number " + std::to_string(cond) +
            " exceeds 1e12; reduce max_order or refine the grid");

    // inner product of scaled-coefficient polynomials through the moment table
    auto dot = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
        double s = 0.0;
        for (int a = 0; a < u.size(); ++a) {
            if (u(a) == 0.0) continue;
            for (int b = 0; b < v.size(); ++b) s += u(a) * v(b) * sm[a + b];
        }
        return s;
    };

    // modified Gram-Schmidt with a second elimination pass
    std::vector<Eigen::VectorXd> basis;
    basis.reserve(n);
    for (int q = 0; q < n; ++q) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(q) = 1.0 / colnorm(q);
        for (int pass = 0; pass < 2; ++pass)
            for (int p = 0; p < q; ++p) v -= dot(basis[p], v) * basis[p];
        const double nrm = std::sqrt(dot(v, v));
        if (!(nrm > 0.0) || !std::isfinite(nrm))
            throw IllConditionedError("gram_schmidt_polynomials: degenerate monomial at order " +
                                      std::to_string(q));
        basis.push_back(v / nrm);
    }

    OrthonormalPolys out;
    out.scale = scale;
    out.gram_condition = cond;
    out.polys.reserve(n);
    for (int q = 0; q < n; ++q) {
        Poly p(q + 1, 0.0);
        double spw = std::sqrt(mass); // undo weight renormalization: norm under original weight
        spw = 1.0 / spw;
        double s = 1.0;
        for (int a = 0; a <= q; ++a) {
            p[a] = basis[q](a) / s * spw;
            s *= scale;
        }
        out.polys.push_back(std::move(p));
    }
    return out;
}

std::vector<Poly> hermite_orthonormal(int max_order, double variance) {
    if (max_order < 0) throw InputError("hermite_orthonormal: negative order");
    if (!(variance > 0.0)) throw InputError("hermite_orthonormal: variance must be positive");
    // He polynomials in u, then substitute u = k / sqrt(v)
    std::vector<Poly> he(max_order + 1);
    he[0] = {1.0};
    if (max_order >= 1) he[1] = {0.0, 1.0};
    for (int q = 2; q <= max_order; ++q) {
        Poly p(q + 1, 0.0);
        for (size_t i = 0; i < he[q - 1].size(); ++i) p[i + 1] += he[q - 1][i];
        for (size_t i = 0; i < he[q - 2].size(); ++i) p[i] -= (q - 1) * he[q - 2][i];
        he[q] = std::move(p);
    }
    const double s = std::sqrt(variance);
    std::vector<Poly> out(max_order + 1);
    for (int q = 0; q <= max_order; ++q) {
        double fact = 1.0;
        for (int i = 2; i <= q; ++i) fact *= i;
        Poly p(q + 1, 0.0);
        double sp = 1.0;
        for (int a = 0; a <= q; ++a) {
            p[a] = he[q][a] / sp / std::sqrt(fact);
            sp *= s;
        }
        out[q] = std::move(p);
    }
    return out;
}

} // namespace spadesim
