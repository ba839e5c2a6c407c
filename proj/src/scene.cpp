#include "spadesim/scene.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace spadesim {

MomentVector::MomentVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("moment vector: empty");
    if (std::abs(values_[0] - 1.0) > 1e-9)
        throw InputError("moment vector: zeroth moment must be 1");
    if (values_.size() > 2 && values_[2] < -1e-12)
        throw InputError("moment vector: second moment must be nonnegative");
    if (values_.size() > 2 && values_[2] - values_[1] * values_[1] < -1e-9)
        throw InputError("moment vector: variance must be nonnegative");
}

SourceScene SourceScene::two_point(double separation, double centroid) {
    if (!(separation > 0.0)) throw InputError("two_point scene: separation must be positive");
    return points({{centroid - separation / 2.0, 0.5}, {centroid + separation / 2.0, 0.5}});
}

SourceScene SourceScene::points(std::vector<PointSource> sources) {
    if (sources.empty()) throw InputError("point scene: no sources");
    double total = 0.0;
    for (const auto& s : sources) {
        if (s.weight < -1e-9) throw InputError("point scene: negative weight");
        total += s.weight;
    }
    if (!(total > 0.0)) throw InputError("point scene: zero total weight");
    SourceScene sc;
    sc.sources_ = std::move(sources);
    for (auto& s : sc.sources_) s.weight /= total;
    for (const auto& s : sc.sources_) sc.width_ = std::max(sc.width_, std::abs(s.position));
    return sc;
}

SourceScene SourceScene::uniform(double half_width, double centroid, int samples) {
    if (!(half_width > 0.0)) throw InputError("uniform scene: half width must be positive");
    Grid g(centroid - half_width, centroid + half_width, samples);
    std::vector<double> f(samples, 1.0 / (2.0 * half_width));
    return sampled(g, std::move(f));
}

SourceScene SourceScene::sampled(const Grid& grid, std::vector<double> density) {
    if (static_cast<int>(density.size()) != grid.samples())
        throw InputError("sampled scene: density length does not match grid");
    for (double v : density)
        if (v < -1e-12) throw InputError("sampled scene: density must be nonnegative");
    const double mass = trapezoid(density, grid.spacing());
    if (!(mass > 0.0)) throw InputError("sampled scene: zero mass");
    SourceScene sc;
    sc.grid_ = grid;
    sc.density_ = std::move(density);
    for (auto& v : sc.density_) v /= mass;

    // smallest half-width about 0 containing 99.99% of the mass
    const double target = 0.9999;
    double lo = 0.0, hi = std::max(std::abs(grid.lower()), std::abs(grid.upper()));
    auto captured = [&](double w) {
        double s = 0.0;
        const auto& f = sc.density_;
        for (int i = 0; i + 1 < grid.samples(); ++i) {
            const double a = grid.point(i), b = grid.point(i + 1);
            if (b < -w || a > w) continue;
            const double ca = std::max(a, -w), cb = std::min(b, w);
            s += 0.5 * (f[i] + f[i + 1]) * (cb - ca);
        }
        return s;
    };
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (captured(mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    sc.width_ = hi;
    return sc;
}

SourceScene SourceScene::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("scene: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw InputError("scene: empty file '" + path + "'");
    std::vector<double> xs, fs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x, f;
        if (!(row >> x >> f)) throw InputError("scene: malformed row '" + line + "'");
        xs.push_back(x);
        fs.push_back(f);
    }
    if (xs.size() < 16) throw InputError("scene: need at least 16 samples");
    Grid g(xs.front(), xs.back(), static_cast<int>(xs.size()));
    return sampled(g, std::move(fs));
}

const Grid& SourceScene::grid() const {
    if (!grid_) throw InputError("scene: point scene has no grid");
    return *grid_;
}

namespace {

// composite Simpson (3/8 rule on the tail when the interval count is odd);
// exact for cubic integrands, which trapezoid sums are not
double simpson(std::span<const double> y, double h) {
    const size_t n = y.size();
    if (n < 4) return trapezoid(y, h);
    size_t even_end = n;
    double tail = 0.0;
    if (n % 2 == 0) { // odd interval count: 3/8 rule on the last three cells
        even_end = n - 3;
        tail = 3.0 * h / 8.0 * (y[n - 4] + 3.0 * y[n - 3] + 3.0 * y[n - 2] + y[n - 1]);
    }
    double s = y[0] + y[even_end - 1];
    for (size_t i = 1; i + 1 < even_end; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
    return s * h / 3.0 + tail;
}

} // namespace

MomentVector SourceScene::moments(int max_order) const {
    if (max_order < 0) throw InputError("moments: negative order");
    std::vector<double> th(max_order + 1, 0.0);
    if (is_point_scene()) {
        for (const auto& s : sources_) {
            double p = 1.0;
            for (int mu = 0; mu <= max_order; ++mu) {
                th[mu] += s.weight * p;
                p *= s.position;
            }
        }
    } else {
        std::vector<double> integrand(density_.size());
        double mass = 1.0;
        for (int mu = 0; mu <= max_order; ++mu) {
            for (int i = 0; i < grid_->samples(); ++i)
                integrand[i] = density_[i] * std::pow(grid_->point(i), mu);
            th[mu] = simpson(integrand, grid_->spacing());
            if (mu == 0) {
                mass = th[0];
                th[0] = 1.0;
            } else {
                th[mu] /= mass;
            }
        }
    }
    return MomentVector(std::move(th));
}

SourceScene SourceScene::scaled(double factor) const {
    if (is_point_scene()) {
        auto srcs = sources_;
        for (auto& s : srcs) s.position *= factor;
        return points(std::move(srcs));
    }
    Grid g(grid_->lower() * factor, grid_->upper() * factor, grid_->samples());
    return sampled(g, density_); // renormalized on construction
}

SourceScene SourceScene::shifted(double offset) const {
    if (is_point_scene()) {
        auto srcs = sources_;
        for (auto& s : srcs) s.position += offset;
        return points(std::move(srcs));
    }
    Grid g(grid_->lower() + offset, grid_->upper() + offset, grid_->samples());
    return sampled(g, density_);
}

std::vector<PointSource> SourceScene::quadrature_points() const {
    if (is_point_scene()) return sources_;
    std::vector<PointSource> pts(grid_->samples());
    const double h = grid_->spacing();
    for (int i = 0; i < grid_->samples(); ++i) {
        const double w = (i == 0 || i + 1 == grid_->samples()) ? 0.5 * h : h;
        pts[i] = {grid_->point(i), density_[i] * w};
    }
    return pts;
}

std::vector<double> SourceScene::support_nodes(int max_nodes) const {
    if (is_point_scene()) {
        std::vector<double> xs;
        for (const auto& s : sources_) xs.push_back(s.position);
        return xs;
    }
    // mass quantiles of the sampled density
    std::vector<double> cdf(density_.size(), 0.0);
    const double h = grid_->spacing();
    for (size_t i = 1; i < density_.size(); ++i)
        cdf[i] = cdf[i - 1] + 0.5 * (density_[i] + density_[i - 1]) * h;
    const double total = cdf.back();
    std::vector<double> xs;
    for (int j = 0; j < max_nodes; ++j) {
        const double target = total * (j + 0.5) / max_nodes;
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
        const size_t i = std::min<size_t>(cdf.size() - 1, it - cdf.begin());
        xs.push_back(grid_->point(static_cast<int>(i)));
    }
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

SceneFamily separation_family(double centroid) {
    SceneFamily fam;
    fam.parameter_names = {"separation"};
    fam.map = [centroid](const std::vector<double>& th) {
        return SourceScene::two_point(th.at(0), centroid);
    };
    return fam;
}

SceneFamily location_family() {
    SceneFamily fam;
    fam.parameter_names = {"location"};
    fam.map = [](const std::vector<double>& th) {
        return SourceScene::points({{th.at(0), 1.0}});
    };
    return fam;
}

SceneFamily separation_centroid_family() {
    SceneFamily fam;
    fam.parameter_names = {"separation", "centroid"};
    fam.map = [](const std::vector<double>& th) {
        return SourceScene::two_point(th.at(0), th.at(1));
    };
    return fam;
}

SceneFamily scale_family(SourceScene base) {
    SceneFamily fam;
    fam.parameter_names = {"scale"};
    fam.map = [base = std::move(base)](const std::vector<double>& th) {
        return base.scaled(th.at(0));
    };
    return fam;
}

MomentFamily moment_scene_family(double delta, int num_points) {
    if (!(delta > 0.0)) throw InputError("moment family: delta must be positive");
    if (num_points < 2 || num_points > 12)
        throw InputError("moment family: num_points must be in [2, 12]");
    // Chebyshev-Lobatto nodes in [-1, 1]
    std::vector<double> xi(num_points);
    for (int j = 0; j < num_points; ++j)
        xi[j] = -std::cos(std::numbers::pi * j / (num_points - 1));
    // weights from scaled moments: V w = theta~, V_{nu j} = xi_j^nu
    Eigen::MatrixXd V(num_points, num_points);
    for (int nu = 0; nu < num_points; ++nu)
        for (int j = 0; j < num_points; ++j) V(nu, j) = std::pow(xi[j], nu);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(V);

    MomentFamily out;
    out.family.parameter_names.reserve(num_points - 1);
    for (int mu = 1; mu < num_points; ++mu)
        out.family.parameter_names.push_back("theta_" + std::to_string(mu));
    out.family.map = [delta, xi, lu, num_points](const std::vector<double>& th) {
        Eigen::VectorXd rhs(num_points);
        rhs(0) = 1.0;
        double dp = delta;
        for (int mu = 1; mu < num_points; ++mu) {
            rhs(mu) = th.at(mu - 1) / dp; // scale to the unit interval
            dp *= delta;
        }
        const Eigen::VectorXd w = lu.solve(rhs);
        std::vector<PointSource> srcs(num_points);
        for (int j = 0; j < num_points; ++j) srcs[j] = {xi[j] * delta, w(j)};
        return SourceScene::points(std::move(srcs));
    };

    // base parameters: moments of the equal-weight node scene
    std::vector<PointSource> base(num_points);
    for (int j = 0; j < num_points; ++j) base[j] = {xi[j] * delta, 1.0 / num_points};
    const auto mom = SourceScene::points(base).moments(num_points - 1);
    out.base_parameters.assign(mom.values().begin() + 1, mom.values().end());
    return out;
}

} // namespace spadesim
