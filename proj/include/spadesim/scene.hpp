#ifndef SPADESIM_SCENE_HPP
#define SPADESIM_SCENE_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spadesim/grid.hpp"

namespace spadesim {

struct PointSource {
    double position = 0.0;
    double weight = 0.0;
};

// Moments theta_mu = Integral X^mu F(X) dX for mu = 0..max order.
class MomentVector {
public:
    explicit MomentVector(std::vector<double> values);
    double operator[](int mu) const { return values_.at(mu); }
    int max_order() const { return static_cast<int>(values_.size()) - 1; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

// Incoherent source density F(X): either exact point masses or a sampled
// density on a grid.  Total mass is 1 after construction; point scenes stay
// exact through the whole pipeline (only the PSF is gridded).
class SourceScene {
public:
    static SourceScene two_point(double separation, double centroid = 0.0);
    static SourceScene points(std::vector<PointSource> sources);
    static SourceScene uniform(double half_width, double centroid = 0.0, int samples = 801);
    static SourceScene sampled(const Grid& grid, std::vector<double> density);
    static SourceScene from_csv(const std::string& path); // two columns: X, F

    bool is_point_scene() const { return !sources_.empty(); }
    const std::vector<PointSource>& point_sources() const { return sources_; }
    const Grid& grid() const;
    std::span<const double> density() const { return density_; }

    // effective half-width: max |X_j| for point scenes, smallest half-width
    // around 0 holding 99.99% of the mass for sampled scenes
    double width() const { return width_; }

    MomentVector moments(int max_order) const;

    // position-scaled and centroid-shifted copies
    SourceScene scaled(double factor) const;
    SourceScene shifted(double offset) const;

    // uniform view used by quadratures: point scenes return their masses,
    // sampled scenes return per-node masses with trapezoid weights
    std::vector<PointSource> quadrature_points() const;
    // a reduced set of representative positions (for basis completion)
    std::vector<double> support_nodes(int max_nodes = 12) const;

private:
    SourceScene() = default;

    std::vector<PointSource> sources_;
    std::optional<Grid> grid_;
    std::vector<double> density_;
    double width_ = 0.0;
};

// Parametric family of scenes for information calculations; parameters are
// named and mapped to a scene, with a finite-difference step per parameter.
struct SceneFamily {
    std::vector<std::string> parameter_names;
    std::function<SourceScene(const std::vector<double>&)> map;
};

SceneFamily separation_family(double centroid = 0.0); // theta = separation
SceneFamily location_family();                        // single source at theta
SceneFamily separation_centroid_family();             // theta = (sep, centroid)
SceneFamily scale_family(SourceScene base);           // positions scaled by theta

// Point masses at fixed Chebyshev nodes xi_j * delta whose weights are
// solved from the requested moment vector (orders 1..num_points-1).  Used
// to study information about individual moments with the others held fixed.
struct MomentFamily {
    SceneFamily family;
    std::vector<double> base_parameters; // moments of the equal-weight base scene
};
MomentFamily moment_scene_family(double delta, int num_points);

} // namespace spadesim

#endif
