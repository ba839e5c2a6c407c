#ifndef SPADESIM_MODES_HPP
#define SPADESIM_MODES_HPP

#include <optional>
#include <string>
#include <vector>

#include "spadesim/polynomial.hpp"
#include "spadesim/psf.hpp"
#include "spadesim/scene.hpp"

namespace spadesim {

enum class BasisKind { hermite_gauss, pad, ipad, parity, splice };

std::string to_string(BasisKind kind);

// Measurement outcome space: either a discrete set of mode/port
// probabilities with a residual bucket, or a continuous intensity density
// on an image grid (direct imaging).
struct OutcomeDistribution {
    std::vector<double> probabilities;
    std::vector<std::string> labels;
    double residual = 0.0;

    std::optional<Grid> grid; // set for direct-imaging densities
    std::vector<double> density;

    bool is_density() const { return grid.has_value(); }
    double total() const;
    // per-cell trapezoid masses of a density (size samples-1)
    std::vector<double> cell_masses() const;
};

// Orthonormal measurement modes.  For k-space kinds every mode is stored as
// frequency samples Phi_q(k) on the PSF's frequency grid; the splice mode is
// an image-plane function with a sign flip and keeps x samples instead.
class ModeBasis {
public:
    BasisKind kind() const { return kind_; }
    int size() const;
    const Grid& kgrid() const { return *kgrid_; }
    const std::vector<cd>& mode(int q) const { return modes_k_.at(q); }
    const std::vector<Poly>& generating_polynomials() const { return polys_; }
    const std::vector<double>& constants() const { return constants_; } // c_q
    const std::vector<std::string>& labels() const { return labels_; }

    // ipad bookkeeping: for output mode m, the lower pad index q of its pair
    // and the sign (+1/-1), or sign 0 for an unpaired passthrough mode
    struct PairTag {
        int pad_lo = -1;
        int sign = 0;
    };
    const std::vector<PairTag>& pair_tags() const { return pair_tags_; }
    // index of the "q±" outcome in an ipad basis
    int find_pair_mode(int pad_lo, int sign) const;

    const Grid& xgrid() const { return *xgrid_; }
    const std::vector<double>& splice_mode_x() const { return mode_x_; }

    friend ModeBasis pad_basis(const Psf&, int);
    friend ModeBasis hermite_gauss_basis(const Psf&, int);
    friend ModeBasis ipad_pairs(const ModeBasis&, int);
    friend ModeBasis parity_basis();
    friend ModeBasis splice_mode(const Psf&);

private:
    ModeBasis() = default;
    static ModeBasis make_k_space(BasisKind kind, const Psf& psf, std::vector<Poly> polys);

    BasisKind kind_ = BasisKind::pad;
    std::optional<Grid> kgrid_;
    std::vector<std::vector<cd>> modes_k_;
    std::vector<Poly> polys_;
    std::vector<double> constants_;
    std::vector<std::string> labels_;
    std::vector<PairTag> pair_tags_;
    std::optional<Grid> xgrid_;
    std::vector<double> mode_x_;
};

// PSF-adapted basis Phi_q(k) = (-i)^q b_q(k) Psi(k) with b_q from
// Gram-Schmidt under the weight |Psi(k)|^2.  Constants c_q = <b_q, k^q>/q!
// are recorded with their sign fixed positive.
ModeBasis pad_basis(const Psf& psf, int max_order);

// Hermite-Gaussian modes of width sigma taken from the PSF, built from the
// Hermite recurrence and the analytic Gaussian spectrum (independent of the
// Gram-Schmidt route).
ModeBasis hermite_gauss_basis(const Psf& psf, int max_order);

// Interferometric pairs (phi_q +/- phi_{q+1})/sqrt(2) over disjoint pairs
// (first, first+1), (first+2, first+3), ...; modes below `first` pass
// through unpaired.  first selects which odd moments are reachable.
ModeBasis ipad_pairs(const ModeBasis& pad, int first = 0);

// Two-port parity split (image-inversion interferometry).
ModeBasis parity_basis();

// Half-plane pi phase flip followed by a single-mode filter: the mode
// sgn(x) psi(x), renormalized.
ModeBasis splice_mode(const Psf& psf);

// overlap amplitude <phi_q | psi(.-X)>
cd overlap(const ModeBasis& basis, int q, const Psf& psf, double X);

// quality factor of the splice mode: |<sgn(x) psi | normalized dpsi/dx>|
double splice_derivative_match(const Psf& psf);

// outcome probabilities g_q for a scene (parity kind dispatches to the
// two-port split); residual holds the probability outside the mode set
OutcomeDistribution mode_probabilities(const ModeBasis& basis, const SourceScene& scene,
                                       const Psf& psf);

// direct-imaging intensity density f(x) on the image grid
OutcomeDistribution direct_intensity(const SourceScene& scene, const Psf& psf,
                                     const Grid& image_grid);

// even/odd port probabilities of an image-inversion interferometer
OutcomeDistribution sliver_probabilities(const SourceScene& scene, const Psf& psf);

// CSV export: k, Re Phi_q, Im Phi_q column blocks (x and the real mode for
// the splice kind)
void write_basis_csv(const ModeBasis& basis, const std::string& path);

} // namespace spadesim

#endif
