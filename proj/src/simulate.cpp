#include "spadesim/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "spadesim/io.hpp"

namespace spadesim {

long long PhotonData::total_count() const {
    long long t = 0;
    for (long long c : counts) t += c;
    return t + static_cast<long long>(positions.size());
}

nlohmann::json PhotonData::to_json(uint64_t model_hash) const {
    nlohmann::json j;
    j["expected_photons"] = expected_photons;
    j["seed"] = seed;
    j["stream"] = stream;
    if (model_hash) j["model_hash"] = model_hash;
    if (!counts.empty()) {
        j["counts"] = counts;
        j["labels"] = labels;
    }
    if (!positions.empty()) j["positions"] = positions;
    return j;
}

std::string PhotonData::positions_csv() const {
    std::string out = "position\n";
    for (double x : positions) {
        out += io::format_double(x);
        out += '\n';
    }
    return out;
}

PhotonData sample_mode_counts(const OutcomeDistribution& dist, double expected_photons,
                              uint64_t seed, uint64_t stream) {
    if (dist.is_density())
        throw InputError("sample_mode_counts: expected a discrete distribution");
    if (expected_photons < 0.0)
        throw InputError("sample_mode_counts: negative photon number");
    TrialRng rng(seed, stream);
    PhotonData data;
    data.expected_photons = expected_photons;
    data.seed = seed;
    data.stream = stream;
    data.labels = dist.labels;
    data.labels.push_back("residual");
    data.counts.reserve(dist.probabilities.size() + 1);
    for (double g : dist.probabilities)
        data.counts.push_back(rng.poisson(expected_photons * std::max(0.0, g)));
    data.counts.push_back(rng.poisson(expected_photons * std::max(0.0, dist.residual)));
    return data;
}

PhotonData sample_direct_positions(const OutcomeDistribution& density, double expected_photons,
                                   uint64_t seed, uint64_t stream) {
    if (!density.is_density())
        throw InputError("sample_direct_positions: expected a density on a grid");
    if (expected_photons < 0.0)
        throw InputError("sample_direct_positions: negative photon number");
    const Grid& g = *density.grid;
    const auto masses = density.cell_masses();
    std::vector<double> cdf(masses.size() + 1, 0.0);
    for (size_t i = 0; i < masses.size(); ++i) cdf[i + 1] = cdf[i] + std::max(0.0, masses[i]);
    const double total = cdf.back();
    if (!(total > 0.0)) throw InputError("sample_direct_positions: degenerate density");

    TrialRng rng(seed, stream);
    PhotonData data;
    data.expected_photons = expected_photons;
    data.seed = seed;
    data.stream = stream;
    const long long n = rng.poisson(expected_photons);
    data.positions.resize(n);
    for (long long i = 0; i < n; ++i) {
        const double u = rng.uniform() * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        size_t cell = std::min(masses.size() - 1,
                               static_cast<size_t>(std::max<long>(0, it - cdf.begin() - 1)));
        const double span = cdf[cell + 1] - cdf[cell];
        const double frac = span > 0.0 ? (u - cdf[cell]) / span : 0.5;
        data.positions[i] = g.point(static_cast<int>(cell)) + frac * g.spacing();
    }
    return data;
}

PhotonData sample_thermal_mode_counts(std::span<const double> outcome_probs, double epsilon,
                                      long long temporal_modes, uint64_t seed, uint64_t stream,
                                      bool second_order_correction) {
    if (epsilon < 0.0 || epsilon > 0.1)
        throw InputError("sample_thermal_mode_counts: epsilon must be in [0, 0.1]");
    if (temporal_modes < 0)
        throw InputError("sample_thermal_mode_counts: negative temporal mode count");
    TrialRng rng(seed, stream);
    PhotonData data;
    data.expected_photons = epsilon * static_cast<double>(temporal_modes);
    data.seed = seed;
    data.stream = stream;
    const double emit = second_order_correction ? epsilon * (1.0 - 0.5 * epsilon) : epsilon;
    const long long photons = rng.binomial(temporal_modes, emit);
    data.counts = rng.multinomial(photons, outcome_probs);
    for (size_t q = 0; q < outcome_probs.size(); ++q)
        data.labels.push_back("outcome_" + std::to_string(q));
    return data;
}

} // namespace spadesim
