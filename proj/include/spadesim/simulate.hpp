#ifndef SPADESIM_SIMULATE_HPP
#define SPADESIM_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "spadesim/modes.hpp"
#include "spadesim/rng.hpp"

namespace spadesim {

// One simulated acquisition: per-outcome counts for mode measurements or a
// list of photon arrival positions for direct imaging.  The (seed, stream)
// pair pins the random stream, so identical inputs reproduce identical data
// regardless of thread count or trial execution order.
struct PhotonData {
    std::vector<long long> counts;
    std::vector<std::string> labels;
    std::vector<double> positions;
    double expected_photons = 0.0;
    uint64_t seed = 0;
    uint64_t stream = 0;

    long long total_count() const;
    nlohmann::json to_json(uint64_t model_hash = 0) const;
    std::string positions_csv() const; // one position per row
};

// independent Poisson counters with means N * g_q (residual included)
PhotonData sample_mode_counts(const OutcomeDistribution& dist, double expected_photons,
                              uint64_t seed, uint64_t stream = 0);

// spatial Poisson process: total ~ Poisson(N), positions i.i.d. from the
// density by inverse CDF with linear interpolation within grid cells
PhotonData sample_direct_positions(const OutcomeDistribution& density, double expected_photons,
                                   uint64_t seed, uint64_t stream = 0);

// weak thermal light over M temporal modes: each mode emits one photon with
// probability epsilon (multiphoton events dropped) routed to outcome q with
// probability outcome_probs[q]
PhotonData sample_thermal_mode_counts(std::span<const double> outcome_probs, double epsilon,
                                      long long temporal_modes, uint64_t seed,
                                      uint64_t stream = 0,
                                      bool second_order_correction = false);

} // namespace spadesim

#endif
