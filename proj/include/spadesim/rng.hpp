#ifndef SPADESIM_RNG_HPP
#define SPADESIM_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace spadesim {

// splitmix64 step; used to derive independent per-trial seeds from a root
// seed and a trial counter, so Monte Carlo streams do not depend on thread
// count or execution order.
uint64_t splitmix64(uint64_t& state);
uint64_t derive_stream_seed(uint64_t root_seed, uint64_t stream);

class TrialRng {
public:
    TrialRng(uint64_t root_seed, uint64_t stream);

    double uniform();                               // [0, 1)
    long long poisson(double mean);
    long long binomial(long long n, double p);
    // one multinomial draw of `total` items over `probs` (need not sum to 1;
    // any deficit is dropped outcomes)
    std::vector<long long> multinomial(long long total, std::span<const double> probs);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace spadesim

#endif
