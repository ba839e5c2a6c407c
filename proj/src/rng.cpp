#include "spadesim/rng.hpp"

#include <algorithm>

namespace spadesim {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t derive_stream_seed(uint64_t root_seed, uint64_t stream) {
    uint64_t s = root_seed ^ (0x7f4a7c15ULL + stream * 0x9e3779b97f4a7c15ULL);
    uint64_t a = splitmix64(s);
    uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

TrialRng::TrialRng(uint64_t root_seed, uint64_t stream)
    : engine_(derive_stream_seed(root_seed, stream)) {}

double TrialRng::uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

long long TrialRng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<long long>(mean)(engine_);
}

long long TrialRng::binomial(long long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<long long>(n, p)(engine_);
}

std::vector<long long> TrialRng::multinomial(long long total, std::span<const double> probs) {
    std::vector<long long> counts(probs.size(), 0);
    double mass = 0.0;
    for (double p : probs) mass += std::max(0.0, p);
    long long remaining = total;
    for (size_t i = 0; i < probs.size() && remaining > 0; ++i) {
        const double p = std::max(0.0, probs[i]);
        if (mass <= 0.0) break;
        const double frac = std::min(1.0, p / mass);
        const long long c = (i + 1 == probs.size() && frac >= 1.0)
                                ? remaining
                                : binomial(remaining, frac);
        counts[i] = c;
        remaining -= c;
        mass -= p;
    }
    return counts;
}

} // namespace spadesim
