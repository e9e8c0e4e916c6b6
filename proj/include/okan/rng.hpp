#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace okan {

/// Seeded random source with platform-independent output.
///
/// Bits come from std::mt19937_64, whose sequence is fixed by the standard.
/// Uniform doubles take the top 53 bits; normal variates use the Marsaglia
/// polar method. The standard <random> distributions are avoided because their
/// algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Unbiased integer in [0, n).
    std::size_t below(std::size_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer applied to (master, stream); used for per-block and per-model seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Fisher-Yates shuffle driven by Rng (std::shuffle is implementation-defined).
template <class T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace okan
