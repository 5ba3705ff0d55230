#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace dpi {

/// Recorded in every output that depends on random numbers.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64; stream seed = splitmix64 output #(stream+1) from the root seed; "
    "uniform = (x >> 11) * 2^-53; normal = Marsaglia polar";

/// The (stream+1)-th output of a SplitMix64 generator started at `root`.
[[nodiscard]] constexpr std::uint64_t stream_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t z = root + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Portable random stream; the std distributions are implementation-defined,
/// so the transforms here are written out explicitly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t root, std::uint64_t stream) : engine_(stream_seed(root, stream)) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [-1, 1).
    double symmetric() { return 2.0 * uniform() - 1.0; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = symmetric();
            v = symmetric();
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dpi
