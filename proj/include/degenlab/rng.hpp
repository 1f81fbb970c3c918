#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace degenlab {

/// Deterministic normal-variate stream. Wraps the (fully specified) mt19937_64
/// engine with an explicit Box-Muller transform so the produced sequence
/// depends only on this code, not on the standard library's distribution
/// internals.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream & 0xffffffffu),
                          static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    /// Uniform double in (0,1], 53-bit resolution.
    double uniform() {
        // (x >> 11) is in [0, 2^53); shift to (0,1] to keep log() finite.
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Substream size used when a sampling task is split into independently
/// seeded chunks. Fixed, so results never depend on how many workers
/// consume the chunks.
inline constexpr std::size_t kSampleChunk = 4096;

} // namespace degenlab
