#pragma once

#include <cstdint>
#include <random>

namespace deconv::measures {

/// Separates stream families that share a master seed.
enum class StreamDomain : std::uint32_t {
    Data = 0,
    Calibration = 1,
    Coefficients = 2,
    Oracle = 3,
};

/**
 * Deterministic random stream identified by (master seed, stream index, domain).
 *
 * The engine is std::mt19937_64 seeded through std::seed_seq with the five
 * 32-bit words (seed lo, seed hi, index lo, index hi, domain); both are fully
 * specified by the standard, so sequences are bit-identical across platforms.
 * Uniform and normal deviates are derived here rather than through the
 * implementation-defined <random> distributions.
 */
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index, StreamDomain domain = StreamDomain::Data);

    [[nodiscard]] std::uint64_t master_seed() const noexcept { return master_seed_; }
    [[nodiscard]] std::uint64_t stream_index() const noexcept { return stream_index_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_positive() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal by Box-Muller (one deviate per call, the pair partner is discarded).
    double normal();

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::mt19937_64 engine_;
};

}  // namespace deconv::measures
