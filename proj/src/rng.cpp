#include "deconv/rng.hpp"

#include <cmath>
#include <numbers>

namespace deconv::measures {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index, StreamDomain domain) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(domain)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index, StreamDomain domain)
    : master_seed_(master_seed), stream_index_(stream_index), engine_(make_engine(master_seed, stream_index, domain)) {}

double RngStream::normal() {
    const double u1 = uniform_positive();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace deconv::measures
