#ifndef SKPCA_RANDOM_HPP
#define SKPCA_RANDOM_HPP

#include <cstdint>
#include <random>

namespace skpca {

using Rng = std::mt19937_64;

// Independent draw streams that may share one numeric seed.
enum class RngStream : std::uint32_t {
    basis = 1,
    samples = 2,
    init = 3,
    rff = 4,
    pairs = 5,
    monte_carlo = 6,
};

inline Rng make_rng(std::uint64_t seed, RngStream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

}  // namespace skpca

#endif  // SKPCA_RANDOM_HPP
