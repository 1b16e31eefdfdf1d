#ifndef SKPCA_DATAGEN_HPP
#define SKPCA_DATAGEN_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "skpca/linalg.hpp"
#include "skpca/random.hpp"

namespace skpca {

/// Gaussian spiked-covariance stream: population spectrum
/// λ₁, λ₂, λ₂·decay, λ₂·decay², … along a random orthonormal basis.
struct SpikedSpec {
    std::size_t input_dim = 1;
    std::size_t n = 1;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double tail_decay = 1.0;
    std::uint64_t basis_seed = 0;
    std::uint64_t sample_seed = 0;

    /// Throws InputError on an invalid spec.
    void validate() const;
    std::vector<double> spectrum() const;
    double target_ratio() const { return lambda1 / lambda2; }
    /// λ₁·(d + 10√d + 50), a 99.99th-percentile guard on ‖x‖².
    double certified_bound() const;

    friend bool operator==(const SpikedSpec&, const SpikedSpec&) = default;
};

struct PopulationTruth {
    std::vector<double> lambdas;
    DenseVector top_direction;
    double ratio = 1.0;
    double certified_bound = 0.0;
};

/// Lazily emits samples; memory is O(d²) for the basis, independent of n.
/// Samples whose squared norm exceeds the certified bound are redrawn from the
/// same sample stream so the bound holds exactly.
class SpikedGenerator {
public:
    explicit SpikedGenerator(const SpikedSpec& spec);

    const SpikedSpec& spec() const noexcept { return spec_; }
    const PopulationTruth& truth() const noexcept { return truth_; }
    const std::vector<DenseVector>& basis() const noexcept { return basis_; }
    std::size_t redrawn() const noexcept { return redrawn_; }

    DenseVector next();

private:
    SpikedSpec spec_;
    PopulationTruth truth_;
    std::vector<DenseVector> basis_;
    std::vector<double> scales_;
    Rng sample_rng_;
    std::size_t redrawn_ = 0;
};

struct SpikedStream {
    std::vector<DenseVector> samples;
    PopulationTruth truth;
    std::size_t redrawn = 0;
};

SpikedStream make_spiked_stream(const SpikedSpec& spec);

/// Fraction of N draws a ~ N(0,1) with ‖a·u + v‖ ≥ δ‖u‖.
double monte_carlo_offset_norm(const DenseVector& u, const DenseVector& v, double delta, std::size_t trials,
                               std::uint64_t seed);

}  // namespace skpca

#endif  // SKPCA_DATAGEN_HPP
