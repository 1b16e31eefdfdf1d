#ifndef SKPCA_FEATURE_MAP_HPP
#define SKPCA_FEATURE_MAP_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "skpca/linalg.hpp"

namespace skpca {

enum class FeatureKind { identity, poly2, rff };

std::string_view to_string(FeatureKind kind);
/// Throws ConfigError for an unknown name.
FeatureKind parse_feature_kind(std::string_view name);

/// Plain description of a feature map. For rff the frequencies are a pure
/// function of (input_dim, feature_dim, rff_bandwidth, rff_seed).
struct FeatureMapSpec {
    FeatureKind kind = FeatureKind::identity;
    std::size_t input_dim = 1;
    std::size_t feature_dim = 1;
    double rff_bandwidth = 1.0;
    std::uint64_t rff_seed = 0;

    static FeatureMapSpec identity(std::size_t d);
    static FeatureMapSpec poly2(std::size_t d);
    static FeatureMapSpec rff(std::size_t d, std::size_t m, double bandwidth, std::uint64_t seed);

    /// Throws InputError when the dimension relations of `kind` do not hold.
    void validate() const;

    friend bool operator==(const FeatureMapSpec&, const FeatureMapSpec&) = default;
};

std::size_t poly2_feature_dim(std::size_t d);

/// Explicit map φ: ℝᵈ → ℝᵐ, immutable once built.
///
/// identity returns x. poly2 returns the homogeneous degree-2 monomials
/// x_i x_j (i ≤ j) with off-diagonal terms scaled by √2, so that
/// ⟨φ(x), φ(y)⟩ = ⟨x, y⟩². rff returns √(2/m)·cos(wⱼᵀx + bⱼ) with
/// wⱼ ~ N(0, σ⁻² I) and bⱼ ~ U[0, 2π), drawn once from rff_seed.
class FeatureMap {
public:
    explicit FeatureMap(FeatureMapSpec spec);

    /// rff map with caller-supplied frequencies (rows of length d) and phases.
    static FeatureMap rff_with(FeatureMapSpec spec, std::vector<std::vector<double>> frequencies,
                               std::vector<double> phases);

    const FeatureMapSpec& spec() const noexcept { return spec_; }
    std::size_t input_dim() const noexcept { return spec_.input_dim; }
    std::size_t feature_dim() const noexcept { return spec_.feature_dim; }

    /// Throws InputError if x.size() != input_dim().
    DenseVector apply(const DenseVector& x) const;

    /// Certified B ≥ ‖φ(x)‖² given generator_bound ≥ ‖x‖².
    double norm_bound(double generator_bound) const;

private:
    FeatureMapSpec spec_;
    std::vector<double> frequencies_;  // m × d row-major, rff only
    std::vector<double> phases_;       // m, rff only
};

}  // namespace skpca

#endif  // SKPCA_FEATURE_MAP_HPP
