#ifndef SKPCA_SPECTRAL_HPP
#define SKPCA_SPECTRAL_HPP

#include <cstddef>
#include <limits>
#include <span>

#include "skpca/feature_map.hpp"
#include "skpca/linalg.hpp"

namespace skpca {

/// Offline ground truth for one replayed stream in feature space.
struct SpectralSummary {
    std::size_t samples = 0;
    SymmetricMatrix second_moment;  // M = Σᵢ φ(xᵢ)φ(xᵢ)ᵀ
    SymmetricMatrix covariance;     // Σ = M / n
    EigenDecomposition eig;         // of Σ
    double ratio = 1.0;             // λ₁/λ₂, +∞ when λ₂ ≤ 1e-12·λ₁
    DenseVector top_vector;         // x*

    double lambda1() const { return eig.values.at(0); }
    double lambda2() const { return eig.values.size() > 1 ? eig.values[1] : 0.0; }
    bool infinite_ratio() const { return ratio == std::numeric_limits<double>::infinity(); }
};

inline constexpr double kRankOneRelativeThreshold = 1e-12;

/// One compensated pass over the stream. Throws DegenerateInputError if the
/// stream has no energy, InputError if m exceeds the oracle limit.
SpectralSummary summarize(std::span<const DenseVector> xs, const FeatureMap& phi);
/// Same, with φ already applied.
SpectralSummary summarize_features(std::span<const DenseVector> features);

struct AlphaBeta {
    double alpha = 0.0;  // η · λ_max(P M P)
    double beta = 0.0;   // η · v*ᵀ M v*
    DenseVector v_star;
};

/// Throws InputError unless ‖v*‖ = 1 within 1e-9 and η > 0.
AlphaBeta compute_alpha_beta(const SpectralSummary& summary, double eta, const DenseVector& v_star);

/// ‖(I − v*v*ᵀ)û‖ with û = u/‖u‖, without forming the projector.
double projection_residual(const DenseVector& v_star, const DenseVector& u);

/// 1 − ⟨x*, u⟩², clamped to [0, 1]. Both inputs must be unit within 1e-9.
double alignment_error(const DenseVector& x_star, const DenseVector& u);

}  // namespace skpca

#endif  // SKPCA_SPECTRAL_HPP
