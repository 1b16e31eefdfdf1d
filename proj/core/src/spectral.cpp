#include "skpca/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "skpca/error.hpp"

namespace skpca {

namespace {

constexpr double kUnitTolerance = 1e-9;

void require_unit(const DenseVector& v, const char* what) {
    if (v.empty() || std::abs(v.norm() - 1.0) > kUnitTolerance)
        throw InputError(std::string(what) + " must be a unit vector");
}

}  // namespace

SpectralSummary summarize_features(std::span<const DenseVector> features) {
    if (features.empty()) throw InputError("summarize: empty stream");
    const std::size_t m = features.front().size();
    if (m > kMaxOracleDim) {
        throw InputError("summarize: feature dimension " + std::to_string(m) + " exceeds oracle limit");
    }

    // Kahan-compensated outer-product accumulation over the packed triangle.
    const std::size_t packed = SymmetricMatrix::packed_size(m);
    std::vector<double> sum(packed, 0.0), carry(packed, 0.0);
    for (const DenseVector& f : features) {
        if (f.size() != m) throw DimensionError("summarize: inconsistent feature lengths");
        std::size_t idx = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double fi = f[i];
            for (std::size_t j = i; j < m; ++j, ++idx) {
                const double y = fi * f[j] - carry[idx];
                const double t = sum[idx] + y;
                carry[idx] = (t - sum[idx]) - y;
                sum[idx] = t;
            }
        }
    }

    SpectralSummary out;
    out.samples = features.size();
    out.second_moment = SymmetricMatrix::from_packed(m, std::move(sum));
    out.covariance = out.second_moment.scaled(1.0 / static_cast<double>(out.samples));
    out.eig = jacobi_eigendecomposition(out.covariance);

    const double l1 = out.lambda1();
    if (!(l1 > 0.0)) throw DegenerateInputError("summarize: stream has no energy (lambda1 <= 0)");
    const double l2 = out.lambda2();
    out.ratio = (l2 <= kRankOneRelativeThreshold * l1) ? std::numeric_limits<double>::infinity() : l1 / l2;
    out.top_vector = out.eig.vectors.front();
    return out;
}

SpectralSummary summarize(std::span<const DenseVector> xs, const FeatureMap& phi) {
    std::vector<DenseVector> features;
    features.reserve(xs.size());
    for (const DenseVector& x : xs) features.push_back(phi.apply(x));
    return summarize_features(features);
}

AlphaBeta compute_alpha_beta(const SpectralSummary& summary, double eta, const DenseVector& v_star) {
    if (!(eta > 0.0)) throw InputError("compute_alpha_beta: eta must be positive");
    require_unit(v_star, "compute_alpha_beta: v_star");
    const SymmetricMatrix& M = summary.second_moment;
    if (v_star.size() != M.dim()) throw DimensionError("compute_alpha_beta: v_star length mismatch");

    // P M P = M − v (Mv)ᵀ − (Mv) vᵀ + (vᵀMv) v vᵀ
    const std::size_t m = M.dim();
    const DenseVector mv = M.multiply(v_star);
    const double q = dot(v_star, mv);
    SymmetricMatrix projected(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            projected.set(i, j, M(i, j) - v_star[i] * mv[j] - mv[i] * v_star[j] + q * v_star[i] * v_star[j]);
        }
    }
    const EigenDecomposition pe = jacobi_eigendecomposition(projected);

    AlphaBeta ab;
    ab.beta = eta * std::max(0.0, q);
    ab.alpha = eta * std::max(0.0, pe.values.front());
    ab.v_star = v_star;
    return ab;
}

double projection_residual(const DenseVector& v_star, const DenseVector& u) {
    const DenseVector v = v_star.normalized();
    const DenseVector uh = u.normalized();
    return axpy(-dot(uh, v), v, uh).norm();
}

double alignment_error(const DenseVector& x_star, const DenseVector& u) {
    require_unit(x_star, "alignment_error: x*");
    require_unit(u, "alignment_error: u");
    const double c = dot(x_star, u);
    return std::clamp(1.0 - c * c, 0.0, 1.0);
}

}  // namespace skpca
