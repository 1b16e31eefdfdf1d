#ifndef SKPCA_TESTS_SUPPORT_HPP
#define SKPCA_TESTS_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "skpca/linalg.hpp"

namespace skpca::test {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline DenseVector gaussian_vector(std::mt19937_64& g, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = normal(g);
    return DenseVector(std::move(v));
}

inline DenseVector unit_vector(std::mt19937_64& g, std::size_t n) { return gaussian_vector(g, n).normalized(); }

inline SymmetricMatrix random_symmetric(std::mt19937_64& g, std::size_t n) {
    std::normal_distribution<double> normal;
    SymmetricMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a.set(i, j, normal(g));
    return a;
}

// Q diag(λ) Qᵀ with a random orthonormal Q.
inline SymmetricMatrix with_spectrum(std::mt19937_64& g, const std::vector<double>& lambdas) {
    const std::size_t n = lambdas.size();
    std::vector<std::vector<double>> q;
    while (q.size() < n) {
        std::vector<double> v = gaussian_vector(g, n).values();
        for (const auto& u : q) {
            double c = 0.0;
            for (std::size_t k = 0; k < n; ++k) c += u[k] * v[k];
            for (std::size_t k = 0; k < n; ++k) v[k] -= c * u[k];
        }
        double s = 0.0;
        for (double x : v) s += x * x;
        if (s < 1e-8) continue;
        for (double& x : v) x /= std::sqrt(s);
        q.push_back(v);
    }
    SymmetricMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += q[k][i] * lambdas[k] * q[k][j];
            a.set(i, j, s);
        }
    return a;
}

}  // namespace skpca::test

#endif  // SKPCA_TESTS_SUPPORT_HPP
