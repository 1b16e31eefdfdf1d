#ifndef SKPCA_LINALG_HPP
#define SKPCA_LINALG_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace skpca {

/// Dense real vector with finite entries.
///
/// A default-constructed vector is empty and only serves as a placeholder;
/// every other constructor requires at least one entry and rejects NaN/Inf
/// with InputError.
class DenseVector {
public:
    DenseVector() = default;
    explicit DenseVector(std::vector<double> entries);
    DenseVector(std::initializer_list<double> entries);

    static DenseVector zeros(std::size_t length);
    static DenseVector unit(std::size_t length, std::size_t axis);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    std::span<const double> entries() const noexcept { return entries_; }
    const std::vector<double>& values() const noexcept { return entries_; }

    double norm() const;
    double squared_norm() const;
    double max_abs() const;

    /// Unit vector in the same direction. Throws InputError on the zero vector.
    DenseVector normalized() const;
    DenseVector scaled(double factor) const;

    friend bool operator==(const DenseVector&, const DenseVector&) = default;

private:
    std::vector<double> entries_;
};

double dot(std::span<const double> a, std::span<const double> b);
double dot(const DenseVector& a, const DenseVector& b);

/// a·x + y
DenseVector axpy(double a, const DenseVector& x, const DenseVector& y);
DenseVector operator+(const DenseVector& a, const DenseVector& b);
DenseVector operator-(const DenseVector& a, const DenseVector& b);

/// Symmetric matrix storing only the upper triangle, row-major packed.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t dim);

    static SymmetricMatrix identity(std::size_t dim);
    static SymmetricMatrix diagonal(std::span<const double> diag);
    /// Builds from a full row-major matrix, reading the upper triangle only.
    static SymmetricMatrix from_rows(const std::vector<std::vector<double>>& rows);
    /// Builds from packed upper-triangle storage of length dim(dim+1)/2.
    static SymmetricMatrix from_packed(std::size_t dim, std::vector<double> packed);

    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return packed_[index(i, j)]; }
    void set(std::size_t i, std::size_t j, double value) { packed_[index(i, j)] = value; }
    std::span<const double> packed() const noexcept { return packed_; }

    DenseVector multiply(const DenseVector& v) const;
    double quadratic_form(const DenseVector& v) const;
    double max_abs() const;
    bool all_finite() const;
    SymmetricMatrix scaled(double factor) const;

    static std::size_t packed_size(std::size_t dim) noexcept { return dim * (dim + 1) / 2; }

private:
    std::size_t index(std::size_t i, std::size_t j) const noexcept {
        if (i > j) std::swap(i, j);
        return i * dim_ - i * (i + 1) / 2 + j;
    }

    std::size_t dim_ = 0;
    std::vector<double> packed_;
};

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
/// vectors[k] pairs with values[k]; each vector's first nonzero entry is positive.
struct EigenDecomposition {
    std::vector<double> values;
    std::vector<DenseVector> vectors;

    std::size_t dim() const noexcept { return values.size(); }
    /// max |QᵀQ − I|
    double orthogonality_error() const;
    /// max |A − Q diag(λ) Qᵀ|
    double reconstruction_error(const SymmetricMatrix& a) const;
};

inline constexpr std::size_t kMaxOracleDim = 2048;
inline constexpr int kMaxJacobiSweeps = 100;

/// Cyclic Jacobi rotations. Deterministic for fixed input.
/// Throws InputError for non-finite entries or dim > kMaxOracleDim, and
/// ConvergenceError if the off-diagonal mass survives kMaxJacobiSweeps sweeps.
EigenDecomposition jacobi_eigendecomposition(const SymmetricMatrix& a);

struct EigenPair {
    double value = 0.0;
    DenseVector vector;
};

/// Top algebraic eigenpair by shifted power iteration.
///
/// The matrix is shifted by its Gershgorin lower bound so the wanted eigenvalue
/// also dominates in magnitude. Iteration stops once the estimated squared
/// angle error is below tol / max(1, spectral spread); the caller must supply a
/// matrix with a spectral gap.
EigenPair power_iteration_top(const SymmetricMatrix& a, double tol, std::size_t max_iters);

}  // namespace skpca

#endif  // SKPCA_LINALG_HPP
