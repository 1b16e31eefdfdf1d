#include "skpca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "skpca/error.hpp"
#include "skpca/random.hpp"

namespace skpca {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
    for (double x : xs) {
        if (!std::isfinite(x)) throw InputError(std::string(what) + ": non-finite entry");
    }
}

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) {
        throw DimensionError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

// Entries below this magnitude do not decide the sign convention.
constexpr double kSignThreshold = 1e-12;

void canonicalize_sign(std::vector<double>& v) {
    for (double x : v) {
        if (std::abs(x) > kSignThreshold) {
            if (x < 0) {
                for (double& y : v) y = -y;
            }
            return;
        }
    }
}

}  // namespace

// ---------------------------------------------------------------- DenseVector

DenseVector::DenseVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw InputError("DenseVector: length must be positive");
    require_finite(entries_, "DenseVector");
}

DenseVector::DenseVector(std::initializer_list<double> entries)
    : DenseVector(std::vector<double>(entries)) {}

DenseVector DenseVector::zeros(std::size_t length) {
    return DenseVector(std::vector<double>(length, 0.0));
}

DenseVector DenseVector::unit(std::size_t length, std::size_t axis) {
    if (axis >= length) throw InputError("DenseVector::unit: axis out of range");
    std::vector<double> e(length, 0.0);
    e[axis] = 1.0;
    return DenseVector(std::move(e));
}

double DenseVector::squared_norm() const { return dot(entries_, entries_); }

double DenseVector::norm() const {
    const double sq = squared_norm();
    if (std::isnormal(sq) || (sq == 0.0 && max_abs() == 0.0)) return std::sqrt(sq);
    // Squares under- or overflowed: rescale by the largest entry.
    const double scale = max_abs();
    if (!std::isfinite(scale)) return scale;
    double acc = 0.0;
    for (double x : entries_) acc += (x / scale) * (x / scale);
    return scale * std::sqrt(acc);
}

double DenseVector::max_abs() const {
    double m = 0.0;
    for (double x : entries_) m = std::max(m, std::abs(x));
    return m;
}

DenseVector DenseVector::normalized() const {
    const double n = norm();
    if (!(n > 0.0)) throw InputError("cannot normalize the zero vector");
    return scaled(1.0 / n);
}

DenseVector DenseVector::scaled(double factor) const {
    std::vector<double> out(entries_);
    for (double& x : out) x *= factor;
    return DenseVector(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_length(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dot(const DenseVector& a, const DenseVector& b) { return dot(a.entries(), b.entries()); }

DenseVector axpy(double a, const DenseVector& x, const DenseVector& y) {
    require_same_length(x.size(), y.size());
    std::vector<double> out(y.values());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * x[i];
    return DenseVector(std::move(out));
}

DenseVector operator+(const DenseVector& a, const DenseVector& b) { return axpy(1.0, a, b); }

DenseVector operator-(const DenseVector& a, const DenseVector& b) { return axpy(-1.0, b, a); }

// ------------------------------------------------------------ SymmetricMatrix

SymmetricMatrix::SymmetricMatrix(std::size_t dim) : dim_(dim), packed_(packed_size(dim), 0.0) {
    if (dim == 0) throw InputError("SymmetricMatrix: dimension must be positive");
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
    SymmetricMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> diag) {
    SymmetricMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m.set(i, i, diag[i]);
    return m;
}

SymmetricMatrix SymmetricMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    SymmetricMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw DimensionError("from_rows: matrix is not square");
        for (std::size_t j = i; j < rows.size(); ++j) m.set(i, j, rows[i][j]);
    }
    return m;
}

SymmetricMatrix SymmetricMatrix::from_packed(std::size_t dim, std::vector<double> packed) {
    if (packed.size() != packed_size(dim)) throw DimensionError("from_packed: wrong packed length");
    SymmetricMatrix m(dim);
    m.packed_ = std::move(packed);
    return m;
}

DenseVector SymmetricMatrix::multiply(const DenseVector& v) const {
    require_same_length(dim_, v.size());
    std::vector<double> out(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        const double* row = packed_.data() + index(i, i);
        out[i] += row[0] * v[i];
        for (std::size_t j = i + 1; j < dim_; ++j) {
            const double a = row[j - i];
            out[i] += a * v[j];
            out[j] += a * v[i];
        }
    }
    return DenseVector(std::move(out));
}

double SymmetricMatrix::quadratic_form(const DenseVector& v) const { return dot(v, multiply(v)); }

double SymmetricMatrix::max_abs() const {
    double m = 0.0;
    for (double x : packed_) m = std::max(m, std::abs(x));
    return m;
}

bool SymmetricMatrix::all_finite() const {
    return std::all_of(packed_.begin(), packed_.end(), [](double x) { return std::isfinite(x); });
}

SymmetricMatrix SymmetricMatrix::scaled(double factor) const {
    SymmetricMatrix m(*this);
    for (double& x : m.packed_) x *= factor;
    return m;
}

// --------------------------------------------------------- EigenDecomposition

double EigenDecomposition::orthogonality_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i; j < vectors.size(); ++j) {
            const double target = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(dot(vectors[i], vectors[j]) - target));
        }
    }
    return worst;
}

double EigenDecomposition::reconstruction_error(const SymmetricMatrix& a) const {
    require_same_length(a.dim(), dim());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        for (std::size_t j = i; j < a.dim(); ++j) {
            double r = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) r += vectors[k][i] * values[k] * vectors[k][j];
            worst = std::max(worst, std::abs(a(i, j) - r));
        }
    }
    return worst;
}

EigenDecomposition jacobi_eigendecomposition(const SymmetricMatrix& a) {
    const std::size_t n = a.dim();
    if (n == 0) throw InputError("jacobi: empty matrix");
    if (n > kMaxOracleDim) {
        throw InputError("jacobi: dimension " + std::to_string(n) + " exceeds oracle limit " +
                         std::to_string(kMaxOracleDim));
    }
    if (!a.all_finite()) throw InputError("jacobi: non-finite entry");

    // Full row-major working copy; v holds accumulated rotations as columns.
    std::vector<double> w(n * n), v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        v[i * n + i] = 1.0;
        for (std::size_t j = 0; j < n; ++j) w[i * n + j] = a(i, j);
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return w[i * n + j]; };

    double total = 0.0;
    for (double x : w) total += x * x;
    const double threshold = total * 1e-32;

    auto off_diagonal = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * at(i, j) * at(i, j);
        return s;
    };

    bool converged = off_diagonal() <= threshold;
    for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double app = at(p, p);
                const double aqq = at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p];
                    const double vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal() <= threshold;
    }
    if (!converged) throw ConvergenceError("jacobi: no convergence within 100 sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return at(x, x) > at(y, y); });

    EigenDecomposition out;
    out.values.reserve(n);
    out.vectors.reserve(n);
    for (std::size_t k : order) {
        out.values.push_back(at(k, k));
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = v[i * n + k];
        canonicalize_sign(col);
        out.vectors.emplace_back(std::move(col));
    }
    return out;
}

EigenPair power_iteration_top(const SymmetricMatrix& a, double tol, std::size_t max_iters) {
    if (!(tol > 0.0)) throw InputError("power iteration: tol must be positive");
    if (!a.all_finite()) throw InputError("power iteration: non-finite entry");
    const std::size_t n = a.dim();

    // Gershgorin interval [lo, hi] contains the spectrum.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double radius = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) radius += std::abs(a(i, j));
        lo = std::min(lo, a(i, i) - radius);
        hi = std::max(hi, a(i, i) + radius);
    }
    const double target = tol / std::max(1.0, hi - lo);

    Rng rng = make_rng(0x9e3779b97f4a7c15ULL, RngStream::init);
    std::normal_distribution<double> normal;
    std::vector<double> start(n);
    for (double& x : start) x = normal(rng);
    DenseVector v = DenseVector(std::move(start)).normalized();

    auto shifted_apply = [&](const DenseVector& x) { return axpy(-lo, x, a.multiply(x)); };

    double prev_diff = std::numeric_limits<double>::infinity();
    int settled = 0;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        const DenseVector w = shifted_apply(v);
        const double wn = w.norm();
        if (!(wn > 0.0)) {
            // Shifted matrix annihilates v: every eigenvalue equals lo.
            std::vector<double> e(v.values());
            canonicalize_sign(e);
            return {lo, DenseVector(std::move(e))};
        }
        const DenseVector next = w.scaled(1.0 / wn);
        const double diff = (next - v).norm();
        v = next;

        double error_estimate = std::numeric_limits<double>::infinity();
        if (diff == 0.0) {
            error_estimate = 0.0;
        } else if (diff < prev_diff) {
            const double rate = diff / prev_diff;
            error_estimate = diff * rate / (1.0 - rate);
        }
        prev_diff = diff;

        settled = (error_estimate * error_estimate <= 0.1 * target) ? settled + 1 : 0;
        if (settled >= 2 || diff == 0.0) {
            std::vector<double> e(v.values());
            canonicalize_sign(e);
            DenseVector out(std::move(e));
            return {a.quadratic_form(out), out};
        }
    }
    throw ConvergenceError("power iteration: Rayleigh quotient did not stabilize within " +
                           std::to_string(max_iters) + " iterations");
}

}  // namespace skpca
