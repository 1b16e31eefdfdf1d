#include "skpca/datagen.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "skpca/error.hpp"

namespace skpca {

void SpikedSpec::validate() const {
    if (input_dim == 0) throw InputError("spiked spec: input_dim must be positive");
    if (n == 0) throw InputError("spiked spec: n must be positive");
    if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) throw InputError("spiked spec: lambda1 must be positive");
    if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) throw InputError("spiked spec: lambda2 must be positive");
    if (lambda2 > lambda1) throw InputError("spiked spec: lambda2 must not exceed lambda1");
    if (!(tail_decay > 0.0) || tail_decay > 1.0) throw InputError("spiked spec: tail_decay must lie in (0, 1]");
}

std::vector<double> SpikedSpec::spectrum() const {
    std::vector<double> l(input_dim);
    l[0] = lambda1;
    double tail = lambda2;
    for (std::size_t k = 1; k < input_dim; ++k) {
        l[k] = tail;
        tail *= tail_decay;
    }
    return l;
}

double SpikedSpec::certified_bound() const {
    const double d = static_cast<double>(input_dim);
    return lambda1 * (d + 10.0 * std::sqrt(d) + 50.0);
}

SpikedGenerator::SpikedGenerator(const SpikedSpec& spec)
    : spec_(spec), sample_rng_(make_rng(spec.sample_seed, RngStream::samples)) {
    spec_.validate();
    const std::size_t d = spec_.input_dim;

    // Modified Gram–Schmidt on Gaussian draws; a draw that collapses is redrawn.
    Rng basis_rng = make_rng(spec_.basis_seed, RngStream::basis);
    std::normal_distribution<double> normal;
    while (basis_.size() < d) {
        std::vector<double> g(d);
        for (double& x : g) x = normal(basis_rng);
        const double raw = std::sqrt(dot(g, g));
        for (const DenseVector& b : basis_) {
            const double c = dot(std::span<const double>(g), b.entries());
            for (std::size_t k = 0; k < d; ++k) g[k] -= c * b[k];
        }
        const double rest = std::sqrt(dot(g, g));
        if (!(rest > 1e-8 * raw)) continue;
        for (double& x : g) x /= rest;
        basis_.emplace_back(std::move(g));
    }

    truth_.lambdas = spec_.spectrum();
    truth_.top_direction = basis_.front();
    truth_.ratio = d > 1 ? spec_.lambda1 / spec_.lambda2 : std::numeric_limits<double>::infinity();
    truth_.certified_bound = spec_.certified_bound();
    for (double l : truth_.lambdas) scales_.push_back(std::sqrt(l));
}

DenseVector SpikedGenerator::next() {
    const std::size_t d = spec_.input_dim;
    std::normal_distribution<double> normal;
    for (;;) {
        std::vector<double> x(d, 0.0);
        for (std::size_t k = 0; k < d; ++k) {
            const double c = scales_[k] * normal(sample_rng_);
            for (std::size_t i = 0; i < d; ++i) x[i] += c * basis_[k][i];
        }
        if (dot(x, x) <= truth_.certified_bound) return DenseVector(std::move(x));
        ++redrawn_;
    }
}

SpikedStream make_spiked_stream(const SpikedSpec& spec) {
    SpikedGenerator gen(spec);
    SpikedStream out;
    out.samples.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) out.samples.push_back(gen.next());
    out.truth = gen.truth();
    out.redrawn = gen.redrawn();
    return out;
}

double monte_carlo_offset_norm(const DenseVector& u, const DenseVector& v, double delta, std::size_t trials,
                               std::uint64_t seed) {
    if (u.empty() || !(u.norm() > 0.0)) throw InputError("monte_carlo_offset_norm: u must be nonzero");
    if (u.size() != v.size()) throw DimensionError("monte_carlo_offset_norm: u and v differ in length");
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("monte_carlo_offset_norm: delta must lie in (0, 1)");
    if (trials < 1000) throw InputError("monte_carlo_offset_norm: need at least 1000 trials");

    // ‖au + v‖² = a²‖u‖² + 2a⟨u,v⟩ + ‖v‖²
    const double uu = u.squared_norm();
    const double uv = dot(u, v);
    const double vv = v.squared_norm();
    const double threshold = delta * delta * uu;

    Rng rng = make_rng(seed, RngStream::monte_carlo);
    std::normal_distribution<double> normal;
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const double a = normal(rng);
        if (a * a * uu + 2.0 * a * uv + vv >= threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace skpca
