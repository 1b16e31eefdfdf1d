#include "skpca/feature_map.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "skpca/error.hpp"
#include "skpca/random.hpp"

namespace skpca {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::identity: return "identity";
        case FeatureKind::poly2: return "poly2";
        case FeatureKind::rff: return "rff";
    }
    return "unknown";
}

FeatureKind parse_feature_kind(std::string_view name) {
    if (name == "identity") return FeatureKind::identity;
    if (name == "poly2") return FeatureKind::poly2;
    if (name == "rff") return FeatureKind::rff;
    throw ConfigError("unknown feature map '" + std::string(name) + "' (expected identity|poly2|rff)");
}

std::size_t poly2_feature_dim(std::size_t d) { return d * (d + 1) / 2; }

FeatureMapSpec FeatureMapSpec::identity(std::size_t d) {
    return {FeatureKind::identity, d, d, 1.0, 0};
}

FeatureMapSpec FeatureMapSpec::poly2(std::size_t d) {
    return {FeatureKind::poly2, d, poly2_feature_dim(d), 1.0, 0};
}

FeatureMapSpec FeatureMapSpec::rff(std::size_t d, std::size_t m, double bandwidth, std::uint64_t seed) {
    return {FeatureKind::rff, d, m, bandwidth, seed};
}

void FeatureMapSpec::validate() const {
    if (input_dim == 0) throw InputError("feature map: input_dim must be positive");
    if (feature_dim == 0) throw InputError("feature map: feature_dim must be positive");
    switch (kind) {
        case FeatureKind::identity:
            if (feature_dim != input_dim) throw InputError("identity map requires feature_dim == input_dim");
            break;
        case FeatureKind::poly2:
            if (feature_dim != poly2_feature_dim(input_dim))
                throw InputError("poly2 map requires feature_dim == d(d+1)/2");
            break;
        case FeatureKind::rff:
            if (!(rff_bandwidth > 0.0) || !std::isfinite(rff_bandwidth))
                throw InputError("rff map requires a positive finite bandwidth");
            break;
    }
}

FeatureMap::FeatureMap(FeatureMapSpec spec) : spec_(spec) {
    spec_.validate();
    if (spec_.kind != FeatureKind::rff) return;

    const std::size_t m = spec_.feature_dim;
    const std::size_t d = spec_.input_dim;
    Rng rng = make_rng(spec_.rff_seed, RngStream::rff);
    std::normal_distribution<double> normal(0.0, 1.0 / spec_.rff_bandwidth);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
    frequencies_.resize(m * d);
    phases_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < d; ++k) frequencies_[j * d + k] = normal(rng);
        phases_[j] = uniform(rng);
    }
}

FeatureMap FeatureMap::rff_with(FeatureMapSpec spec, std::vector<std::vector<double>> frequencies,
                                std::vector<double> phases) {
    if (spec.kind != FeatureKind::rff) throw InputError("rff_with requires an rff spec");
    FeatureMap map(spec);
    if (frequencies.size() != spec.feature_dim || phases.size() != spec.feature_dim)
        throw DimensionError("rff_with: need feature_dim frequencies and phases");
    for (std::size_t j = 0; j < frequencies.size(); ++j) {
        if (frequencies[j].size() != spec.input_dim) throw DimensionError("rff_with: frequency length != d");
        for (std::size_t k = 0; k < spec.input_dim; ++k)
            map.frequencies_[j * spec.input_dim + k] = frequencies[j][k];
        map.phases_[j] = phases[j];
    }
    return map;
}

DenseVector FeatureMap::apply(const DenseVector& x) const {
    const std::size_t d = spec_.input_dim;
    if (x.size() != d) {
        throw InputError("feature map: input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(d));
    }
    switch (spec_.kind) {
        case FeatureKind::identity:
            return x;
        case FeatureKind::poly2: {
            std::vector<double> out;
            out.reserve(spec_.feature_dim);
            for (std::size_t i = 0; i < d; ++i) {
                out.push_back(x[i] * x[i]);
                for (std::size_t j = i + 1; j < d; ++j) out.push_back(std::numbers::sqrt2 * x[i] * x[j]);
            }
            return DenseVector(std::move(out));
        }
        case FeatureKind::rff: {
            const std::size_t m = spec_.feature_dim;
            const double scale = std::sqrt(2.0 / static_cast<double>(m));
            std::vector<double> out(m);
            for (std::size_t j = 0; j < m; ++j) {
                const double proj = dot(std::span<const double>(frequencies_.data() + j * d, d), x.entries());
                out[j] = scale * std::cos(proj + phases_[j]);
            }
            return DenseVector(std::move(out));
        }
    }
    throw InputError("feature map: unknown kind");
}

double FeatureMap::norm_bound(double generator_bound) const {
    if (!(generator_bound > 0.0)) throw InputError("norm_bound: generator bound must be positive");
    switch (spec_.kind) {
        case FeatureKind::identity: return generator_bound;
        case FeatureKind::poly2: return generator_bound * generator_bound;
        case FeatureKind::rff: return 2.0;
    }
    return generator_bound;
}

}  // namespace skpca
