#include "skpca/oja.hpp"

#include <cmath>
#include <random>
#include <string>

#include "skpca/error.hpp"
#include "skpca/random.hpp"

namespace skpca {

void validate_learning_rate(double eta, double norm_bound) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InputError("learning rate must be positive and finite");
    if (!(norm_bound > 0.0)) throw InputError("feature norm bound must be positive");
    if (eta >= kMaxLearningRate) throw InputError("learning rate must be below 0.1");
    if (eta > kMaxLearningRate / norm_bound) throw InputError("learning rate exceeds 0.1 / B");
}

double select_learning_rate(double norm_bound, std::optional<double> user_eta) {
    if (!(norm_bound > 0.0) || !std::isfinite(norm_bound))
        throw InputError("select_learning_rate: B must be positive");
    if (user_eta && !(*user_eta > 0.0)) throw InputError("select_learning_rate: eta must be positive");
    double eta = kMaxLearningRate / norm_bound;
    if (user_eta) eta = std::min(eta, *user_eta);
    if (eta >= kMaxLearningRate) eta = std::nextafter(kMaxLearningRate, 0.0);
    return eta;
}

StreamState init_state(std::size_t m, std::uint64_t seed) {
    if (m == 0) throw InputError("init_state: m must be positive");
    Rng rng = make_rng(seed, RngStream::init);
    std::normal_distribution<double> normal;
    std::vector<double> v(m);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (double& x : v) {
            x = normal(rng);
            sq += x * x;
        }
    } while (!(sq > 0.0));
    return {DenseVector(std::move(v)).normalized(), 0.0, 0};
}

StreamState init_state_at(const DenseVector& v0) {
    if (v0.empty() || !(v0.norm() > 0.0)) throw InputError("init_state_at: v0 must be nonzero");
    return {v0.normalized(), 0.0, 0};
}

std::string_view to_string(InitKind kind) { return kind == InitKind::random ? "random" : "vstar"; }

InitKind parse_init_kind(std::string_view name) {
    if (name == "random") return InitKind::random;
    if (name == "vstar" || name == "at-v*" || name == "at_v_star") return InitKind::at_v_star;
    throw ConfigError("unknown init kind '" + std::string(name) + "' (expected random|vstar)");
}

bool Trajectory::has_snapshots() const {
    for (const auto& r : records)
        if (!r.v_hat_snapshot) return false;
    return !initial.v_hat.empty();
}

std::vector<double> Trajectory::log_norms() const {
    std::vector<double> l(records.size() + 1);
    l[0] = initial.log_norm;
    for (std::size_t i = 0; i < records.size(); ++i) l[i + 1] = l[i] + 0.5 * records[i].log_ratio;
    return l;
}

std::vector<const DenseVector*> Trajectory::snapshots() const {
    if (!has_snapshots()) throw InputError("trajectory has no v_hat snapshots");
    std::vector<const DenseVector*> out;
    out.reserve(records.size() + 1);
    out.push_back(&initial.v_hat);
    for (const auto& r : records) out.push_back(&*r.v_hat_snapshot);
    return out;
}

StepResult oja_step(const StreamState& state, const DenseVector& x, const OjaConfig& cfg) {
    const DenseVector f = cfg.feature_map.apply(x);
    const std::size_t m = f.size();
    if (state.v_hat.size() != m) {
        throw DimensionError("oja_step: state has length " + std::to_string(state.v_hat.size()) +
                             ", feature map emits " + std::to_string(m));
    }
    const double eta = cfg.eta;
    const double s = dot(f, state.v_hat);
    const double phi_norm_sq = f.squared_norm();

    std::vector<double> u(state.v_hat.values());
    const double coeff = eta * s;
    double u_sq = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        u[k] += coeff * f[k];
        u_sq += u[k] * u[k];
    }
    const double growth = (2.0 * eta + eta * eta * phi_norm_sq) * s * s;
    const double log_ratio = std::log1p(growth);
    if (!std::isfinite(u_sq) || !(u_sq > 0.0) || !std::isfinite(log_ratio)) {
        throw NumericError("oja_step: non-finite intermediate at step " + std::to_string(state.step + 1) +
                           " (s=" + std::to_string(s) + ", |f|^2=" + std::to_string(phi_norm_sq) + ")");
    }
    const double inv = 1.0 / std::sqrt(u_sq);
    for (double& c : u) c *= inv;

    StepResult out;
    out.state.v_hat = DenseVector(std::move(u));
    out.state.log_norm = state.log_norm + 0.5 * log_ratio;
    out.state.step = state.step + 1;
    out.record.step = out.state.step;
    out.record.s = s;
    out.record.phi_norm_sq = phi_norm_sq;
    out.record.log_ratio = log_ratio;
    if (cfg.record_snapshots) out.record.v_hat_snapshot = out.state.v_hat;
    return out;
}

namespace detail {

TrajectoryRecorder::TrajectoryRecorder(const OjaConfig& cfg, const StreamState& init, InitKind kind)
    : active_(cfg.record_trajectory || cfg.record_snapshots) {
    if (!active_) return;
    trajectory_.eta = cfg.eta;
    trajectory_.feature_map = cfg.feature_map.spec();
    trajectory_.init = kind;
    trajectory_.initial = init;
}

void TrajectoryRecorder::add(StepRecord record) {
    if (active_) trajectory_.records.push_back(std::move(record));
}

RunResult TrajectoryRecorder::finish(StreamState final_state) {
    RunResult out;
    if (active_) {
        trajectory_.final_state = final_state;
        out.trajectory = std::move(trajectory_);
    }
    out.state = std::move(final_state);
    return out;
}

}  // namespace detail

}  // namespace skpca
