#ifndef SKPCA_OJA_HPP
#define SKPCA_OJA_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ranges>
#include <string_view>
#include <utility>
#include <vector>

#include "skpca/feature_map.hpp"
#include "skpca/linalg.hpp"

namespace skpca {

/// Learning rates must stay strictly below this (open interval (0, 0.1)).
inline constexpr double kMaxLearningRate = 0.1;

struct OjaConfig {
    double eta = 0.0;
    FeatureMap feature_map{FeatureMapSpec::identity(1)};
    bool record_trajectory = false;
    bool record_snapshots = false;
};

/// Throws InputError unless 0 < eta ≤ 0.1 / norm_bound.
void validate_learning_rate(double eta, double norm_bound);

/// min(0.1/B, user_eta), nudged strictly below 0.1.
double select_learning_rate(double norm_bound, std::optional<double> user_eta = std::nullopt);

/// Normalized iterate plus log ‖vᵢ‖₂ relative to ‖v₀‖₂ = 1.
/// The unnormalized iterate is exp(log_norm)·v_hat and is never stored.
struct StreamState {
    DenseVector v_hat;
    double log_norm = 0.0;
    std::size_t step = 0;
};

StreamState init_state(std::size_t m, std::uint64_t seed);
StreamState init_state_at(const DenseVector& v0);

struct StepRecord {
    std::size_t step = 0;
    double s = 0.0;            // ⟨φ(xᵢ), v̂ᵢ₋₁⟩
    double phi_norm_sq = 0.0;  // ‖φ(xᵢ)‖²
    double log_ratio = 0.0;    // log(‖vᵢ‖² / ‖vᵢ₋₁‖²)
    std::optional<DenseVector> v_hat_snapshot;
};

enum class InitKind { random, at_v_star };

std::string_view to_string(InitKind kind);
InitKind parse_init_kind(std::string_view name);

/// Everything a post-hoc certifier needs besides the stream itself.
struct Trajectory {
    double eta = 0.0;
    FeatureMapSpec feature_map;
    InitKind init = InitKind::random;
    StreamState initial;
    std::vector<StepRecord> records;
    StreamState final_state;

    std::size_t steps() const noexcept { return records.size(); }
    std::size_t feature_dim() const noexcept { return initial.v_hat.size(); }
    bool has_snapshots() const;
    /// L_i for i = 0..n, from the recorded log ratios.
    std::vector<double> log_norms() const;
    /// v̂_i for i = 0..n; requires snapshots.
    std::vector<const DenseVector*> snapshots() const;
};

struct StepResult {
    StreamState state;
    StepRecord record;
};

/// One update vᵢ = vᵢ₋₁ + η⟨φ(xᵢ), vᵢ₋₁⟩φ(xᵢ) in normalized form. The
/// log-norm increment uses the closed form ½·log1p((2η + η²‖f‖²)s²).
/// Throws NumericError on any non-finite intermediate.
StepResult oja_step(const StreamState& state, const DenseVector& x, const OjaConfig& cfg);

struct RunResult {
    StreamState state;
    std::optional<Trajectory> trajectory;
};

namespace detail {
class TrajectoryRecorder {
public:
    TrajectoryRecorder(const OjaConfig& cfg, const StreamState& init, InitKind kind);
    void add(StepRecord record);
    RunResult finish(StreamState final_state);

private:
    bool active_;
    Trajectory trajectory_;
};
}  // namespace detail

/// Folds oja_step over `xs` in order. An empty stream returns `init` unchanged.
template <std::ranges::input_range R>
RunResult run_stream(R&& xs, const OjaConfig& cfg, StreamState init, InitKind kind = InitKind::random) {
    detail::TrajectoryRecorder recorder(cfg, init, kind);
    StreamState state = std::move(init);
    for (const auto& x : xs) {
        StepResult r = oja_step(state, x, cfg);
        state = std::move(r.state);
        recorder.add(std::move(r.record));
    }
    return recorder.finish(std::move(state));
}

}  // namespace skpca

#endif  // SKPCA_OJA_HPP
