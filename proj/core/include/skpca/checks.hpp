#ifndef SKPCA_CHECKS_HPP
#define SKPCA_CHECKS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skpca/linalg.hpp"
#include "skpca/oja.hpp"

namespace skpca {

enum class CheckStatus { pass, fail, vacuous };
/// "certified" when every hypothesis of the underlying statement held.
enum class Assurance { certified, empirical };

std::string_view to_string(CheckStatus status);
std::string_view to_string(Assurance assurance);

/// One inequality evaluated over a whole trajectory.
///
/// worst_margin is signed: the smallest (right side − left side) over every
/// step or pair, or −|error| for equalities. The check fails when the margin
/// drops below −tolerance. It is NaN for vacuous entries.
struct CheckEntry {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    double worst_margin = 0.0;
    double tolerance = 0.0;
    std::string location;
    std::string detail;
    Assurance assurance = Assurance::certified;
};

struct CheckConstants {
    double alpha = 0.0;
    double beta = 0.0;
    double eta = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
};

struct CheckReport {
    CheckConstants constants;
    std::vector<CheckEntry> entries;

    bool any_failed() const;
    const CheckEntry* find(std::string_view name) const;
};

// Tolerances.
inline constexpr double kInequalitySlack = 1e-9;
inline constexpr double kClosedFormTolerance = 1e-12;  // norm recursion and log growth
inline constexpr double kUnitNormTolerance = 1e-12;
inline constexpr double kReconstructionTolerance = 1e-9;  // telescoping, relative
inline constexpr std::size_t kExplicitMaxDim = 32;
inline constexpr std::size_t kExplicitMaxSteps = 64;

// Constants appearing in the bounds being certified.
inline constexpr double kTwoStepConstant = 50.0;         // ‖Pv̂_b − Pv̂_a‖² ≤ 50α log(‖v_b‖/‖v_a‖)
inline constexpr double kProjectedEnergyConstant = 100.0;
inline constexpr double kGrowthConstant = 200.0;         // C₁ in the log-norm lower bound
inline constexpr double kGrowthAlphaLimit = 0.1;
inline constexpr double kHypothesisConstant = 1000.0;  // C in the final-bound hypotheses
inline constexpr double kFinalBoundRate = 200.0;         // exp(−β/200)
inline constexpr std::size_t kMinSampledPairs = 100;

// Canonical entry names, in report order.
namespace check_names {
inline constexpr std::string_view record_consistency = "record_consistency";
inline constexpr std::string_view norm_recursion = "norm_recursion";
inline constexpr std::string_view monotone_norm = "monotone_norm";
inline constexpr std::string_view log_growth = "log_growth";
inline constexpr std::string_view pairwise_growth = "pairwise_growth";
inline constexpr std::string_view telescoping = "telescoping";
inline constexpr std::string_view growth_correctness = "growth_implies_correctness";
inline constexpr std::string_view two_time_steps = "two_time_steps";
inline constexpr std::string_view projected_energy = "projected_energy";
inline constexpr std::string_view right_direction = "right_direction_grows";
inline constexpr std::string_view norm_lower_bound = "norm_lower_bound";
inline constexpr std::string_view final_bound = "final_bound";
}  // namespace check_names

/// Oracle inputs for one trajectory. `features` holds φ(xᵢ) for i = 1..n.
struct CheckContext {
    std::span<const DenseVector> features;
    DenseVector v_star;
    double alpha = 0.0;
    double beta = 0.0;
    std::uint64_t pair_seed = 0;
    std::size_t sampled_pairs = kMinSampledPairs;
};

/// Recorded s, ‖f‖², snapshots, and final log-norm agree with recomputation
/// from the replayed features.
CheckEntry check_record_consistency(const Trajectory& t, std::span<const DenseVector> features);

/// The five algebraic properties of the update rule. Telescoping is vacuous unless m ≤ 32
/// and n ≤ 64. Throws InputError when snapshots are missing.
std::vector<CheckEntry> check_update_properties(const Trajectory& t, std::span<const DenseVector> features);

/// ‖Pv̂ᵢ‖ ≤ √α + ‖Pv̂₀‖·exp(−Lᵢ) for every i; for at-v* trajectories the
/// stronger ‖Pv̂ᵢ‖ ≤ √α.
CheckEntry check_growth_implies_correctness(const Trajectory& t, const DenseVector& v_star, double alpha);

/// Index pairs (a, b), a < b, for the two-time-steps bound: every adjacent
/// pair plus `sampled` pairs drawn from `seed`.
std::vector<std::pair<std::size_t, std::size_t>> two_step_pairs(std::size_t n, std::size_t sampled,
                                                                std::uint64_t seed);

/// ‖Pv̂_b − Pv̂_a‖² ≤ 50·α·(L_b − L_a). Throws PreconditionError unless at-v*.
CheckEntry check_two_time_steps(const Trajectory& t, const DenseVector& v_star, double alpha,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs);

/// η Σᵢ ⟨φ(xᵢ), Pv̂ᵢ₋₁⟩² ≤ 100·α²·ln²n·L_n. Throws PreconditionError unless at-v*.
CheckEntry check_projected_energy(const Trajectory& t, std::span<const DenseVector> features,
                                  const DenseVector& v_star, double alpha);

/// Two entries: L_n ≥ (β/8)/(1 + 200α² ln²n) (at-v*, α < 0.1; otherwise
/// vacuous), and 2L_{n'} ≥ log η + logsumexp_{i ≤ n'}(log sᵢ² + 2L_{i−1})
/// for every prefix n'.
std::vector<CheckEntry> check_norm_lower_bounds(const Trajectory& t, double alpha, double beta);

/// The final bound's hypotheses with C = 1000: α ∈ (0, 1/(C ln n)) and β ≥ C ln m.
bool final_bound_hypotheses_met(double alpha, double beta, std::size_t n, std::size_t m);

/// ‖Pv̂_n‖ ≤ √α + exp(−β/200). For random-init runs outside the bound's
/// hypotheses an exceedance is reported vacuous, never fail.
CheckEntry check_final_bound(const Trajectory& t, const DenseVector& v_star, double alpha, double beta);

/// Every check above, once each, hypotheses gating the at-v* bounds.
CheckReport run_all_checks(const Trajectory& t, const CheckContext& ctx);

/// Population-level certification of the final-bound probability.
struct FinalBoundObservation {
    double residual = 0.0;  // ‖Pv̂_n‖
    double alpha = 0.0;
    double beta = 0.0;
};

struct FinalBoundAggregate {
    std::size_t trials = 0;
    std::size_t failures = 0;
    double failure_fraction = 0.0;
    double allowed_fraction = 0.0;  // mean exp(−β/200) + slack
    bool satisfied = false;
};

inline constexpr double kPopulationSlack = 0.05;

double final_bound_value(double alpha, double beta);
FinalBoundAggregate aggregate_final_bound(std::span<const FinalBoundObservation> observations,
                                          double slack = kPopulationSlack);

}  // namespace skpca

#endif  // SKPCA_CHECKS_HPP
