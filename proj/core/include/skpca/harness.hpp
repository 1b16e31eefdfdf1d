#ifndef SKPCA_HARNESS_HPP
#define SKPCA_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skpca/checks.hpp"
#include "skpca/config.hpp"
#include "skpca/oja.hpp"
#include "skpca/trajectory_io.hpp"

namespace skpca {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
    kExitSuccess = 0,
    kExitCheckFailure = 1,
    kExitConfigError = 2,
    kExitNumericAbort = 3,
};

struct TrialResult {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    bool aborted = false;
    std::string error;  // set when aborted

    double alignment_error = 0.0;                       // vs empirical x*
    std::optional<double> population_alignment_error;   // vs population u₁, identity map only
    double projection_residual = 0.0;                   // ‖P v̂_n‖ with v* = x*
    double log_norm = 0.0;                              // L_n
    double ratio = 1.0;                                 // empirical λ₁/λ₂, may be +∞
    double alpha = 0.0;
    double beta = 0.0;
    double eta = 0.0;
    double bound = 0.0;  // B
    std::size_t redrawn = 0;

    double final_bound = 0.0;  // √α + exp(−β/200)
    bool final_bound_satisfied = false;
    bool hypotheses_met = false;  // α ∈ (0, 1/(1000 ln n)) and β ≥ 1000 ln m

    std::optional<CheckReport> checks;
    std::optional<std::string> trajectory_file;  // file name inside the output directory
    std::optional<Trajectory> trajectory;  // kept when snapshots/trajectories are requested
    std::optional<TrajectoryMeta> meta;
};

struct Quantiles {
    double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};

/// Linear-interpolation quantiles. Throws InputError on an empty sample.
Quantiles quantiles(std::vector<double> values);

struct RunAggregate {
    std::size_t completed = 0;
    std::size_t aborted = 0;
    std::optional<Quantiles> alignment_error;
    std::optional<Quantiles> population_alignment_error;
    std::optional<Quantiles> projection_residual;
    std::optional<Quantiles> ratio;  // finite ratios only
    FinalBoundAggregate final_bound;
    std::size_t hypotheses_met = 0;
    std::size_t checked = 0;
    std::size_t check_failures = 0;
};

struct RunReport {
    RunConfig config;
    std::vector<TrialResult> trials;
    RunAggregate aggregate;
};

/// Deterministic function of (cfg, trial). Numeric failures are recorded in
/// the result; configuration errors propagate.
TrialResult run_trial(const RunConfig& cfg, std::size_t trial);

/// All trials, using up to cfg.jobs threads; results are ordered by trial.
RunReport run_experiment(const RunConfig& cfg);
RunAggregate aggregate(std::span<const TrialResult> trials);

nlohmann::json to_json(const CheckReport& report);
nlohmann::json to_json(const TrialResult& trial);
nlohmann::json to_json(const RunReport& report);

struct SweepRow {
    double ratio_target = 1.0;
    double empirical_ratio_median = 1.0;
    double median_alignment_error = 0.0;
    double logd_over_r = 0.0;
    double bound_satisfied_fraction = 0.0;  // trials with alignment error ≤ log d / R
    std::size_t trials = 0;
    std::size_t aborted = 0;
    std::string label;  // "no spike", "empirical", or "hypothesis met"
};

/// One row per ratio in cfg.sweep_ratios (at least two required).
std::vector<SweepRow> run_sweep(const RunConfig& cfg);
std::string sweep_to_csv(std::span<const SweepRow> rows);

/// Re-certifies a trajectory CSV against its sidecar metadata by replaying
/// the stream. Throws ParseError / ConfigError on malformed input.
CheckReport check_trajectory_file(const std::filesystem::path& csv_path);

/// Front-end commands. Each returns an ExitCode; human-readable output goes
/// to `out`, diagnostics to `err`.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_check(const std::filesystem::path& csv_path, const std::optional<std::filesystem::path>& report_path,
              std::ostream& out, std::ostream& err);

}  // namespace skpca

#endif  // SKPCA_HARNESS_HPP
