#ifndef SKPCA_TRAJECTORY_IO_HPP
#define SKPCA_TRAJECTORY_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "skpca/datagen.hpp"
#include "skpca/feature_map.hpp"
#include "skpca/oja.hpp"

namespace skpca {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Everything besides the per-step rows needed to rebuild and re-certify a
/// trajectory: the replayable stream, η, and how v₀ was chosen.
struct TrajectoryMeta {
    static constexpr std::string_view kFormat = "skpca-trajectory/1";

    double eta = 0.0;
    InitKind init = InitKind::random;
    std::uint64_t init_seed = 0;
    std::uint64_t pair_seed = 0;
    FeatureMapSpec feature_map;
    SpikedSpec generator;
    double bound = 0.0;
    std::string bound_policy;
    std::size_t steps = 0;
    DenseVector final_v_hat;
    double final_log_norm = 0.0;

    friend bool operator==(const TrajectoryMeta&, const TrajectoryMeta&) = default;
};

nlohmann::json meta_to_json(const TrajectoryMeta& meta);
/// Throws ConfigError on a missing or mistyped field.
TrajectoryMeta meta_from_json(const nlohmann::json& j);

/// CSV with header `step,s,phi_norm_sq,log_ratio[,vhat_0..vhat_{m-1}]`.
/// Row 0 carries the initial state (zeros plus v̂₀), so there are n + 1 rows.
std::string trajectory_to_csv(const Trajectory& t);

/// Inverse of trajectory_to_csv. η, φ, the init kind, and the final state
/// come from `meta`. Throws ParseError with the byte offset of the first
/// offending character.
Trajectory trajectory_from_csv(std::string_view text, const TrajectoryMeta& meta);

/// The sidecar that travels with `trajectory.csv` is `trajectory.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

void write_text_file(const std::filesystem::path& path, std::string_view contents);
/// Throws InputError if the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace skpca

#endif  // SKPCA_TRAJECTORY_IO_HPP
