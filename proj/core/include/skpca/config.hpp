#ifndef SKPCA_CONFIG_HPP
#define SKPCA_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skpca/datagen.hpp"
#include "skpca/feature_map.hpp"
#include "skpca/oja.hpp"

namespace skpca {

/// How B in η ≤ 0.1/B is obtained.
///   stream_max: exact max over the replayed stream of ‖φ(xᵢ)‖².
///   guard:      norm_bound(φ, λ₁(d + 10√d + 50)), the generator's percentile guard.
enum class BoundPolicy { stream_max, guard };

std::string_view to_string(BoundPolicy policy);
BoundPolicy parse_bound_policy(std::string_view name);

/// User-facing experiment description. Seeds of the generator are not part
/// of the config: trial t derives every seed from `seed + t`.
struct RunConfig {
    FeatureMapSpec feature_map = FeatureMapSpec::identity(8);
    SpikedSpec generator{8, 2000, 1.0, 0.1, 1.0, 0, 0};
    std::optional<double> eta;  // nullopt: 0.1/B
    BoundPolicy bound = BoundPolicy::stream_max;
    InitKind init = InitKind::random;
    std::uint64_t seed = 1;
    std::size_t trials = 1;
    bool checks = false;
    bool snapshots = false;
    bool trajectories = false;
    std::string output_dir;  // empty: $SKPCA_OUT_DIR, else "skpca-out"
    std::size_t jobs = 1;
    std::vector<double> sweep_ratios;

    /// Recomputes feature_map.input_dim and, for identity/poly2, feature_dim
    /// from generator.input_dim.
    void resolve_dimensions();
    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Generator spec of trial t with both seeds set to seed + t.
    SpikedSpec trial_generator(std::size_t trial) const;
    std::uint64_t trial_seed(std::size_t trial) const { return seed + trial; }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline constexpr const char* kOutputDirEnv = "SKPCA_OUT_DIR";
inline constexpr const char* kDefaultOutputDir = "skpca-out";

/// output_dir if set, else $SKPCA_OUT_DIR, else "skpca-out".
std::string resolve_output_dir(const RunConfig& cfg);

nlohmann::json feature_map_to_json(const FeatureMapSpec& spec);
FeatureMapSpec feature_map_from_json(const nlohmann::json& j, std::string_view path = "feature_map");
nlohmann::json spiked_spec_to_json(const SpikedSpec& spec, bool with_seeds);
SpikedSpec spiked_spec_from_json(const nlohmann::json& j, bool with_seeds, std::string_view path = "generator");

/// Full config, including output_dir and jobs.
nlohmann::json config_to_json(const RunConfig& cfg);
/// Only fields that affect results; used to echo the config into reports.
nlohmann::json config_result_fields(const RunConfig& cfg);
/// Missing fields keep their defaults; unknown or mistyped fields throw
/// ConfigError naming the field.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Parses JSON text. Syntax errors throw ConfigError with line and column.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

}  // namespace skpca

#endif  // SKPCA_CONFIG_HPP
