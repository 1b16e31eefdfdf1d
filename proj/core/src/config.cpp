#include "skpca/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "skpca/error.hpp"

namespace skpca {

using nlohmann::json;

namespace {

std::string join(std::string_view path, std::string_view key) {
    return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

const json& require_object(const json& j, std::string_view path) {
    if (!j.is_object()) throw ConfigError((path.empty() ? std::string("config") : std::string(path)) +
                                          ": expected an object");
    return j;
}

void reject_unknown(const json& j, std::string_view path, std::initializer_list<std::string_view> known) {
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(join(path, key) + ": unknown field");
    }
}

const json* find(const json& j, std::string_view key) {
    auto it = j.find(std::string(key));
    return it == j.end() ? nullptr : &*it;
}

double read_double(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
    return x;
}

std::uint64_t read_unsigned(const json& v, const std::string& where) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

bool read_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
    return v.get<bool>();
}

std::string read_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
    return v.get<std::string>();
}

template <typename Fn>
void with_field(const json& j, std::string_view path, std::string_view key, Fn&& fn) {
    if (const json* v = find(j, key)) {
        const std::string where = join(path, key);
        try {
            fn(*v, where);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
}

}  // namespace

std::string_view to_string(BoundPolicy policy) {
    return policy == BoundPolicy::stream_max ? "stream-max" : "guard";
}

BoundPolicy parse_bound_policy(std::string_view name) {
    if (name == "stream-max" || name == "stream_max") return BoundPolicy::stream_max;
    if (name == "guard") return BoundPolicy::guard;
    throw ConfigError("unknown bound policy '" + std::string(name) + "' (expected stream-max|guard)");
}

void RunConfig::resolve_dimensions() {
    feature_map.input_dim = generator.input_dim;
    if (feature_map.kind == FeatureKind::identity) feature_map.feature_dim = generator.input_dim;
    if (feature_map.kind == FeatureKind::poly2) feature_map.feature_dim = poly2_feature_dim(generator.input_dim);
}

void RunConfig::validate() const {
    auto wrap = [](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(std::string(field) + ": " + e.what());
        }
    };
    wrap("generator", [&] { generator.validate(); });
    wrap("feature_map", [&] { feature_map.validate(); });
    if (feature_map.input_dim != generator.input_dim)
        throw ConfigError("feature_map.input_dim: must equal generator.input_dim");
    if (feature_map.feature_dim > kMaxOracleDim)
        throw ConfigError("feature_map.feature_dim: exceeds the offline oracle limit of 2048");
    if (eta && !(*eta > 0.0 && *eta < kMaxLearningRate))
        throw ConfigError("eta: must lie in (0, 0.1)");
    if (trials == 0) throw ConfigError("trials: must be at least 1");
    if (jobs == 0) throw ConfigError("jobs: must be at least 1");
    for (double r : sweep_ratios) {
        if (!(r >= 1.0) || !std::isfinite(r)) throw ConfigError("sweep_ratios: every ratio must be finite and >= 1");
    }
}

SpikedSpec RunConfig::trial_generator(std::size_t trial) const {
    SpikedSpec s = generator;
    s.basis_seed = trial_seed(trial);
    s.sample_seed = trial_seed(trial);
    return s;
}

std::string resolve_output_dir(const RunConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
    return kDefaultOutputDir;
}

json feature_map_to_json(const FeatureMapSpec& spec) {
    // bandwidth and seed only matter for rff but are kept so round trips are exact.
    return json{{"kind", to_string(spec.kind)},
                {"input_dim", spec.input_dim},
                {"feature_dim", spec.feature_dim},
                {"bandwidth", spec.rff_bandwidth},
                {"seed", spec.rff_seed}};
}

FeatureMapSpec feature_map_from_json(const json& j, std::string_view path) {
    require_object(j, path);
    reject_unknown(j, path, {"kind", "input_dim", "feature_dim", "bandwidth", "seed"});
    FeatureMapSpec s;
    with_field(j, path, "kind", [&](const json& v, const std::string& w) {
        s.kind = parse_feature_kind(read_string(v, w));
    });
    with_field(j, path, "input_dim", [&](const json& v, const std::string& w) { s.input_dim = read_unsigned(v, w); });
    s.feature_dim = s.input_dim;
    with_field(j, path, "feature_dim",
               [&](const json& v, const std::string& w) { s.feature_dim = read_unsigned(v, w); });
    with_field(j, path, "bandwidth", [&](const json& v, const std::string& w) { s.rff_bandwidth = read_double(v, w); });
    with_field(j, path, "seed", [&](const json& v, const std::string& w) { s.rff_seed = read_unsigned(v, w); });
    return s;
}

json spiked_spec_to_json(const SpikedSpec& spec, bool with_seeds) {
    json j{{"input_dim", spec.input_dim}, {"n", spec.n},           {"lambda1", spec.lambda1},
           {"lambda2", spec.lambda2},     {"tail_decay", spec.tail_decay}};
    if (with_seeds) {
        j["basis_seed"] = spec.basis_seed;
        j["sample_seed"] = spec.sample_seed;
    }
    return j;
}

SpikedSpec spiked_spec_from_json(const json& j, bool with_seeds, std::string_view path) {
    require_object(j, path);
    if (with_seeds) {
        reject_unknown(j, path, {"input_dim", "n", "lambda1", "lambda2", "tail_decay", "basis_seed", "sample_seed"});
    } else {
        reject_unknown(j, path, {"input_dim", "n", "lambda1", "lambda2", "tail_decay", "ratio"});
    }
    SpikedSpec s;
    with_field(j, path, "input_dim", [&](const json& v, const std::string& w) { s.input_dim = read_unsigned(v, w); });
    with_field(j, path, "n", [&](const json& v, const std::string& w) { s.n = read_unsigned(v, w); });
    with_field(j, path, "lambda1", [&](const json& v, const std::string& w) { s.lambda1 = read_double(v, w); });
    with_field(j, path, "lambda2", [&](const json& v, const std::string& w) { s.lambda2 = read_double(v, w); });
    with_field(j, path, "ratio", [&](const json& v, const std::string& w) {
        if (find(j, "lambda2")) throw ConfigError(w + ": give either ratio or lambda2, not both");
        const double r = read_double(v, w);
        if (!(r >= 1.0)) throw ConfigError(w + ": must be >= 1");
        s.lambda2 = s.lambda1 / r;
    });
    with_field(j, path, "tail_decay", [&](const json& v, const std::string& w) { s.tail_decay = read_double(v, w); });
    with_field(j, path, "basis_seed", [&](const json& v, const std::string& w) { s.basis_seed = read_unsigned(v, w); });
    with_field(j, path, "sample_seed",
               [&](const json& v, const std::string& w) { s.sample_seed = read_unsigned(v, w); });
    return s;
}

json config_result_fields(const RunConfig& cfg) {
    json j;
    j["feature_map"] = feature_map_to_json(cfg.feature_map);
    j["generator"] = spiked_spec_to_json(cfg.generator, false);
    j["eta"] = cfg.eta ? json(*cfg.eta) : json("auto");
    j["bound"] = to_string(cfg.bound);
    j["init"] = to_string(cfg.init);
    j["seed"] = cfg.seed;
    j["trials"] = cfg.trials;
    j["checks"] = cfg.checks;
    j["snapshots"] = cfg.snapshots;
    j["trajectories"] = cfg.trajectories;
    j["sweep_ratios"] = cfg.sweep_ratios;
    return j;
}

json config_to_json(const RunConfig& cfg) {
    json j = config_result_fields(cfg);
    j["output_dir"] = cfg.output_dir;
    j["jobs"] = cfg.jobs;
    return j;
}

RunConfig config_from_json(const json& j, RunConfig base) {
    require_object(j, "");
    reject_unknown(j, "", {"feature_map", "generator", "eta", "bound", "init", "seed", "trials", "checks",
                           "snapshots", "trajectories", "output_dir", "jobs", "sweep_ratios"});
    RunConfig c = std::move(base);
    with_field(j, "", "generator", [&](const json& v, const std::string&) {
        // Merge onto the current generator so partial objects keep defaults.
        json merged = spiked_spec_to_json(c.generator, false);
        require_object(v, "generator");
        for (const auto& [k, x] : v.items()) merged[k] = x;
        if (v.contains("ratio") && !v.contains("lambda2")) merged.erase("lambda2");
        if (v.contains("ratio") && !v.contains("lambda1")) merged["lambda1"] = c.generator.lambda1;
        c.generator = spiked_spec_from_json(merged, false);
    });
    with_field(j, "", "feature_map", [&](const json& v, const std::string&) {
        json merged = feature_map_to_json(c.feature_map);
        require_object(v, "feature_map");
        if (v.contains("kind") && v["kind"] != merged["kind"]) merged.erase("feature_dim");
        for (const auto& [k, x] : v.items()) merged[k] = x;
        if (!merged.contains("input_dim")) merged["input_dim"] = c.generator.input_dim;
        c.feature_map = feature_map_from_json(merged);
    });
    with_field(j, "", "eta", [&](const json& v, const std::string& w) {
        if (v.is_string() && v.get<std::string>() == "auto") {
            c.eta.reset();
        } else {
            if (!v.is_number()) throw ConfigError(w + ": expected \"auto\" or a number");
            c.eta = read_double(v, w);
        }
    });
    with_field(j, "", "bound", [&](const json& v, const std::string& w) { c.bound = parse_bound_policy(read_string(v, w)); });
    with_field(j, "", "init", [&](const json& v, const std::string& w) { c.init = parse_init_kind(read_string(v, w)); });
    with_field(j, "", "seed", [&](const json& v, const std::string& w) { c.seed = read_unsigned(v, w); });
    with_field(j, "", "trials", [&](const json& v, const std::string& w) { c.trials = read_unsigned(v, w); });
    with_field(j, "", "checks", [&](const json& v, const std::string& w) { c.checks = read_bool(v, w); });
    with_field(j, "", "snapshots", [&](const json& v, const std::string& w) { c.snapshots = read_bool(v, w); });
    with_field(j, "", "trajectories", [&](const json& v, const std::string& w) { c.trajectories = read_bool(v, w); });
    with_field(j, "", "output_dir", [&](const json& v, const std::string& w) { c.output_dir = read_string(v, w); });
    with_field(j, "", "jobs", [&](const json& v, const std::string& w) { c.jobs = read_unsigned(v, w); });
    with_field(j, "", "sweep_ratios", [&](const json& v, const std::string& w) {
        if (!v.is_array()) throw ConfigError(w + ": expected an array of numbers");
        c.sweep_ratios.clear();
        for (std::size_t i = 0; i < v.size(); ++i) c.sweep_ratios.push_back(read_double(v[i], w + "[" + std::to_string(i) + "]"));
    });
    c.resolve_dimensions();
    return c;
}

RunConfig parse_config(std::string_view text, RunConfig base) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is 1-based and points one past the offending character.
        const std::size_t offset = e.byte > 0 ? std::min<std::size_t>(e.byte - 1, text.size()) : 0;
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < offset; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string msg = e.what();
        if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ConfigError("config: line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg);
    }
    return config_from_json(j, std::move(base));
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace skpca
