// Command-line front end: `skpca run`, `skpca sweep`, `skpca check`.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skpca/config.hpp"
#include "skpca/error.hpp"
#include "skpca/harness.hpp"

namespace {

// Flags that mirror RunConfig fields. Unset flags leave the config untouched.
struct ConfigFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> phi;
    std::optional<std::size_t> dim;
    std::optional<std::size_t> feature_dim;
    std::optional<std::size_t> n;
    std::optional<double> ratio;
    std::vector<double> ratios;
    std::optional<double> lambda1;
    std::optional<double> tail_decay;
    std::optional<double> bandwidth;
    std::optional<std::uint64_t> rff_seed;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> eta;
    std::optional<std::string> bound;
    std::optional<std::size_t> trials;
    std::optional<std::string> init;
    bool check = false;
    bool snapshots = false;
    bool trajectories = false;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;

    void attach(CLI::App& app, bool sweep) {
        app.add_option("--config", config_path, "JSON run config; flags override its fields");
        app.add_option("--phi", phi, "feature map: identity|poly2|rff");
        app.add_option("--dim", dim, "input dimension d");
        app.add_option("--feature-dim", feature_dim, "feature dimension m (rff only)");
        app.add_option("--n", n, "stream length");
        if (sweep) {
            app.add_option("--ratios", ratios, "target spectral ratios lambda1/lambda2 (at least two)")->delimiter(',');
        } else {
            app.add_option("--ratio", ratio, "target spectral ratio lambda1/lambda2");
        }
        app.add_option("--lambda1", lambda1, "top population eigenvalue");
        app.add_option("--tail-decay", tail_decay, "geometric decay of the bulk spectrum, in (0,1]");
        app.add_option("--bandwidth", bandwidth, "rff kernel bandwidth sigma");
        app.add_option("--rff-seed", rff_seed, "seed of the rff frequencies");
        app.add_option("--seed", seed, "base seed; trial t uses seed + t");
        app.add_option("--eta", eta, "learning rate, or 'auto' for 0.1/B");
        app.add_option("--bound", bound, "norm bound policy: stream-max|guard");
        app.add_option("--trials", trials, "number of independent trials");
        app.add_option("--init", init, "initialization: random|vstar");
        app.add_flag("--check", check, "certify every trajectory (implies snapshots)");
        app.add_flag("--snapshots", snapshots, "record v_hat snapshots");
        app.add_flag("--trajectories", trajectories, "write trajectory CSV files");
        app.add_option("--out", out, "output directory (default $SKPCA_OUT_DIR or ./skpca-out)");
        app.add_option("--jobs", jobs, "worker threads");
    }

    skpca::RunConfig build() const {
        skpca::RunConfig cfg;
        if (config_path) cfg = skpca::load_config(*config_path);
        if (dim) cfg.generator.input_dim = *dim;
        if (n) cfg.generator.n = *n;
        if (lambda1) {
            const double r = cfg.generator.lambda1 / cfg.generator.lambda2;
            cfg.generator.lambda1 = *lambda1;
            cfg.generator.lambda2 = *lambda1 / r;
        }
        if (ratio) {
            if (!(*ratio >= 1.0)) throw skpca::ConfigError("--ratio: must be >= 1");
            cfg.generator.lambda2 = cfg.generator.lambda1 / *ratio;
        }
        if (tail_decay) cfg.generator.tail_decay = *tail_decay;
        if (!ratios.empty()) cfg.sweep_ratios = ratios;
        if (phi) {
            const skpca::FeatureKind kind = skpca::parse_feature_kind(*phi);
            if (kind != cfg.feature_map.kind && kind == skpca::FeatureKind::rff && !feature_dim)
                cfg.feature_map.feature_dim = 64;
            cfg.feature_map.kind = kind;
        }
        if (feature_dim) {
            if (cfg.feature_map.kind != skpca::FeatureKind::rff)
                throw skpca::ConfigError("--feature-dim: only rff has a free feature dimension");
            cfg.feature_map.feature_dim = *feature_dim;
        }
        if (bandwidth) cfg.feature_map.rff_bandwidth = *bandwidth;
        if (rff_seed) cfg.feature_map.rff_seed = *rff_seed;
        cfg.resolve_dimensions();
        if (seed) cfg.seed = *seed;
        if (eta) {
            if (*eta == "auto") {
                cfg.eta.reset();
            } else {
                try {
                    std::size_t used = 0;
                    cfg.eta = std::stod(*eta, &used);
                    if (used != eta->size()) throw std::invalid_argument("trailing characters");
                } catch (const std::exception&) {
                    throw skpca::ConfigError("--eta: expected 'auto' or a number, got '" + *eta + "'");
                }
            }
        }
        if (bound) cfg.bound = skpca::parse_bound_policy(*bound);
        if (trials) cfg.trials = *trials;
        if (init) cfg.init = skpca::parse_init_kind(*init);
        if (check) cfg.checks = true;
        if (snapshots) cfg.snapshots = true;
        if (trajectories) cfg.trajectories = true;
        if (out) cfg.output_dir = *out;
        if (jobs) cfg.jobs = *jobs;
        cfg.validate();
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming kernel PCA with post-hoc certification of the update's inequalities"};
    app.require_subcommand(1);

    ConfigFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "run trials and write report.json");
    run_flags.attach(*run, false);

    ConfigFlags sweep_flags;
    CLI::App* sweep = app.add_subcommand("sweep", "sweep the spectral ratio and write sweep.csv");
    sweep_flags.attach(*sweep, true);

    std::string trajectory;
    std::optional<std::string> check_out;
    CLI::App* check = app.add_subcommand("check", "certify a recorded trajectory CSV");
    check->add_option("trajectory", trajectory, "trajectory CSV (its .json sidecar must sit next to it)")->required();
    check->add_option("--out", check_out, "where to write the JSON check report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : skpca::kExitConfigError;
    }

    try {
        if (*run) return skpca::cmd_run(run_flags.build(), std::cout, std::cerr);
        if (*sweep) return skpca::cmd_sweep(sweep_flags.build(), std::cout, std::cerr);
        std::optional<std::filesystem::path> dest;
        if (check_out) dest = *check_out;
        return skpca::cmd_check(trajectory, dest, std::cout, std::cerr);
    } catch (const skpca::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return skpca::kExitConfigError;
    } catch (const skpca::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return skpca::kExitNumericAbort;
    }
}
