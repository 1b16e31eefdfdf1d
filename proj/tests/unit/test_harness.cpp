#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include <doctest.h>

#include "skpca/error.hpp"
#include "skpca/harness.hpp"

using namespace skpca;

namespace {

RunConfig small_config(std::size_t d = 4, std::size_t n = 300) {
    RunConfig cfg;
    cfg.generator = {d, n, 1.0, 0.1, 1.0, 0, 0};
    cfg.feature_map = FeatureMapSpec::identity(d);
    cfg.resolve_dimensions();
    return cfg;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("skpca-unit-" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("quantiles interpolate linearly") {
    const Quantiles q = quantiles({4.0, 1.0, 3.0, 2.0, 5.0});
    CHECK(q.min == 1.0);
    CHECK(q.q25 == 2.0);
    CHECK(q.median == 3.0);
    CHECK(q.q75 == 4.0);
    CHECK(q.max == 5.0);
    CHECK(quantiles({1.0, 2.0}).median == 1.5);
    CHECK(quantiles({7.0}).median == 7.0);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(quantiles({1.0, inf}).median == inf);
    CHECK_THROWS_AS(quantiles({}), InputError);
}

TEST_CASE("reports are deterministic and independent of the thread count") {
    RunConfig cfg = small_config();
    cfg.trials = 4;
    cfg.checks = true;
    const std::string a = to_json(run_experiment(cfg)).dump();
    const std::string b = to_json(run_experiment(cfg)).dump();
    cfg.jobs = 3;
    const std::string c = to_json(run_experiment(cfg)).dump();
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("trial t of seed s equals trial 0 of seed s + t") {
    RunConfig a = small_config();
    a.seed = 5;
    RunConfig b = a;
    b.seed = 7;
    const TrialResult ra = run_trial(a, 2), rb = run_trial(b, 0);
    CHECK(ra.seed == rb.seed);
    CHECK(ra.alignment_error == rb.alignment_error);
    CHECK(ra.log_norm == rb.log_norm);
    CHECK(!(run_trial(a, 0).alignment_error == ra.alignment_error));
}

TEST_CASE("trial result fields") {
    RunConfig cfg = small_config(5, 2000);
    cfg.generator.lambda2 = 0.02;
    const TrialResult r = run_trial(cfg, 0);
    REQUIRE(!r.aborted);
    CHECK(r.population_alignment_error.has_value());
    CHECK(r.alignment_error == doctest::Approx(r.projection_residual * r.projection_residual).epsilon(1e-9));
    CHECK(r.eta * r.bound <= 0.1);
    CHECK(r.eta > 0.0999 / r.bound);
    CHECK(r.beta >= r.alpha);
    CHECK(r.final_bound == doctest::Approx(std::sqrt(r.alpha) + std::exp(-r.beta / 200)));
    CHECK(r.alignment_error < 0.1);
    CHECK(!r.checks);
    CHECK(!r.trajectory);

    cfg.feature_map = FeatureMapSpec::poly2(5);
    cfg.resolve_dimensions();
    CHECK(!run_trial(cfg, 0).population_alignment_error);
}

TEST_CASE("near-rank-1 stream converges to the offline top direction") {
    RunConfig cfg = small_config(4, 500);
    cfg.generator.lambda2 = 1e-6;
    const TrialResult r = run_trial(cfg, 0);
    REQUIRE(!r.aborted);
    CHECK(r.alignment_error <= 1e-4);
}

TEST_CASE("guard bound policy gives a smaller step") {
    RunConfig cfg = small_config();
    const TrialResult tight = run_trial(cfg, 0);
    cfg.bound = BoundPolicy::guard;
    const TrialResult guard = run_trial(cfg, 0);
    CHECK(guard.bound >= tight.bound);
    CHECK(guard.eta <= tight.eta);
}

TEST_CASE("at-v* runs stay within sqrt(alpha)") {
    RunConfig cfg = small_config();
    cfg.init = InitKind::at_v_star;
    cfg.trials = 5;
    cfg.checks = true;
    const RunReport report = run_experiment(cfg);
    for (const TrialResult& t : report.trials) {
        REQUIRE(!t.aborted);
        CHECK(t.projection_residual <= std::sqrt(t.alpha));
        REQUIRE(t.checks);
        CHECK(!t.checks->any_failed());
    }
    CHECK(report.aggregate.checked == 5);
    CHECK(report.aggregate.check_failures == 0);
}

TEST_CASE("aggregate counts aborted trials") {
    std::vector<TrialResult> trials(3);
    trials[0].alignment_error = 0.1;
    trials[1].aborted = true;
    trials[2].alignment_error = 0.3;
    trials[2].ratio = std::numeric_limits<double>::infinity();
    const RunAggregate a = aggregate(trials);
    CHECK(a.completed == 2);
    CHECK(a.aborted == 1);
    REQUIRE(a.alignment_error);
    CHECK(a.alignment_error->median == doctest::Approx(0.2));
    REQUIRE(a.ratio);
    CHECK(a.ratio->max == 1.0);
    CHECK(!a.population_alignment_error);
}

TEST_CASE("report JSON shape") {
    RunConfig cfg = small_config();
    cfg.trials = 2;
    cfg.checks = true;
    cfg.output_dir = "not-echoed";
    const nlohmann::json j = to_json(run_experiment(cfg));
    CHECK(j["format"] == "skpca-run-report/1");
    CHECK(j["trials"].size() == 2);
    CHECK(!j["config"].contains("output_dir"));
    CHECK(j["trials"][0]["checks"]["format"] == "skpca-check-report/1");
    CHECK(j["trials"][0]["checks"]["entries"].size() == 12);
}

TEST_CASE("sweep") {
    RunConfig cfg = small_config(6, 1000);
    cfg.trials = 5;
    cfg.sweep_ratios = {5.0};
    CHECK_THROWS_AS(run_sweep(cfg), ConfigError);

    cfg.sweep_ratios = {1.0, 10.0, 100.0};
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].label == "no spike");
    CHECK(rows[1].label == "empirical");
    CHECK(rows[0].median_alignment_error > 0.3);
    CHECK(rows[1].median_alignment_error > rows[2].median_alignment_error);
    CHECK(rows[2].logd_over_r == doctest::Approx(std::log(6.0) / 100));
    const std::string csv = sweep_to_csv(rows);
    CHECK(csv.rfind("ratio_target,empirical_ratio_median,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("run, then re-certify the written trajectories") {
    const auto dir = scratch("harness");
    RunConfig cfg = small_config(3, 60);
    cfg.trials = 2;
    cfg.checks = cfg.trajectories = cfg.snapshots = true;
    cfg.output_dir = dir.string();
    std::ostringstream out, err;
    CHECK(cmd_run(cfg, out, err) == kExitSuccess);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "trial_1.json"));

    CHECK(!check_trajectory_file(dir / "trial_0.csv").any_failed());
    CHECK(cmd_check(dir / "trial_1.csv", std::nullopt, out, err) == kExitSuccess);
    CHECK(std::filesystem::exists(dir / "trial_1.check.json"));

    std::string csv = read_text_file(dir / "trial_0.csv");
    const std::size_t row = csv.find("\n7,") + 1;
    const std::size_t log_ratio = csv.find(',', csv.find(',', csv.find(',', row) + 1) + 1) + 1;
    csv.insert(log_ratio, "9");
    write_text_file(dir / "tampered.csv", csv);
    std::filesystem::copy_file(dir / "trial_0.json", dir / "tampered.json");
    std::ostringstream err2;
    CHECK(cmd_check(dir / "tampered.csv", dir / "t.json", out, err2) == kExitCheckFailure);
    CHECK(err2.str().find("FAILED:") != std::string::npos);

    write_text_file(dir / "garbage.csv", "step,s\n0,zz\n");
    std::filesystem::copy_file(dir / "trial_0.json", dir / "garbage.json");
    CHECK(cmd_check(dir / "garbage.csv", std::nullopt, out, err) == kExitConfigError);
    CHECK(cmd_check(dir / "absent.csv", std::nullopt, out, err) == kExitConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("invalid configs exit with the config code") {
    RunConfig cfg = small_config();
    cfg.trials = 0;
    std::ostringstream out, err;
    CHECK(cmd_run(cfg, out, err) == kExitConfigError);
    CHECK(err.str().find("trials") != std::string::npos);
    cfg = small_config(4, 0);
    CHECK(cmd_run(cfg, out, err) == kExitConfigError);
    cfg = small_config();
    cfg.eta = -1.0;
    CHECK(cmd_run(cfg, out, err) == kExitConfigError);
}
