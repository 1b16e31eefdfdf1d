#include "skpca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "skpca/datagen.hpp"
#include "skpca/error.hpp"
#include "skpca/spectral.hpp"

namespace skpca {

using nlohmann::json;

namespace {

// JSON has no Inf/NaN; both become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const Quantiles& q) {
    return json{{"min", number(q.min)},
                {"q25", number(q.q25)},
                {"median", number(q.median)},
                {"q75", number(q.q75)},
                {"max", number(q.max)}};
}

json optional_quantiles(const std::optional<Quantiles>& q) { return q ? to_json(*q) : json(nullptr); }

std::string csv_number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return format_double(x);
}

// Label for a sweep row: the convergence guarantee needs R ≥ C·ln n·ln d with C > 10⁴.
constexpr double kRatioHypothesisConstant = 1e4;

std::string sweep_label(double ratio_target, std::size_t n, std::size_t d) {
    if (ratio_target <= 1.0) return "no spike";
    const double need = kRatioHypothesisConstant * std::log(static_cast<double>(n)) * std::log(static_cast<double>(d));
    return ratio_target >= need ? "hypothesis met" : "empirical";
}

void print_check_report(const CheckReport& report, std::ostream& out) {
    out << "alpha=" << report.constants.alpha << " beta=" << report.constants.beta << " eta=" << report.constants.eta
        << " n=" << report.constants.n << " m=" << report.constants.m << '\n';
    for (const CheckEntry& e : report.entries) {
        out << "  " << std::left << std::setw(28) << e.name << std::setw(8) << to_string(e.status);
        if (e.status != CheckStatus::vacuous) out << " margin=" << e.worst_margin;
        if (!e.location.empty()) out << " at " << e.location;
        if (e.status == CheckStatus::vacuous) out << " (" << e.detail << ")";
        out << '\n';
    }
}

}  // namespace

Quantiles quantiles(std::vector<double> values) {
    if (values.empty()) throw InputError("quantiles: empty sample");
    std::sort(values.begin(), values.end());
    auto at = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        if (frac == 0.0 || lo + 1 >= values.size()) return values[lo];
        const double a = values[lo], b = values[lo + 1];
        if (std::isinf(b)) return b;
        return a + frac * (b - a);
    };
    return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

TrialResult run_trial(const RunConfig& cfg, std::size_t trial) {
    TrialResult r;
    r.trial = trial;
    r.seed = cfg.trial_seed(trial);
    const SpikedSpec spec = cfg.trial_generator(trial);
    const FeatureMap phi(cfg.feature_map);
    const std::size_t m = phi.feature_dim();

    try {
        SpikedStream stream = make_spiked_stream(spec);
        r.redrawn = stream.redrawn;

        std::vector<DenseVector> features;
        features.reserve(stream.samples.size());
        double max_sq = 0.0;
        for (const DenseVector& x : stream.samples) {
            features.push_back(phi.apply(x));
            max_sq = std::max(max_sq, features.back().squared_norm());
        }
        const SpectralSummary summary = summarize_features(features);
        r.ratio = summary.ratio;

        r.bound = cfg.bound == BoundPolicy::stream_max ? max_sq : phi.norm_bound(stream.truth.certified_bound);
        r.eta = select_learning_rate(r.bound, cfg.eta);

        const DenseVector& x_star = summary.top_vector;
        const AlphaBeta ab = compute_alpha_beta(summary, r.eta, x_star);
        r.alpha = ab.alpha;
        r.beta = ab.beta;

        StreamState init = cfg.init == InitKind::random ? init_state(m, r.seed) : init_state_at(x_star);
        OjaConfig oc;
        oc.eta = r.eta;
        oc.feature_map = phi;
        oc.record_snapshots = cfg.checks || cfg.snapshots;
        oc.record_trajectory = oc.record_snapshots || cfg.trajectories;
        RunResult run = run_stream(stream.samples, oc, std::move(init), cfg.init);

        const DenseVector& v_hat = run.state.v_hat;
        r.alignment_error = alignment_error(x_star, v_hat);
        if (phi.spec().kind == FeatureKind::identity)
            r.population_alignment_error = alignment_error(stream.truth.top_direction, v_hat);
        r.projection_residual = projection_residual(x_star, v_hat);
        r.log_norm = run.state.log_norm;
        r.final_bound = final_bound_value(r.alpha, r.beta);
        r.final_bound_satisfied = r.projection_residual <= r.final_bound;
        r.hypotheses_met = final_bound_hypotheses_met(r.alpha, r.beta, spec.n, m);

        if (cfg.checks) {
            CheckContext ctx;
            ctx.features = features;
            ctx.v_star = x_star;
            ctx.alpha = r.alpha;
            ctx.beta = r.beta;
            ctx.pair_seed = r.seed;
            r.checks = run_all_checks(*run.trajectory, ctx);
        }
        if (run.trajectory && (cfg.trajectories || cfg.snapshots)) {
            TrajectoryMeta meta;
            meta.eta = r.eta;
            meta.init = cfg.init;
            meta.init_seed = r.seed;
            meta.pair_seed = r.seed;
            meta.feature_map = cfg.feature_map;
            meta.generator = spec;
            meta.bound = r.bound;
            meta.bound_policy = std::string(to_string(cfg.bound));
            meta.steps = run.trajectory->steps();
            meta.final_v_hat = run.state.v_hat;
            meta.final_log_norm = run.state.log_norm;
            r.meta = std::move(meta);
            r.trajectory = std::move(run.trajectory);
            if (cfg.trajectories) r.trajectory_file = "trial_" + std::to_string(trial) + ".csv";
        }
    } catch (const NumericError& e) {
        r.aborted = true;
        r.error = e.what();
    } catch (const DegenerateInputError& e) {
        r.aborted = true;
        r.error = e.what();
    } catch (const ConvergenceError& e) {
        r.aborted = true;
        r.error = e.what();
    }
    return r;
}

RunAggregate aggregate(std::span<const TrialResult> trials) {
    RunAggregate agg;
    std::vector<double> align, pop, resid, ratio;
    std::vector<FinalBoundObservation> obs;
    for (const TrialResult& t : trials) {
        if (t.aborted) {
            ++agg.aborted;
            continue;
        }
        ++agg.completed;
        align.push_back(t.alignment_error);
        if (t.population_alignment_error) pop.push_back(*t.population_alignment_error);
        resid.push_back(t.projection_residual);
        if (std::isfinite(t.ratio)) ratio.push_back(t.ratio);
        obs.push_back({t.projection_residual, t.alpha, t.beta});
        if (t.hypotheses_met) ++agg.hypotheses_met;
        if (t.checks) {
            ++agg.checked;
            if (t.checks->any_failed()) ++agg.check_failures;
        }
    }
    if (!align.empty()) agg.alignment_error = quantiles(align);
    if (!pop.empty()) agg.population_alignment_error = quantiles(pop);
    if (!resid.empty()) agg.projection_residual = quantiles(resid);
    if (!ratio.empty()) agg.ratio = quantiles(ratio);
    agg.final_bound = aggregate_final_bound(obs);
    return agg;
}

RunReport run_experiment(const RunConfig& cfg) {
    cfg.validate();
    RunReport report;
    report.config = cfg;
    report.trials.resize(cfg.trials);
    std::vector<std::exception_ptr> errors(cfg.trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < cfg.trials;) {
            try {
                report.trials[t] = run_trial(cfg, t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(cfg.jobs, cfg.trials);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    report.aggregate = aggregate(report.trials);
    return report;
}

json to_json(const CheckReport& report) {
    json entries = json::array();
    for (const CheckEntry& e : report.entries) {
        entries.push_back(json{{"name", e.name},
                               {"status", to_string(e.status)},
                               {"worst_margin", number(e.worst_margin)},
                               {"tolerance", e.tolerance},
                               {"location", e.location},
                               {"detail", e.detail},
                               {"assurance", to_string(e.assurance)}});
    }
    const CheckConstants& c = report.constants;
    return json{{"format", "skpca-check-report/1"},
                {"constants", {{"alpha", c.alpha}, {"beta", c.beta}, {"eta", c.eta}, {"n", c.n}, {"m", c.m}}},
                {"entries", std::move(entries)},
                {"failed", report.any_failed()}};
}

json to_json(const TrialResult& t) {
    json j{{"trial", t.trial}, {"seed", t.seed}, {"status", t.aborted ? "numeric_abort" : "ok"}};
    if (t.aborted) {
        j["error"] = t.error;
        return j;
    }
    j["alignment_error"] = t.alignment_error;
    j["population_alignment_error"] =
        t.population_alignment_error ? json(*t.population_alignment_error) : json(nullptr);
    j["projection_residual"] = t.projection_residual;
    j["log_norm"] = t.log_norm;
    j["ratio"] = number(t.ratio);
    j["ratio_infinite"] = std::isinf(t.ratio);
    j["alpha"] = t.alpha;
    j["beta"] = t.beta;
    j["eta"] = t.eta;
    j["bound"] = t.bound;
    j["redrawn"] = t.redrawn;
    j["final_bound"] = {{"value", t.final_bound},
                        {"satisfied", t.final_bound_satisfied},
                        {"hypotheses_met", t.hypotheses_met},
                        {"assurance", t.hypotheses_met ? "certified" : "empirical"}};
    j["checks"] = t.checks ? to_json(*t.checks) : json(nullptr);
    j["trajectory"] = t.trajectory_file ? json(*t.trajectory_file) : json(nullptr);
    return j;
}

json to_json(const RunReport& report) {
    json trials = json::array();
    for (const TrialResult& t : report.trials) trials.push_back(to_json(t));
    const RunAggregate& a = report.aggregate;
    const FinalBoundAggregate& fb = a.final_bound;
    json agg{{"completed", a.completed},
             {"aborted", a.aborted},
             {"alignment_error", optional_quantiles(a.alignment_error)},
             {"population_alignment_error", optional_quantiles(a.population_alignment_error)},
             {"projection_residual", optional_quantiles(a.projection_residual)},
             {"ratio", optional_quantiles(a.ratio)},
             {"final_bound",
              {{"trials", fb.trials},
               {"failures", fb.failures},
               {"failure_fraction", fb.failure_fraction},
               {"allowed_fraction", fb.allowed_fraction},
               {"satisfied", fb.satisfied}}},
             {"hypotheses_met", a.hypotheses_met},
             {"checked", a.checked},
             {"check_failures", a.check_failures}};
    return json{{"format", "skpca-run-report/1"},
                {"config", config_result_fields(report.config)},
                {"trials", std::move(trials)},
                {"aggregate", std::move(agg)}};
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.sweep_ratios.size() < 2) throw ConfigError("sweep_ratios: a sweep needs at least two ratios");
    std::vector<SweepRow> rows;
    const std::size_t d = cfg.generator.input_dim;
    for (double ratio : cfg.sweep_ratios) {
        RunConfig c = cfg;
        c.sweep_ratios.clear();
        c.generator.lambda2 = c.generator.lambda1 / ratio;
        c.trajectories = false;
        c.snapshots = false;
        const RunReport report = run_experiment(c);

        SweepRow row;
        row.ratio_target = ratio;
        row.logd_over_r = std::log(static_cast<double>(d)) / ratio;
        row.trials = report.trials.size();
        row.aborted = report.aggregate.aborted;
        row.label = sweep_label(ratio, c.generator.n, d);
        std::vector<double> ratios;
        std::size_t within = 0;
        for (const TrialResult& t : report.trials) {
            if (t.aborted) continue;
            ratios.push_back(t.ratio);
            if (t.alignment_error <= row.logd_over_r) ++within;
        }
        const double completed = static_cast<double>(report.aggregate.completed);
        row.empirical_ratio_median = ratios.empty() ? std::numeric_limits<double>::quiet_NaN() : quantiles(ratios).median;
        row.median_alignment_error = report.aggregate.alignment_error
                                         ? report.aggregate.alignment_error->median
                                         : std::numeric_limits<double>::quiet_NaN();
        row.bound_satisfied_fraction = completed > 0 ? static_cast<double>(within) / completed : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
    std::string out =
        "ratio_target,empirical_ratio_median,median_alignment_error,logd_over_r,bound_satisfied_fraction,trials,"
        "aborted,label\n";
    for (const SweepRow& r : rows) {
        out += csv_number(r.ratio_target) + ',' + csv_number(r.empirical_ratio_median) + ',' +
               csv_number(r.median_alignment_error) + ',' + csv_number(r.logd_over_r) + ',' +
               csv_number(r.bound_satisfied_fraction) + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.aborted) + ',' + r.label + '\n';
    }
    return out;
}

CheckReport check_trajectory_file(const std::filesystem::path& csv_path) {
    const std::string text = read_text_file(csv_path);
    const std::filesystem::path side = sidecar_path(csv_path);
    json meta_json;
    try {
        meta_json = json::parse(read_text_file(side));
    } catch (const json::parse_error& e) {
        throw ConfigError(side.string() + ": " + e.what());
    }
    const TrajectoryMeta meta = meta_from_json(meta_json);
    const Trajectory t = trajectory_from_csv(text, meta);
    if (!t.has_snapshots()) throw InputError(csv_path.string() + ": trajectory has no v_hat snapshot columns");

    const FeatureMap phi(meta.feature_map);
    const SpikedStream stream = make_spiked_stream(meta.generator);
    std::vector<DenseVector> features;
    features.reserve(stream.samples.size());
    for (const DenseVector& x : stream.samples) features.push_back(phi.apply(x));
    const SpectralSummary summary = summarize_features(features);
    const AlphaBeta ab = compute_alpha_beta(summary, meta.eta, summary.top_vector);

    CheckContext ctx;
    ctx.features = features;
    ctx.v_star = summary.top_vector;
    ctx.alpha = ab.alpha;
    ctx.beta = ab.beta;
    ctx.pair_seed = meta.pair_seed;
    return run_all_checks(t, ctx);
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    RunReport report;
    try {
        report = run_experiment(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const InputError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    const std::filesystem::path dir = resolve_output_dir(cfg);
    for (const TrialResult& t : report.trials) {
        if (!t.trajectory_file) continue;
        const std::filesystem::path csv = dir / *t.trajectory_file;
        write_text_file(csv, trajectory_to_csv(*t.trajectory));
        write_text_file(sidecar_path(csv), meta_to_json(*t.meta).dump(2) + "\n");
    }
    write_text_file(dir / "report.json", to_json(report).dump(2) + "\n");

    for (const TrialResult& t : report.trials) {
        out << "trial " << t.trial << " seed " << t.seed << ": ";
        if (t.aborted) {
            out << "numeric abort (" << t.error << ")\n";
            continue;
        }
        out << "alignment_error=" << t.alignment_error << " residual=" << t.projection_residual
            << " R=" << t.ratio << " alpha=" << t.alpha << " beta=" << t.beta << " eta=" << t.eta << '\n';
        if (t.checks) print_check_report(*t.checks, out);
    }
    const RunAggregate& a = report.aggregate;
    if (a.alignment_error)
        out << "median alignment_error=" << a.alignment_error->median << " over " << a.completed << " trials\n";
    out << "final-bound failures " << a.final_bound.failures << "/" << a.final_bound.trials << " (allowed fraction "
        << a.final_bound.allowed_fraction << ")\n";
    out << "report: " << (dir / "report.json").string() << '\n';

    if (a.completed == 0) return kExitNumericAbort;
    if (cfg.checks && (a.check_failures > 0 || !a.final_bound.satisfied)) return kExitCheckFailure;
    return kExitSuccess;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<SweepRow> rows;
    try {
        rows = run_sweep(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const InputError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const std::string csv = sweep_to_csv(rows);
    const std::filesystem::path dir = resolve_output_dir(cfg);
    write_text_file(dir / "sweep.csv", csv);
    out << csv;
    const bool all_aborted =
        std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.aborted == r.trials; });
    return all_aborted ? kExitNumericAbort : kExitSuccess;
}

int cmd_check(const std::filesystem::path& csv_path, const std::optional<std::filesystem::path>& report_path,
              std::ostream& out, std::ostream& err) {
    CheckReport report;
    try {
        report = check_trajectory_file(csv_path);
    } catch (const ParseError& e) {
        err << "parse error: " << csv_path.string() << ": " << e.what() << '\n';
        return kExitConfigError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumericAbort;
    }
    std::filesystem::path dest = report_path.value_or(csv_path);
    if (!report_path) dest.replace_extension(".check.json");
    write_text_file(dest, to_json(report).dump(2) + "\n");
    print_check_report(report, out);
    for (const CheckEntry& e : report.entries)
        if (e.status == CheckStatus::fail) err << "FAILED: " << e.name << " at " << e.location << '\n';
    return report.any_failed() ? kExitCheckFailure : kExitSuccess;
}

}  // namespace skpca
