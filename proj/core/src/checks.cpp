#include "skpca/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "skpca/error.hpp"
#include "skpca/random.hpp"

namespace skpca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Smallest margin seen plus where it happened.
class MarginTracker {
public:
    template <typename LocationFn>
    void update(double margin, LocationFn&& where) {
        if (margin < worst_ || std::isnan(margin)) {
            worst_ = std::isnan(margin) ? -kInf : margin;
            location_ = where();
        }
    }

    CheckEntry finish(std::string_view name, double tolerance, std::string detail = {}) const {
        CheckEntry e;
        e.name = std::string(name);
        e.tolerance = tolerance;
        e.worst_margin = worst_;
        e.location = location_;
        e.detail = std::move(detail);
        e.status = (worst_ < -tolerance) ? CheckStatus::fail : CheckStatus::pass;
        return e;
    }

private:
    double worst_ = kInf;
    std::string location_;
};

std::string step_at(std::size_t i) { return "step " + std::to_string(i); }

std::string pair_at(std::size_t a, std::size_t b) {
    return "pair (" + std::to_string(a) + "," + std::to_string(b) + ")";
}

CheckEntry vacuous(std::string_view name, std::string reason) {
    CheckEntry e;
    e.name = std::string(name);
    e.status = CheckStatus::vacuous;
    e.worst_margin = kNaN;
    e.detail = std::move(reason);
    return e;
}

void require_features(const Trajectory& t, std::span<const DenseVector> features) {
    if (features.size() != t.steps()) {
        throw InputError("checks: trajectory has " + std::to_string(t.steps()) + " steps but " +
                         std::to_string(features.size()) + " replayed features were supplied");
    }
}

void require_at_v_star(const Trajectory& t, std::string_view what) {
    if (t.init != InitKind::at_v_star) {
        throw PreconditionError(std::string(what) + " requires a trajectory initialized at v* (v0 = v*)");
    }
}

// P v = v − ⟨v, v*⟩ v*
std::vector<double> project_out(const DenseVector& v, const DenseVector& v_star) {
    if (v.size() != v_star.size()) throw DimensionError("projection: v* length mismatch");
    const double c = dot(v, v_star);
    std::vector<double> out(v.values());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= c * v_star[k];
    return out;
}

double norm_of(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

double log_n(std::size_t n) { return std::log(static_cast<double>(std::max<std::size_t>(n, 1))); }

}  // namespace

std::string_view to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::vacuous: return "vacuous";
    }
    return "unknown";
}

std::string_view to_string(Assurance assurance) {
    return assurance == Assurance::certified ? "certified" : "empirical";
}

bool CheckReport::any_failed() const {
    return std::any_of(entries.begin(), entries.end(),
                       [](const CheckEntry& e) { return e.status == CheckStatus::fail; });
}

const CheckEntry* CheckReport::find(std::string_view name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

CheckEntry check_record_consistency(const Trajectory& t, std::span<const DenseVector> features) {
    require_features(t, features);
    const auto vh = t.snapshots();
    const double eta = t.eta;
    MarginTracker tracker;

    for (std::size_t i = 0; i <= t.steps(); ++i) {
        const double unit_err = std::abs(vh[i]->norm() - 1.0);
        tracker.update(kInequalitySlack - kUnitNormTolerance - unit_err, [&] { return step_at(i) + " (unit norm)"; });
    }
    for (std::size_t i = 1; i <= t.steps(); ++i) {
        const StepRecord& r = t.records[i - 1];
        const DenseVector& f = features[i - 1];
        const double fn = f.norm();
        if (r.step != i) tracker.update(-kInf, [&] { return step_at(i) + " (step index)"; });

        const double s = dot(f, *vh[i - 1]);
        tracker.update(-std::abs(r.s - s) / std::max(1.0, fn), [&] { return step_at(i) + " (s)"; });
        tracker.update(-std::abs(r.phi_norm_sq - fn * fn) / std::max(1.0, fn * fn),
                       [&] { return step_at(i) + " (phi_norm_sq)"; });

        std::vector<double> u(vh[i - 1]->values());
        for (std::size_t k = 0; k < u.size(); ++k) u[k] += eta * s * f[k];
        const double un = norm_of(u);
        double worst = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) worst = std::max(worst, std::abs(u[k] / un - (*vh[i])[k]));
        tracker.update(-worst, [&] { return step_at(i) + " (v_hat snapshot)"; });
    }
    const double l_n = t.log_norms().back();
    tracker.update(-std::abs(t.final_state.log_norm - l_n) / std::max(1.0, std::abs(l_n)),
                   [&] { return std::string("final state (log_norm)"); });
    return tracker.finish(check_names::record_consistency, kInequalitySlack,
                          "recorded scalars and snapshots vs. recomputation from the replayed stream");
}

std::vector<CheckEntry> check_update_properties(const Trajectory& t, std::span<const DenseVector> features) {
    require_features(t, features);
    const auto vh = t.snapshots();
    const std::size_t n = t.steps();
    const std::size_t m = t.feature_dim();
    const double eta = t.eta;
    const std::vector<double> L = t.log_norms();
    std::vector<CheckEntry> out;

    // Closed form vs. direct norm of u = v̂ + η s f.
    {
        MarginTracker tracker;
        for (std::size_t i = 1; i <= n; ++i) {
            const DenseVector& f = features[i - 1];
            const DenseVector& prev = *vh[i - 1];
            const double s = dot(f, prev);
            std::vector<double> u(prev.values());
            for (std::size_t k = 0; k < m; ++k) u[k] += eta * s * f[k];
            const double direct = std::log(dot(u, u)) - std::log(prev.squared_norm());
            tracker.update(-std::abs(t.records[i - 1].log_ratio - direct), [&] { return step_at(i); });
        }
        out.push_back(tracker.finish(check_names::norm_recursion, kClosedFormTolerance,
                                     "|log_ratio - log(|u|^2/|v_hat|^2)| with u evaluated directly"));
    }

    // Norms never shrink.
    {
        MarginTracker tracker;
        for (std::size_t i = 1; i <= n; ++i) {
            tracker.update(t.records[i - 1].log_ratio, [&] { return step_at(i); });
            tracker.update(L[i] - L[i - 1], [&] { return step_at(i); });
        }
        out.push_back(tracker.finish(check_names::monotone_norm, kInequalitySlack, "log_ratio >= 0 and L nondecreasing"));
    }

    // Log growth, with the statement's constant η and the proof's 0.5η reported alongside.
    {
        MarginTracker tracker;
        double half_worst = kInf;
        for (std::size_t i = 1; i <= n; ++i) {
            const StepRecord& r = t.records[i - 1];
            const double gain = eta * r.s * r.s;
            tracker.update(r.log_ratio - gain, [&] { return step_at(i); });
            half_worst = std::min(half_worst, r.log_ratio - 0.5 * gain);
        }
        out.push_back(tracker.finish(check_names::log_growth, kClosedFormTolerance,
                                     "log_ratio >= eta*s^2 (statement constant); worst margin against the proof's "
                                     "0.5*eta*s^2: " + fmt(half_worst)));
    }

    // Pairwise growth over all pairs a < b. With D_i = 2L_i − Σ_{j≤i} ηs_j², the
    // pair margin is D_b − D_a, minimized by a running maximum of D.
    {
        MarginTracker tracker;
        double prefix = 0.0;
        double best_d = 2.0 * L[0];
        std::size_t best_a = 0;
        for (std::size_t b = 1; b <= n; ++b) {
            const double s = t.records[b - 1].s;
            prefix += eta * s * s;
            const double d = 2.0 * L[b] - prefix;
            tracker.update(d - best_d, [&] { return pair_at(best_a, b); });
            if (d > best_d) {
                best_d = d;
                best_a = b;
            }
        }
        out.push_back(tracker.finish(check_names::pairwise_growth, kInequalitySlack,
                                     "2(L_b - L_a) >= sum_{a<i<=b} eta*s_i^2 for every pair"));
    }

    // Explicit unnormalized reconstruction at desk scale.
    if (m > kExplicitMaxDim || n > kExplicitMaxSteps) {
        out.push_back(vacuous(check_names::telescoping, "hypothesis m <= 32 and n <= 64 unmet (m=" + std::to_string(m) +
                                                            ", n=" + std::to_string(n) + "); reconstruction skipped"));
    } else {
        std::vector<std::vector<double>> v(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            const double scale = std::exp(L[i]);
            v[i] = vh[i]->values();
            for (double& x : v[i]) x *= scale;
        }
        std::vector<std::vector<double>> inc(n + 1, std::vector<double>(m, 0.0));
        for (std::size_t i = 1; i <= n; ++i) {
            const DenseVector& f = features[i - 1];
            const double c = eta * dot(f.entries(), std::span<const double>(v[i - 1]));
            for (std::size_t k = 0; k < m; ++k) inc[i][k] = c * f[k];
        }
        MarginTracker tracker;
        for (std::size_t a = 0; a < n; ++a) {
            std::vector<double> acc(m, 0.0);
            for (std::size_t b = a + 1; b <= n; ++b) {
                double scale = 1.0;
                double worst = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    acc[k] += inc[b][k];
                    scale = std::max({scale, std::abs(v[b][k]), std::abs(v[a][k])});
                    worst = std::max(worst, std::abs((v[b][k] - v[a][k]) - acc[k]));
                }
                tracker.update(-worst / scale, [&] { return pair_at(a, b); });
            }
        }
        out.push_back(tracker.finish(check_names::telescoping, kReconstructionTolerance,
                                     "v_b - v_a = sum eta f_i f_i^T v_{i-1}, entrywise relative"));
    }
    return out;
}

CheckEntry check_growth_implies_correctness(const Trajectory& t, const DenseVector& v_star, double alpha) {
    const auto vh = t.snapshots();
    const std::vector<double> L = t.log_norms();
    const double root_alpha = std::sqrt(std::max(0.0, alpha));
    const bool at_star = t.init == InitKind::at_v_star;
    const double initial_residual = norm_of(project_out(*vh[0], v_star));

    MarginTracker tracker;
    for (std::size_t i = 0; i <= t.steps(); ++i) {
        const double residual = norm_of(project_out(*vh[i], v_star));
        const double bound = at_star ? root_alpha : root_alpha + initial_residual * std::exp(-(L[i] - L[0]));
        tracker.update(bound - residual, [&] { return step_at(i); });
    }
    return tracker.finish(check_names::growth_correctness, kInequalitySlack,
                          at_star ? "at-v* corollary: |P v_hat_i| <= sqrt(alpha)"
                                  : "|P v_hat_i| <= sqrt(alpha) + |P v_hat_0| exp(-L_i)");
}

std::vector<std::pair<std::size_t, std::size_t>> two_step_pairs(std::size_t n, std::size_t sampled,
                                                                std::uint64_t seed) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n == 0) return pairs;
    pairs.reserve(n + sampled);
    for (std::size_t a = 0; a < n; ++a) pairs.emplace_back(a, a + 1);
    Rng rng = make_rng(seed, RngStream::pairs);
    std::uniform_int_distribution<std::size_t> pick(0, n);
    while (pairs.size() < n + sampled) {
        std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        pairs.emplace_back(a, b);
    }
    return pairs;
}

CheckEntry check_two_time_steps(const Trajectory& t, const DenseVector& v_star, double alpha,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    require_at_v_star(t, "two-time-steps bound");
    const auto vh = t.snapshots();
    const std::vector<double> L = t.log_norms();
    std::vector<std::vector<double>> projected(vh.size());
    for (std::size_t i = 0; i < vh.size(); ++i) projected[i] = project_out(*vh[i], v_star);

    MarginTracker tracker;
    for (auto [a, b] : pairs) {
        if (!(a < b) || b > t.steps()) throw InputError("two-time-steps: pair out of range");
        double lhs = 0.0;
        for (std::size_t k = 0; k < projected[a].size(); ++k) {
            const double d = projected[b][k] - projected[a][k];
            lhs += d * d;
        }
        const double rhs = kTwoStepConstant * alpha * (L[b] - L[a]);
        tracker.update(rhs - lhs, [&] { return pair_at(a, b); });
    }
    return tracker.finish(check_names::two_time_steps, kInequalitySlack,
                          "|P v_hat_b - P v_hat_a|^2 <= 50 alpha (L_b - L_a) over " + std::to_string(pairs.size()) +
                              " pairs");
}

CheckEntry check_projected_energy(const Trajectory& t, std::span<const DenseVector> features,
                                  const DenseVector& v_star, double alpha) {
    require_at_v_star(t, "projected-energy bound");
    require_features(t, features);
    const auto vh = t.snapshots();
    const std::size_t n = t.steps();
    double lhs = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const std::vector<double> p = project_out(*vh[i - 1], v_star);
        const double c = dot(features[i - 1].entries(), std::span<const double>(p));
        lhs += t.eta * c * c;
    }
    const double ln = log_n(n);
    const double rhs = kProjectedEnergyConstant * alpha * alpha * ln * ln * (t.log_norms().back() - t.initial.log_norm);
    MarginTracker tracker;
    tracker.update(rhs - lhs, [&] { return step_at(n); });
    return tracker.finish(check_names::projected_energy, kInequalitySlack,
                          "eta sum <f_i, P v_hat_{i-1}>^2 = " + fmt(lhs) + " <= 100 alpha^2 ln^2(n) L_n = " + fmt(rhs));
}

std::vector<CheckEntry> check_norm_lower_bounds(const Trajectory& t, double alpha, double beta) {
    const std::size_t n = t.steps();
    const std::vector<double> L = t.log_norms();
    std::vector<CheckEntry> out;

    if (t.init != InitKind::at_v_star) {
        out.push_back(vacuous(check_names::right_direction, "hypothesis v0 = v* unmet (random initialization)"));
    } else if (!(alpha < kGrowthAlphaLimit)) {
        out.push_back(vacuous(check_names::right_direction,
                              "hypothesis alpha < 0.1 unmet (alpha=" + fmt(alpha) + ")"));
    } else {
        const double ln = log_n(n);
        const double bound = (beta / 8.0) / (1.0 + kGrowthConstant * alpha * alpha * ln * ln);
        const double observed = L[n] - L[0];
        MarginTracker tracker;
        tracker.update(observed - bound, [&] { return step_at(n); });
        out.push_back(tracker.finish(check_names::right_direction, kInequalitySlack,
                                     "log|v_n| = " + fmt(observed) + " >= (beta/8)/(1+200 alpha^2 ln^2 n) = " +
                                         fmt(bound)));
    }

    // Log-domain form of |v_n|^2 >= η Σ ⟨φ(xᵢ), vᵢ₋₁⟩², at every prefix.
    {
        MarginTracker tracker;
        const double log_eta = std::log(t.eta);
        double running = -kInf;  // logsumexp of (log sᵢ² + 2L_{i−1})
        for (std::size_t i = 1; i <= n; ++i) {
            const double s = t.records[i - 1].s;
            if (s != 0.0) {
                const double term = 2.0 * std::log(std::abs(s)) + 2.0 * (L[i - 1] - L[0]);
                const double hi = std::max(running, term);
                running = hi + std::log(std::exp(running - hi) + std::exp(term - hi));
            }
            if (running > -kInf) {
                tracker.update(2.0 * (L[i] - L[0]) - (log_eta + running), [&] { return step_at(i); });
            }
        }
        CheckEntry e = tracker.finish(check_names::norm_lower_bound, kInequalitySlack,
                                      "2 L_i >= log(eta) + logsumexp_{j<=i}(log s_j^2 + 2 L_{j-1})");
        if (running == -kInf) {
            e.worst_margin = kInf;
            e.detail += " (every s_i is zero; right side is -inf)";
        }
        out.push_back(std::move(e));
    }
    return out;
}

double final_bound_value(double alpha, double beta) {
    return std::sqrt(std::max(0.0, alpha)) + std::exp(-beta / kFinalBoundRate);
}

bool final_bound_hypotheses_met(double alpha, double beta, std::size_t n, std::size_t m) {
    return alpha > 0.0 && alpha * kHypothesisConstant * log_n(n) < 1.0 && beta >= kHypothesisConstant * log_n(m);
}

CheckEntry check_final_bound(const Trajectory& t, const DenseVector& v_star, double alpha, double beta) {
    const std::size_t n = t.steps();
    const std::size_t m = t.feature_dim();
    const double residual = norm_of(project_out(t.final_state.v_hat, v_star));
    const double bound = final_bound_value(alpha, beta);

    std::string unmet;
    if (!(alpha > 0.0 && alpha * kHypothesisConstant * log_n(n) < 1.0)) unmet += "alpha in (0, 1/(C ln n))";
    if (!(beta >= kHypothesisConstant * log_n(m))) {
        if (!unmet.empty()) unmet += " and ";
        unmet += "beta >= C ln m";
    }
    const bool hypotheses = unmet.empty();

    MarginTracker tracker;
    tracker.update(bound - residual, [&] { return step_at(n); });
    CheckEntry e = tracker.finish(check_names::final_bound, kInequalitySlack,
                                  "observed |P v_hat_n| = " + fmt(residual) + ", bound sqrt(alpha)+exp(-beta/200) = " +
                                      fmt(bound));
    if (t.init == InitKind::at_v_star) {
        e.detail += "; at-v* run (deterministic: residual stays within sqrt(alpha))";
        return e;
    }
    e.assurance = hypotheses ? Assurance::certified : Assurance::empirical;
    if (!hypotheses) {
        e.detail += "; hypotheses unmet (C=1000): " + unmet;
        if (e.status == CheckStatus::fail) {
            e.status = CheckStatus::vacuous;
            e.detail += "; single-run exceedance outside the hypotheses is not a violation";
        }
    }
    return e;
}

CheckReport run_all_checks(const Trajectory& t, const CheckContext& ctx) {
    if (!t.has_snapshots()) throw InputError("run_all_checks: trajectory has no v_hat snapshots");
    CheckReport report;
    report.constants = {ctx.alpha, ctx.beta, t.eta, t.steps(), t.feature_dim()};
    auto& out = report.entries;

    out.push_back(check_record_consistency(t, ctx.features));
    for (auto& e : check_update_properties(t, ctx.features)) out.push_back(std::move(e));
    out.push_back(check_growth_implies_correctness(t, ctx.v_star, ctx.alpha));

    const std::string unmet = "hypothesis v0 = v* unmet (random initialization)";
    if (t.init == InitKind::at_v_star) {
        const auto pairs = two_step_pairs(t.steps(), ctx.sampled_pairs, ctx.pair_seed);
        out.push_back(check_two_time_steps(t, ctx.v_star, ctx.alpha, pairs));
        out.push_back(check_projected_energy(t, ctx.features, ctx.v_star, ctx.alpha));
    } else {
        out.push_back(vacuous(check_names::two_time_steps, unmet));
        out.push_back(vacuous(check_names::projected_energy, unmet));
    }
    for (auto& e : check_norm_lower_bounds(t, ctx.alpha, ctx.beta)) out.push_back(std::move(e));
    out.push_back(check_final_bound(t, ctx.v_star, ctx.alpha, ctx.beta));
    return report;
}

FinalBoundAggregate aggregate_final_bound(std::span<const FinalBoundObservation> observations, double slack) {
    FinalBoundAggregate agg;
    agg.trials = observations.size();
    if (observations.empty()) return agg;
    double allowance = 0.0;
    for (const auto& o : observations) {
        if (o.residual > final_bound_value(o.alpha, o.beta)) ++agg.failures;
        allowance += std::exp(-o.beta / kFinalBoundRate);
    }
    const double count = static_cast<double>(agg.trials);
    agg.failure_fraction = static_cast<double>(agg.failures) / count;
    agg.allowed_fraction = allowance / count + slack;
    agg.satisfied = agg.failure_fraction <= agg.allowed_fraction;
    return agg;
}

}  // namespace skpca
