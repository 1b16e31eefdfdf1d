#include <cmath>
#include <vector>

#include <doctest.h>

#include "skpca/error.hpp"
#include "skpca/oja.hpp"
#include "support.hpp"

using namespace skpca;

namespace {

OjaConfig identity_config(std::size_t d, double eta, bool snapshots = false) {
    OjaConfig cfg;
    cfg.eta = eta;
    cfg.feature_map = FeatureMap(FeatureMapSpec::identity(d));
    cfg.record_trajectory = snapshots;
    cfg.record_snapshots = snapshots;
    return cfg;
}

}  // namespace

TEST_CASE("select_learning_rate examples") {
    CHECK(select_learning_rate(25.0) == doctest::Approx(0.004).epsilon(1e-15));
    CHECK(select_learning_rate(2.0, 0.01) == 0.01);
    const double eta = select_learning_rate(0.5);
    CHECK(eta < 0.1);
    CHECK(eta > 0.1 - 1e-15);
    CHECK_THROWS_AS(select_learning_rate(0.0), InputError);
    CHECK_THROWS_AS(select_learning_rate(-1.0), InputError);
    CHECK_THROWS_AS(validate_learning_rate(0.05, 4.0), InputError);
    CHECK_NOTHROW(validate_learning_rate(0.025, 4.0));
}

TEST_CASE("init_state is seeded and normalized") {
    const StreamState a = init_state(3, 42), b = init_state(3, 42);
    CHECK(a.v_hat == b.v_hat);
    CHECK(std::abs(a.v_hat.norm() - 1.0) <= 1e-12);
    CHECK(a.log_norm == 0.0);
    CHECK(a.step == 0);
    CHECK(!(init_state(3, 43).v_hat == a.v_hat));
    CHECK_THROWS_AS(init_state(0, 1), InputError);
}

TEST_CASE("init_state draws are centered") {
    double mean0 = 0.0, mean1 = 0.0;
    const int draws = 10000;
    for (int s = 0; s < draws; ++s) {
        const StreamState st = init_state(2, static_cast<std::uint64_t>(s));
        mean0 += st.v_hat[0];
        mean1 += st.v_hat[1];
    }
    CHECK(std::abs(mean0 / draws) <= 0.05);
    CHECK(std::abs(mean1 / draws) <= 0.05);
}

TEST_CASE("init_state_at normalizes") {
    CHECK(init_state_at(DenseVector{1, 0}).v_hat == DenseVector{1, 0});
    const StreamState s = init_state_at(DenseVector{2, 0});
    CHECK(s.v_hat == DenseVector{1, 0});
    CHECK(s.log_norm == 0.0);
    const StreamState t = init_state_at(DenseVector{1, 1});
    CHECK(t.v_hat[0] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(init_state_at(DenseVector::zeros(2)), InputError);
}

TEST_CASE("oja_step with an orthogonal sample is a no-op") {
    const StepResult r = oja_step(init_state_at(DenseVector{1, 0}), DenseVector{0, 1}, identity_config(2, 0.05));
    CHECK(r.state.v_hat == DenseVector{1, 0});
    CHECK(r.record.log_ratio == 0.0);
    CHECK(r.record.s == 0.0);
    CHECK(r.state.step == 1);
}

TEST_CASE("oja_step with a collinear sample grows by 1 + eta") {
    const StepResult r = oja_step(init_state_at(DenseVector{1, 0}), DenseVector{1, 0}, identity_config(2, 0.05));
    CHECK(r.state.v_hat == DenseVector{1, 0});
    CHECK(r.record.log_ratio == doctest::Approx(std::log(1.1025)).epsilon(1e-14));
    CHECK(std::exp(r.state.log_norm) == doctest::Approx(1.05).epsilon(1e-14));
}

TEST_CASE("oja_step closed form matches the direct norm") {
    // u = (1,0) + 0.01·3·(3,4) = (1.09, 0.12); ‖u‖² = 1.2025.
    const StepResult r = oja_step(init_state_at(DenseVector{1, 0}), DenseVector{3, 4}, identity_config(2, 0.01));
    CHECK(r.record.s == 3.0);
    CHECK(r.record.phi_norm_sq == 25.0);
    CHECK(std::abs(r.record.log_ratio - std::log(1.2025)) <= 1e-14);
    const double direct = std::log(1.09 * 1.09 + 0.12 * 0.12);
    CHECK(std::abs(r.record.log_ratio - direct) <= 1e-14);
    const double un = std::sqrt(1.2025);
    CHECK(r.state.v_hat[0] == doctest::Approx(1.09 / un).epsilon(1e-15));
    CHECK(r.state.v_hat[1] == doctest::Approx(0.12 / un).epsilon(1e-15));
}

TEST_CASE("oja_step rejects bad input") {
    const OjaConfig cfg = identity_config(2, 0.05);
    CHECK_THROWS_AS(oja_step(init_state_at(DenseVector{1, 0}), DenseVector{1, 0, 0}, cfg), InputError);
    CHECK_THROWS_AS(oja_step(init_state_at(DenseVector{1, 0, 0}), DenseVector{1, 0}, cfg), DimensionError);
    CHECK_THROWS_AS(oja_step(init_state_at(DenseVector{1, 0}), DenseVector{1e200, 1e200}, cfg), NumericError);
}

TEST_CASE("run_stream fixed point and empty stream") {
    const std::vector<DenseVector> stream(50, DenseVector{1, 0, 0});
    const RunResult r = run_stream(stream, identity_config(3, 0.05), init_state_at(DenseVector{1, 0, 0}));
    CHECK(r.state.v_hat == DenseVector{1, 0, 0});
    CHECK(r.state.step == 50);
    CHECK(r.state.log_norm == doctest::Approx(50 * std::log(1.05)).epsilon(1e-12));

    const std::vector<DenseVector> empty;
    const StreamState init = init_state(3, 1);
    const RunResult e = run_stream(empty, identity_config(3, 0.05), init);
    CHECK(e.state.v_hat == init.v_hat);
    CHECK(e.state.log_norm == 0.0);
}

TEST_CASE("run_stream alignment grows monotonically along a repeated axis") {
    // Only the e₁ component grows: v_n = ((1+η)ⁿ/√2, 1/√2), so ⟨v̂_n, e₁⟩² = g²/(g²+1) with g = (1+η)ⁿ.
    const double eta = 0.05;
    StreamState state = init_state_at(DenseVector{1, 1});
    const OjaConfig cfg = identity_config(2, eta);
    double previous = state.v_hat[0] * state.v_hat[0];
    for (int n = 1; n <= 100; ++n) {
        state = oja_step(state, DenseVector{1, 0}, cfg).state;
        const double c2 = state.v_hat[0] * state.v_hat[0];
        const double g = std::pow(1 + eta, n);
        CHECK(c2 > previous);
        CHECK(std::abs(c2 - g * g / (g * g + 1)) <= 1e-12);
        previous = c2;
    }
}

TEST_CASE("trajectory recording and scale invariance") {
    auto g = test::rng(31);
    std::vector<DenseVector> stream;
    for (int i = 0; i < 40; ++i) stream.push_back(test::gaussian_vector(g, 4));
    const OjaConfig cfg = identity_config(4, 0.005, true);
    const DenseVector v0{0.5, -1, 2, 0.25};
    const RunResult a = run_stream(stream, cfg, init_state_at(v0), InitKind::at_v_star);
    const RunResult b = run_stream(stream, cfg, init_state_at(v0.scaled(37.0)), InitKind::at_v_star);
    REQUIRE(a.trajectory);
    REQUIRE(b.trajectory);
    CHECK(a.trajectory->steps() == 40);
    CHECK(a.trajectory->has_snapshots());
    CHECK(a.trajectory->log_norms().size() == 41);
    for (std::size_t i = 0; i < 40; ++i) {
        const DenseVector diff = *a.trajectory->records[i].v_hat_snapshot - *b.trajectory->records[i].v_hat_snapshot;
        CHECK(diff.max_abs() <= 1e-14);
        CHECK(std::abs(a.trajectory->records[i].v_hat_snapshot->norm() - 1.0) <= 1e-12);
        CHECK(a.trajectory->records[i].log_ratio >= 0.0);
    }
    CHECK(a.trajectory->log_norms().back() == doctest::Approx(a.state.log_norm).epsilon(1e-12));
}

TEST_CASE("init kind names") {
    CHECK(parse_init_kind("random") == InitKind::random);
    CHECK(parse_init_kind("vstar") == InitKind::at_v_star);
    CHECK(to_string(InitKind::at_v_star) == "vstar");
    CHECK_THROWS_AS(parse_init_kind("zeros"), ConfigError);
}
