#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ergoliq/market_model.hpp"

using namespace ergoliq;
using Catch::Approx;

namespace {

MarketParams quiet_params() {
    MarketParams p;
    p.sigma = 0;
    p.lambda_plus = p.lambda_minus = 0;
    return p;
}

} // namespace

TEST_CASE("sample_jumps with zero intensity is empty", "[market_model][jumps]") {
    MarketParams p;
    p.lambda_plus = p.lambda_minus = 0;
    Rng rng = make_rng(1);
    CHECK(sample_jumps(p, 100.0, rng).empty());
}

TEST_CASE("sample_jumps rejects a non-positive horizon", "[market_model][jumps]") {
    MarketParams p;
    Rng rng = make_rng(1);
    CHECK_THROWS_AS(sample_jumps(p, 0.0, rng), PreconditionError);
}

TEST_CASE("sample_jumps event counts are Poisson(lambda T)", "[market_model][jumps]") {
    MarketParams p;
    p.lambda_plus = 0.05;
    p.lambda_minus = 0.0;
    const int runs = 1000;
    double total = 0;
    Rng rng = make_rng(7);
    for (int i = 0; i < runs; ++i) total += static_cast<double>(sample_jumps(p, 2000.0, rng).size());
    const double mean = total / runs;
    // Poisson(100): standard error of the mean over 1000 runs is sqrt(100/1000).
    CHECK(std::abs(mean - 100.0) < 3.0 * std::sqrt(100.0 / runs));
}

TEST_CASE("sample_jumps interarrival times are exponential per side", "[market_model][jumps]") {
    MarketParams p;
    p.lambda_plus = 0.05;
    p.lambda_minus = 0.2;
    Rng rng = make_rng(11);
    const auto events = sample_jumps(p, 2e5, rng);

    for (std::size_t i = 1; i < events.size(); ++i) REQUIRE(events[i - 1].time <= events[i].time);

    for (auto [side, lambda] : {std::pair{Side::Long, 0.05}, std::pair{Side::Short, 0.2}}) {
        double last = 0, sum = 0, sum_sq = 0;
        std::size_t n = 0;
        for (const auto& e : events) {
            if (e.side != side) continue;
            const double gap = e.time - last;
            REQUIRE(gap > 0);
            sum += gap;
            sum_sq += gap * gap;
            last = e.time;
            ++n;
        }
        const double mean = sum / static_cast<double>(n);
        // Exponential: mean 1/lambda, std 1/lambda; second moment 2/lambda^2.
        CHECK(std::abs(mean - 1.0 / lambda) < 4.0 * (1.0 / lambda) / std::sqrt(static_cast<double>(n)));
        CHECK(sum_sq / static_cast<double>(n) * lambda * lambda == Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("liquidation sizes follow the truncated Gaussian", "[market_model][jumps]") {
    Rng rng = make_rng(3);
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += draw_size(10.0, 0.5, rng);
    CHECK(std::abs(sum / n - 10.0) < 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));

    // A heavy lower tail is redrawn, never returned.
    for (int i = 0; i < 10000; ++i) REQUIRE(draw_size(0.1, 1.0, rng) > 0);
    CHECK(draw_size(4.0, 0.0, rng) == 4.0);
}

TEST_CASE("execution_price", "[market_model]") {
    CHECK(execution_price(10, 0, 1e-3) == 10.0);
    CHECK(execution_price(10, 2, 1e-3) == Approx(9.998).epsilon(1e-15));
    CHECK(execution_price(10, -2, 1e-3) == Approx(10.002).epsilon(1e-15));
}

TEST_CASE("step: hand-computed Euler update", "[market_model][step]") {
    MarketParams p = quiet_params();
    p.b = 1e-5;
    p.k = 1e-3;
    const MarketState s{0.0, 10.0, 5.0, 0.0};
    const MarketState next = step(s, 2.0, 0.1, 0.0, {}, p, CashMode::Simplified);
    CHECK(next.S == Approx(9.999998).epsilon(1e-14));
    CHECK(next.Q == Approx(4.8).epsilon(1e-14));
    CHECK(next.X == Approx(1.9996).epsilon(1e-14));
    CHECK(next.t == Approx(0.1));
}

TEST_CASE("step: no drivers leaves the state unchanged except t", "[market_model][step]") {
    const MarketParams p = quiet_params();
    const MarketState s{3.0, 11.0, -4.0, 2.5};
    const MarketState next = step(s, 0.0, 0.1, 0.0, {}, p, CashMode::Full);
    CHECK(next.S == s.S);
    CHECK(next.Q == s.Q);
    CHECK(next.X == s.X);
    CHECK(next.t == Approx(3.1));
}

TEST_CASE("step: liquidation cash inflow", "[market_model][step]") {
    MarketParams p = quiet_params();
    p.r = 0.05;
    p.s0 = 10;
    const std::vector<JumpEvent> jumps = {{0.05, Side::Long, 10.0}};
    const MarketState s{0.0, 10.0, 2.0, 1.0};

    SECTION("simplified mode marks at S0") {
        const MarketState next = step(s, 0.0, 0.1, 0.0, jumps, p, CashMode::Simplified);
        CHECK(next.Q == Approx(12.0));
        CHECK(next.X == Approx(6.0));
    }
    SECTION("full mode marks at the post-diffusion midprice") {
        p.sigma = 0.5;
        const MarketState moved{0.0, 12.0, 2.0, 1.0};
        const MarketState next = step(moved, 0.0, 0.1, 0.2, jumps, p, CashMode::Full);
        CHECK(next.S == Approx(12.1));
        CHECK(next.X == Approx(1.0 + 0.05 * 10.0 * 12.1));
    }
    SECTION("short liquidations reduce inventory and still pay margin") {
        const std::vector<JumpEvent> shorts = {{0.05, Side::Short, 4.0}};
        const MarketState next = step(s, 0.0, 0.1, 0.0, shorts, p, CashMode::Simplified);
        CHECK(next.Q == Approx(-2.0));
        CHECK(next.X == Approx(1.0 + 0.05 * 4.0 * 10.0));
    }
}

TEST_CASE("step rejects dt <= 0", "[market_model][step]") {
    const MarketParams p;
    CHECK_THROWS_AS(step({}, 0.0, 0.0, 0.0, {}, p, CashMode::Full), PreconditionError);
    CHECK_THROWS_AS(step({}, 0.0, -1.0, 0.0, {}, p, CashMode::Full), PreconditionError);
}

TEST_CASE("deterministic dynamics match the Euler recursion for any rate sequence", "[market_model][property]") {
    MarketParams p = quiet_params();
    p.b = 3e-4;
    p.k = 2e-3;
    Rng gen = make_rng(99);
    std::uniform_real_distribution<double> rate(-50.0, 50.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double dt = 0.01 + 0.2 * std::uniform_real_distribution<double>(0, 1)(gen);
        MarketState s{0, 10, 7, 0};
        double S = 10, Q = 7, X = 0;
        for (int n = 0; n < 100; ++n) {
            const double nu = rate(gen);
            s = step(s, nu, dt, 0.0, {}, p, CashMode::Full);
            X += (S - p.k * nu) * nu * dt;
            S -= p.b * nu * dt;
            Q -= nu * dt;
        }
        REQUIRE(s.S == Approx(S).epsilon(1e-12));
        REQUIRE(s.Q == Approx(Q).margin(1e-9));
        REQUIRE(s.X == Approx(X).margin(1e-9));
    }
}

TEST_CASE("doubling the rate doubles permanent drift and quadruples impact cost", "[market_model][property]") {
    MarketParams p = quiet_params();
    p.b = 1e-4;
    p.k = 1e-3;
    const MarketState s{0, 10, 0, 0};
    const double dt = 0.1;
    for (double nu : {0.5, 3.0, -7.0, 40.0}) {
        const MarketState a = step(s, nu, dt, 0, {}, p, CashMode::Full);
        const MarketState b = step(s, 2 * nu, dt, 0, {}, p, CashMode::Full);
        CHECK((b.S - s.S) == Approx(2 * (a.S - s.S)).epsilon(1e-9));
        // impact loss = mid value of the sale minus cash received
        const double loss_a = s.S * nu * dt - a.X;
        const double loss_b = s.S * 2 * nu * dt - b.X;
        CHECK(loss_b == Approx(4 * loss_a).epsilon(1e-9));
    }
}

TEST_CASE("inventory bookkeeping: traded volume plus jumps explains Q", "[market_model][property]") {
    MarketParams p;
    p.lambda_plus = 0.5;
    p.lambda_minus = 0.3;
    Rng rng = make_rng(5);
    const double dt = 0.1;
    const int steps = 2000;
    const auto jumps = sample_jumps(p, steps * dt, rng);
    std::normal_distribution<double> z;
    MarketState s = initial_state(p);
    s.Q = 3.0;
    double traded = 0, signed_jumps = 0;
    std::size_t next = 0;
    for (int n = 0; n < steps; ++n) {
        const double t_end = (n + 1) * dt;
        const std::size_t first = next;
        while (next < jumps.size() && jumps[next].time <= t_end) ++next;
        std::span<const JumpEvent> in(jumps.data() + first, next - first);
        for (const auto& j : in) signed_jumps += j.side == Side::Long ? j.size : -j.size;
        const double nu = 0.3 * s.Q;
        traded += nu * dt;
        s = step(s, nu, dt, std::sqrt(dt) * z(rng), in, p, CashMode::Full);
    }
    REQUIRE(next == jumps.size());
    CHECK(s.Q - 3.0 + traded == Approx(signed_jumps).margin(1e-9));
}

TEST_CASE("full and simplified cash coincide when the midprice never moves", "[market_model][property]") {
    MarketParams p;
    p.sigma = 0;
    p.b = 0;
    Rng rng = make_rng(17);
    const auto jumps = sample_jumps(p, 500.0, rng);
    MarketState full = initial_state(p), simple = initial_state(p);
    std::size_t next = 0;
    for (int n = 0; n < 5000; ++n) {
        const std::size_t first = next;
        while (next < jumps.size() && jumps[next].time <= (n + 1) * 0.1) ++next;
        std::span<const JumpEvent> in(jumps.data() + first, next - first);
        full = step(full, 0.0, 0.1, 0.0, in, p, CashMode::Full);
        simple = step(simple, 0.0, 0.1, 0.0, in, p, CashMode::Simplified);
    }
    CHECK(!jumps.empty());
    CHECK(full.X == simple.X);
    CHECK(full.Q == simple.Q);
}

TEST_CASE("MarketParams validation names the failing field", "[market_model][validation]") {
    CHECK_NOTHROW(validate(MarketParams{}));
    auto field_of = [](MarketParams p) {
        try {
            validate(p);
        } catch (const InvalidParameter& e) {
            return e.field();
        }
        return std::string{};
    };
    MarketParams p;
    p.k = 0;
    CHECK(field_of(p) == "k");
    p = {};
    p.phi = -1;
    CHECK(field_of(p) == "phi");
    p = {};
    p.sigma = -0.1;
    CHECK(field_of(p) == "sigma");
    p = {};
    p.r = 1.5;
    CHECK(field_of(p) == "r");
    p = {};
    p.eta_mean = 0;
    CHECK(field_of(p) == "eta_mean");
    p = {};
    p.s0 = 0;
    CHECK(field_of(p) == "s0");
    p = {};
    p.lambda_minus = -1;
    CHECK(field_of(p) == "lambda_minus");
    p = {};
    p.b = std::nan("");
    CHECK(field_of(p) == "b");
}

TEST_CASE("symmetric accessor rejects asymmetric intensities", "[market_model]") {
    MarketParams p;
    CHECK(p.lambda() == 0.05);
    p.lambda_minus = 0.04;
    CHECK_FALSE(p.symmetric());
    CHECK_THROWS_AS(p.lambda(), PreconditionError);
}
