#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdstab/certify.hpp"
#include "sdstab/experiments.hpp"

using Catch::Approx;
using namespace sdstab;

namespace {

const double kPi = std::acos(-1.0);

// Exact expectation data obeying d/dt EV = mu EV on a uniform grid.
MomentEstimate analytic_curve(const ScalarSignal& mu, double t1, double h) {
    MomentEstimate est;
    est.p = 2.0;
    est.n_total = est.n_valid = 1000;
    double value = 1.0;
    double prev = 0.0;
    est.times.push_back(0.0);
    est.mean.push_back(value);
    est.ci_half.push_back(0.0);
    for (double t = h; t <= t1 + 0.5 * h; t += h) {
        value *= std::exp(integrate(mu, prev, t));
        prev = t;
        est.times.push_back(t);
        est.mean.push_back(value);
        est.ci_half.push_back(0.0);
    }
    return est;
}

ScalarSignal shifted_on_high_segments(const ScalarSignal& mu, double c, double shift) {
    return ScalarSignal::affine_sum(
        {{1.0, mu}, {-shift, ScalarSignal::square_wave(0.0, 1.0, c, 1.0)}});
}

}  // namespace

TEST_CASE("quadratic generator values for the square-wave example", "[certify]") {
    Example1Params params{0.9, 2.0};
    CHECK(example1_lv_bound(params, 0.5, 1.0, 0.0) == -1.0);
    // High segment: b = 2, x = 1, y = 1 -> -1 + 2 = 1 (indefinite sign).
    CHECK(example1_lv_bound(params, 0.95, 1.0, 1.0) == Approx(1.0));

    auto mu = example1_rate_signal(1.2, 0.9, 2.0);
    CHECK(mu.eval(0.95) == Approx(1.4));   // -1 + 1.2 * 2
    CHECK(mu.eval(0.5) == Approx(-1.0));

    // The exact quadratic generator never exceeds the printed envelope.
    auto model = make_example1_model(0.9, 2.0, 0.5);
    LyapunovSpec spec({1.0, 1.0});
    StateVec f(1);
    std::vector<double> g(1);
    for (double t : {0.3, 0.92, 4.4}) {
        for (double x : {-1.0, 0.2, 2.0}) {
            for (double y : {-0.5, 0.0, 1.5}) {
                for (int regime : {0, 1}) {
                    StateVec xs{x}, ys{y};
                    model.drift(t, xs, ys, regime, 0.0, f);
                    model.diffusion(t, xs, ys, regime, 0.0, g);
                    const double lv = lv_quadratic_scalar(x, f[0], g[0], regime, spec, model.generator);
                    CHECK(lv <= example1_lv_bound(Example1Params{0.9, 2.0}, t, x, y) + 1e-10);
                }
            }
        }
    }
}

TEST_CASE("regime coupling term of the quadratic generator", "[certify]") {
    // V = (x^2, x^2/2) under generator [[-1,1],[1,-1]]: coupling is
    // -x^2/2 in regime 0 and +x^2/2 in regime 1.
    LyapunovSpec spec({1.0, 0.5});
    std::vector<std::vector<double>> gamma{{-1.0, 1.0}, {1.0, -1.0}};
    const double x = 2.0;
    CHECK(lv_quadratic_scalar(x, 0.0, 0.0, 0, spec, gamma) == Approx(-0.5 * x * x));
    CHECK(lv_quadratic_scalar(x, 0.0, 0.0, 1, spec, gamma) == Approx(0.5 * x * x));
}

TEST_CASE("history monitor is sound on exact data and flags a wrong rate", "[certify]") {
    auto mu = example1_rate_signal(1.2, 0.9, 2.0);
    auto est = analytic_curve(mu, 10.0, 1e-3);
    LyapunovSpec spec({1.0, 1.0});

    MonitorOptions opts;
    opts.tau = 0.2;
    opts.q = 2.0;  // premise active everywhere on this data
    opts.stencil = 250;
    opts.base_tol = 1e-9;

    auto clean = razumikhin_monitor(est, spec, mu, opts);
    CHECK(clean.premise_count > 5000);
    CHECK(clean.violation_count == 0);
    CHECK(clean.verdict == "consistent-with");

    auto wrong = razumikhin_monitor(est, spec, shifted_on_high_segments(mu, 0.9, 0.5), opts);
    CHECK(wrong.premise_count == clean.premise_count);
    CHECK(wrong.violation_fraction > 0.5);
    CHECK(wrong.verdict == "refuted");
}

TEST_CASE("history monitor premise gates the conclusion", "[certify]") {
    // Fast decay makes the lag comparison fail for small q: no premise, no
    // violations, vacuous consistency.
    auto mu = ScalarSignal::constant(-3.0);
    auto est = analytic_curve(mu, 5.0, 1e-3);
    LyapunovSpec spec({1.0, 1.0});
    MonitorOptions opts;
    opts.tau = 1.0;
    opts.q = 1.05;  // exp(3) lag ratio >> q
    opts.stencil = 100;
    auto rep = razumikhin_monitor(est, spec, mu, opts);
    CHECK(rep.premise_count == 0);
    CHECK(rep.violation_count == 0);
    CHECK(rep.verdict == "consistent-with");
}

TEST_CASE("functional monitor with zero weight matches the memoryless one", "[certify]") {
    auto mu = example1_rate_signal(1.2, 0.9, 2.0);
    auto est = analytic_curve(mu, 6.0, 1e-3);
    MonitorOptions opts;
    opts.tau = 0.2;
    opts.q = 10.0;
    opts.stencil = 250;

    KrasovskiiFunctional functional;
    functional.c0 = 1.0;
    functional.tau = 0.2;
    auto k_rep = krasovskii_monitor(est, functional, mu, opts);
    CHECK(k_rep.violation_count == 0);
    CHECK(k_rep.premise_count == k_rep.times.size());

    auto wrong = krasovskii_monitor(est, functional, shifted_on_high_segments(mu, 0.9, 0.5), opts);
    CHECK(wrong.violation_fraction > 0.5);
}

TEST_CASE("k condition: Wallis ratio scan", "[certify]") {
    // Ratio values 1/2, 3/8, 15/48 for k = 1, 2, 3.
    double ratio = 1.0;
    std::vector<double> expect{0.5, 0.375, 0.3125};
    for (int k = 1; k <= 3; ++k) {
        ratio *= (2.0 * k - 1.0) / (2.0 * k);
        CHECK(ratio == Approx(expect[static_cast<std::size_t>(k - 1)]));
    }

    // lambda = 1, l = 0.1: RHS = (2 pi - 1)/(0.2 e^{2 pi}); brute-force scan.
    const double rhs = (2.0 * kPi - 1.0) / (0.2 * std::exp(2.0 * kPi));
    CHECK(rhs == Approx(0.0493).margin(5e-4));
    long expected_k = 0;
    double r = 1.0;
    for (long k = 1; k <= 100000; ++k) {
        r *= (2.0 * k - 1.0) / (2.0 * k);
        if (r < rhs) {
            expected_k = k;
            break;
        }
    }
    auto got = example2_k_condition(1.0, 0.1);
    REQUIRE(got.has_value());
    CHECK(*got == expected_k);

    // Tiny l: unbounded right side, k = 1 suffices.
    CHECK(example2_k_condition(1.0, 1e-12).value() == 1);
    // Huge l: no admissible k within the cap.
    CHECK_FALSE(example2_k_condition(1.0, 1e25, 100000).has_value());
}

TEST_CASE("k condition is monotone in the noise level", "[certify]") {
    long prev = 0;
    for (double l : {0.5, 0.2, 0.1, 0.05}) {
        auto k = example2_k_condition(1.0, l);
        REQUIRE(k.has_value());
        if (prev != 0) CHECK(*k <= prev);
        prev = *k;
    }
}

TEST_CASE("prior-work diagnostics", "[certify]") {
    auto diag_neg = restrictive_diagnostics(ScalarSignal::constant(-1.0), 1.2, 0.5,
                                            {10.0, 20.0, 30.0});
    for (double m : diag_neg.positive_mass) CHECK(m == 0.0);
    CHECK(diag_neg.finite_mass_plausible);

    // Positive mass of the certified square-wave rate grows linearly:
    // 0.14 per period.
    auto mu1 = example1_rate_signal(1.2, 0.9, 2.0);
    auto diag1 = restrictive_diagnostics(mu1, 1.2, 0.5, {10.0, 20.0, 40.0});
    CHECK(diag1.positive_mass[0] == Approx(1.4).margin(1e-9));
    CHECK(diag1.positive_mass[1] == Approx(2.8).margin(1e-9));
    CHECK(diag1.positive_mass[2] == Approx(5.6).margin(1e-9));
    CHECK_FALSE(diag1.finite_mass_plausible);
    // Floor: min mu = -1 vs -ln(1.2)/0.5 = -0.365: the floor fails.
    CHECK(diag1.mu_min_scanned == Approx(-1.0));
    CHECK(diag1.floor_threshold == Approx(-std::log(1.2) / 0.5));
    CHECK_FALSE(diag1.floor_satisfied);

    CHECK_THROWS_AS(restrictive_diagnostics(mu1, 1.2, 0.5, {20.0, 10.0}), std::invalid_argument);
}

TEST_CASE("constant negative rate satisfies the floor for large q", "[certify]") {
    auto diag = restrictive_diagnostics(ScalarSignal::constant(-1.0), 3.0, 2.0, {10.0});
    // floor threshold -ln(3)/2 = -0.549: mu = -1 sits below it.
    CHECK_FALSE(diag.floor_satisfied);
    auto diag2 = restrictive_diagnostics(ScalarSignal::constant(-0.3), 3.0, 2.0, {10.0});
    CHECK(diag2.floor_satisfied);
}

TEST_CASE("admissible gain exists exactly below the amplitude threshold", "[certify]") {
    for (double c : {0.1, 0.35, 0.6, 0.9}) {
        const double thr = example1_threshold(c);
        CHECK(example1_admissible_q(c, thr * (1.0 - 1e-4)).has_value());
        CHECK_FALSE(example1_admissible_q(c, thr * (1.0 + 1e-4)).has_value());
    }

    // Found gains actually pass both printed inequalities.
    auto q = example1_admissible_q(0.9, 2.0);
    REQUIRE(q.has_value());
    const double one_period = -1.0 + *q * 0.1 * 2.0;
    CHECK(one_period < 0.0);
    CHECK(*q > std::exp(one_period + 0.9));
}
