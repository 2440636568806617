#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdstab/quadrature.hpp"

using Catch::Approx;
using namespace sdstab;

TEST_CASE("smooth integrands", "[quadrature]") {
    CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::acos(-1.0)) ==
          Approx(2.0).margin(1e-12));
    CHECK(integrate_adaptive([](double x) { return x * x; }, -1.0, 2.0) == Approx(3.0).margin(1e-12));
}

TEST_CASE("oscillatory integrand matches the antiderivative", "[quadrature]") {
    // t cos(t^2) integrates to sin(t^2)/2; a fixed-step rule would need a
    // prohibitive resolution near t = 20.
    const double exact = 0.5 * (std::sin(400.0) - 0.0);
    const double got = integrate_adaptive([](double t) { return t * std::cos(t * t); }, 0.0, 20.0);
    CHECK(got == Approx(exact).margin(1e-9));
}

TEST_CASE("step discontinuity converges by bisection", "[quadrature]") {
    auto f = [](double x) { return x < 0.3 ? 1.0 : 5.0; };
    CHECK(integrate_adaptive(f, 0.0, 1.0) == Approx(0.3 + 5.0 * 0.7).margin(1e-9));
}

TEST_CASE("split hints seed the subdivision", "[quadrature]") {
    auto f = [](double x) { return x < 0.5 ? -1.0 : 2.0; };
    std::vector<double> hints{0.5};
    CHECK(integrate_adaptive(f, 0.0, 1.0, {}, &hints) == Approx(0.5).margin(1e-12));
}

TEST_CASE("interval budget exhaustion reports achieved tolerance", "[quadrature]") {
    QuadratureOptions opts;
    opts.abs_tol = 1e-14;
    opts.max_intervals = 4;
    bool threw = false;
    try {
        integrate_adaptive([](double t) { return t * std::cos(t * t); }, 0.0, 30.0, opts);
    } catch (const QuadratureError& e) {
        threw = true;
        CHECK(e.achieved_tolerance() > opts.abs_tol);
    }
    CHECK(threw);
}
