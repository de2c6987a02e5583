#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "veq/quadrature.hpp"
#include "veq/scaled.hpp"

using namespace veq;
using Catch::Approx;

TEST_CASE("adaptive panels on smooth integrands") {
    auto g = [](double x) { return std::exp(-x * x); };
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    const double v = integrate_adaptive<double>(g, -8.0, 8.0, opt);
    REQUIRE(v == Approx(std::sqrt(M_PI)).epsilon(1e-12));

    auto h = [](double x) { return std::cos(40.0 * x); };
    const double w = integrate_adaptive<double>(h, 0.0, 1.0, opt);
    REQUIRE(w == Approx(std::sin(40.0) / 40.0).margin(1e-11));
}

TEST_CASE("complex-valued integrand") {
    auto f = [](double t) { return std::exp(std::complex<double>(0.0, 3.0 * t)); };
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    const auto v = integrate_adaptive<std::complex<double>>(f, 0.0, 2.0, opt);
    const std::complex<double> expect =
        (std::exp(std::complex<double>(0.0, 6.0)) - 1.0) / std::complex<double>(0.0, 3.0);
    REQUIRE(std::abs(v - expect) < 1e-12);
}

TEST_CASE("tail map handles algebraic decay") {
    // int_1^inf y^{-5/3} dy = 3/2
    auto f = [](double y) { return std::pow(y, -5.0 / 3.0); };
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    const double v = integrate_to_infinity<double>(f, 1.0, 2.0, opt);
    REQUIRE(v == Approx(1.5).epsilon(1e-11));
}

TEST_CASE("budget exhaustion raises") {
    auto f = [](double x) { return std::cos(4000.0 * x); };
    QuadOptions opt;
    opt.rel_tol = 1e-14;
    opt.max_panels = 10;
    REQUIRE_THROWS_AS(integrate_adaptive<double>(f, 0.0, 1.0, opt), QuadratureError);
}

TEST_CASE("scaled complex arithmetic") {
    ScaledComplex a{{2.0, 0.0}, 1000.0};
    ScaledComplex b{{1.0, 0.0}, 998.0};
    const ScaledComplex s = a + b;
    // 2 e^1000 + e^998 = e^1000 (2 + e^-2)
    REQUIRE(s.log_abs() == Approx(1000.0 + std::log(2.0 + std::exp(-2.0))).epsilon(1e-14));
    const ScaledComplex d = a - a;
    REQUIRE(d.is_zero());
    REQUIRE(std::abs(a.ratio(b) - 2.0 * std::exp(2.0)) < 1e-12);
}
