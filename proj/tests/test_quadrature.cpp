#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "degenlab/expectation.hpp"
#include "degenlab/gaussian.hpp"
#include "degenlab/polynomial.hpp"
#include "degenlab/quadrature.hpp"
#include "test_helpers.hpp"

using namespace degenlab;
using Eigen::VectorXd;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("gauss-hermite weights sum to one and integrate monomials", "[quadrature]") {
    for (std::size_t p : {1u, 2u, 5u, 12u, 20u, 40u}) {
        auto r = gauss::gauss_hermite(p);
        double wsum = 0.0;
        for (double w : r.weights) wsum += w;
        CHECK(std::abs(wsum - 1.0) <= 1e-12);

        // exact for z^k against N(0,1) up to k = 2p-1; roundoff scales with the
        // absolute-value sum, which dwarfs the (zero) odd moments at high degree
        for (int k = 0; k <= static_cast<int>(2 * p - 1); ++k) {
            double s = 0.0, scale = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                s += r.weights[j] * std::pow(r.nodes[j], k);
                scale += r.weights[j] * std::pow(std::abs(r.nodes[j]), k);
            }
            const double exact = testhelp::gaussian_monomial_moment({k}, VectorXd::Ones(1));
            CHECK(std::abs(s - exact) <= 1e-13 * (k + 1.0) * std::max(1.0, scale));
        }
    }
}

TEST_CASE("gauss-legendre on [0,1]", "[quadrature]") {
    auto r = gauss::gauss_legendre01(16);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(std::abs(wsum - 1.0) <= 1e-13);
    // int_0^1 s^k ds = 1/(k+1)
    for (int k = 0; k <= 31; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < r.nodes.size(); ++j)
            s += r.weights[j] * std::pow(r.nodes[j], k);
        CHECK(std::abs(s - 1.0 / (k + 1.0)) <= 1e-13);
    }
    // smooth non-polynomial: int_0^1 sqrt(2) sin(pi s) ds = 2 sqrt(2)/pi
    double s = 0.0;
    for (std::size_t j = 0; j < r.nodes.size(); ++j)
        s += r.weights[j] * std::sqrt(2.0) * std::sin(kPi * r.nodes[j]);
    CHECK(s == Catch::Approx(2.0 * std::sqrt(2.0) / kPi).epsilon(1e-12));
}

TEST_CASE("tensor rule integrates 1 and matches closed-form moments", "[quadrature]") {
    auto g = gauss::project_measure(gauss::dirichlet_spectrum(3), 3);
    auto rule = gauss::quadrature(g, 6);
    CHECK(std::abs(rule.integrate([](const VectorXd&) { return 1.0; }) - 1.0) <= 1e-14);

    CHECK(std::abs(rule.integrate([](const VectorXd& x) { return x[0] * x[0]; }) -
                   1.0 / (kPi * kPi)) <= 1e-12);

    const double l1 = g.variance(0);
    CHECK(std::abs(rule.integrate([](const VectorXd& x) { return std::pow(x[0], 4); }) -
                   3.0 * l1 * l1) <= 1e-12);

    // cross moments against the Isserlis pairing formula
    VectorXd a(3), b(3);
    a << 0.3, -1.2, 0.7;
    b << 1.1, 0.4, -0.2;
    const double m4 = gauss::moment4(a, a, b, b, g);
    const double q4 = rule.integrate([&](const VectorXd& x) {
        const double s = a.dot(x), t = b.dot(x);
        return s * s * t * t;
    });
    CHECK(std::abs(q4 - m4) <= 1e-12);
}

TEST_CASE("tensor rule exactness over every monomial within degree", "[quadrature]") {
    auto g = gauss::project_measure(gauss::dirichlet_spectrum(2), 2);
    const std::size_t p = 5; // exact through per-axis degree 9
    auto rule = gauss::quadrature(g, p);
    REQUIRE(rule.exact_degree() == 9);
    for (int i = 0; i <= rule.exact_degree(); ++i) {
        for (int j = 0; j <= rule.exact_degree(); ++j) {
            const double q = rule.integrate(
                [&](const VectorXd& x) { return std::pow(x[0], i) * std::pow(x[1], j); });
            const double exact = testhelp::gaussian_monomial_moment({i, j}, g.variances());
            CHECK(std::abs(q - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
        }
    }
}

TEST_CASE("grid budget enforced", "[quadrature]") {
    auto g = gauss::project_measure(gauss::dirichlet_spectrum(3), 3);
    CHECK_THROWS_AS(gauss::quadrature(g, 300), resource_limit_error); // 2.7e7 nodes
    CHECK_THROWS_AS(gauss::quadrature(g, 30, 1000), resource_limit_error);
}

TEST_CASE("weighted expectation basics", "[gauss][expectation]") {
    auto g = gauss::project_measure(gauss::dirichlet_spectrum(1), 1);
    const double l1 = g.variance(0);
    auto x1sq = [](const VectorXd& x) { return x[0] * x[0]; };

    gauss::ExpectationOptions opt;
    opt.points_per_axis = 8;

    SECTION("self-normalization: f = 1 integrates to 1 under any potential") {
        auto p = pot::quadratic_potential(1);
        auto est = gauss::weighted_expectation([](const VectorXd&) { return 1.0; }, g, &p, opt);
        CHECK(est.value == Catch::Approx(1.0).margin(1e-14));
    }

    SECTION("zero potential reproduces the plain second moment") {
        auto est = gauss::weighted_expectation(x1sq, g, nullptr, opt);
        CHECK(est.value == Catch::Approx(l1).margin(1e-13));
    }

    SECTION("quadratic potential has the complete-the-square closed form") {
        auto p = pot::quadratic_potential(1);
        auto est = gauss::weighted_expectation(x1sq, g, &p, opt);
        CHECK(est.value == Catch::Approx(l1 / (1.0 + l1)).margin(1e-12));
    }

    SECTION("explicit zero potential is bit-identical to the unweighted path") {
        auto zp = pot::zero_potential(1);
        for (auto method : {gauss::Method::quadrature, gauss::Method::mc}) {
            gauss::ExpectationOptions o;
            o.method = method;
            o.mc_samples = 20'000;
            o.seed = 3;
            auto a = gauss::weighted_expectation(x1sq, g, nullptr, o);
            auto b = gauss::weighted_expectation(x1sq, g, &zp, o);
            CHECK(a.value == b.value);
            CHECK(a.error == b.error);
        }
    }

    SECTION("potential without lower bound is rejected") {
        pot::Potential p = pot::quadratic_potential(1);
        p.lower_bound.reset();
        CHECK_THROWS_AS(gauss::weighted_expectation(x1sq, g, &p, opt), precondition_error);
    }

    SECTION("mc path agrees with quadrature within 3 se") {
        auto p = pot::quadratic_potential(1);
        gauss::ExpectationOptions mc;
        mc.method = gauss::Method::mc;
        mc.mc_samples = 400'000;
        mc.seed = 17;
        auto ref = gauss::weighted_expectation(x1sq, g, &p, opt);
        auto est = gauss::weighted_expectation(x1sq, g, &p, mc);
        CHECK(std::abs(est.value - ref.value) <= 3.0 * est.error);
    }
}
