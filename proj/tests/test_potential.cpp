#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "degenlab/potential.hpp"
#include "test_helpers.hpp"

using namespace degenlab;
using Eigen::VectorXd;

namespace {
constexpr double kPi = 3.14159265358979323846;

double simpson01(const std::function<double(double)>& f, int n = 20000) {
    if (n % 2 != 0) ++n;
    const double h = 1.0 / n;
    double s = f(0.0) + f(1.0);
    for (int i = 1; i < n; i += 2) s += 4.0 * f(i * h);
    for (int i = 2; i < n; i += 2) s += 2.0 * f(i * h);
    return s * h / 3.0;
}
} // namespace

TEST_CASE("scalar shape library", "[potential]") {
    for (const char* name : {"zero", "abs", "quadratic", "sqrt1p", "soft-well"}) {
        auto s = pot::scalar_shape(name);
        REQUIRE(s.lower_bound.has_value());
        CHECK(s.convex);
        for (double t : {-2.0, -0.5, 0.3, 1.7}) CHECK(s.value(t) >= *s.lower_bound - 1e-15);
        if (s.derivative_sup)
            for (double t : {-5.0, -1.0, 0.0, 2.0, 8.0})
                CHECK(std::abs(s.derivative(t)) <= *s.derivative_sup + 1e-15);
    }
    CHECK_THROWS_AS(pot::scalar_shape("nonsense"), invalid_argument);

    // derivative consistency on the smooth shapes
    for (const char* name : {"quadratic", "sqrt1p", "soft-well"}) {
        auto s = pot::scalar_shape(name);
        for (double t : {-1.3, 0.2, 2.4}) {
            const double h = 1e-6;
            CHECK(s.derivative(t) ==
                  Catch::Approx((s.value(t + h) - s.value(t - h)) / (2 * h)).margin(1e-7));
            CHECK(s.second_derivative(t) ==
                  Catch::Approx((s.derivative(t + h) - s.derivative(t - h)) / (2 * h))
                      .margin(1e-7));
        }
    }
}

TEST_CASE("composite potential closed forms", "[potential]") {
    auto spec = gauss::dirichlet_spectrum(4);

    SECTION("zero shape gives the zero potential") {
        auto p = pot::composite_potential(pot::scalar_shape("zero"), spec, 3);
        VectorXd x(3);
        x << 0.4, -1.0, 0.2;
        CHECK(p.value(x) == 0.0);
        CHECK(p.gradient(x).norm() == 0.0);
    }

    SECTION("phi(t) = t^2 gives the squared norm by sine orthonormality") {
        pot::ScalarShape sq;
        sq.name = "square";
        sq.value = [](double t) { return t * t; };
        sq.derivative = [](double t) { return 2.0 * t; };
        sq.second_derivative = [](double) { return 2.0; };
        sq.lower_bound = 0.0;
        sq.convex = true;
        auto p = pot::composite_potential(sq, spec, 3, 64);
        std::mt19937_64 rng(2);
        for (int rep = 0; rep < 5; ++rep) {
            VectorXd x = testhelp::random_vector(rng, 3);
            CHECK(p.value(x) == Catch::Approx(x.squaredNorm()).margin(1e-12));
            // independent route: fine Simpson integration of the composite integrand
            const double direct = simpson01([&](double s) {
                double u = 0.0;
                for (int k = 1; k <= 3; ++k)
                    u += x[k - 1] * std::sqrt(2.0) * std::sin(k * kPi * s);
                return u * u;
            });
            CHECK(p.value(x) == Catch::Approx(direct).margin(1e-9));
        }
    }

    SECTION("phi(t) = t at x = e1 integrates the first sine mode") {
        pot::ScalarShape lin;
        lin.name = "identity";
        lin.value = [](double t) { return t; };
        lin.derivative = [](double) { return 1.0; };
        lin.second_derivative = [](double) { return 0.0; };
        lin.lower_bound = -1e9; // not bounded below in truth; fine on the truncated range
        lin.convex = true;
        auto p = pot::composite_potential(lin, spec, 2, 64);
        VectorXd e1 = VectorXd::Unit(2, 0);
        CHECK(p.value(e1) == Catch::Approx(2.0 * std::sqrt(2.0) / kPi).epsilon(1e-12));
    }

    SECTION("gradient matches finite differences of the value") {
        auto p = pot::composite_potential(pot::scalar_shape("sqrt1p"), spec, 3, 64);
        std::mt19937_64 rng(4);
        for (int rep = 0; rep < 5; ++rep) {
            VectorXd x = testhelp::random_vector(rng, 3);
            VectorXd fd = testhelp::fd_gradient(p.value, x);
            CHECK((p.gradient(x) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
        }
    }

    SECTION("hessian matches finite differences of the gradient") {
        auto p = pot::composite_potential(pot::scalar_shape("soft-well"), spec, 2, 64);
        std::mt19937_64 rng(6);
        VectorXd x = testhelp::random_vector(rng, 2);
        auto jac = testhelp::fd_jacobian(p.gradient, x);
        CHECK((p.hessian(x) - jac).norm() <= 1e-5 * std::max(1.0, jac.norm()));
    }

    SECTION("preconditions") {
        auto flat = gauss::CovSpectrum({1.0, 1.0}, "flat", gauss::SpaceTag::U);
        CHECK_THROWS_AS(pot::composite_potential(pot::scalar_shape("abs"), flat, 2),
                        precondition_error);
        pot::ScalarShape nolb = pot::scalar_shape("abs");
        nolb.lower_bound.reset();
        CHECK_THROWS_AS(pot::composite_potential(nolb, spec, 2), precondition_error);
    }
}

TEST_CASE("lower bound and convexity metadata hold on samples", "[potential]") {
    auto spec = gauss::dirichlet_spectrum(3);
    auto p = pot::composite_potential(pot::scalar_shape("sqrt1p"), spec, 3, 64);
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        VectorXd a = testhelp::random_vector(rng, 3), b = testhelp::random_vector(rng, 3);
        CHECK(p.value(a) >= *p.lower_bound - 1e-12);
        // midpoint convexity
        CHECK(p.value(0.5 * (a + b)) <= 0.5 * p.value(a) + 0.5 * p.value(b) + 1e-12);
        // gradient bound
        CHECK(p.gradient(a).norm() <= *p.grad_sup_norm + 1e-12);
    }
}

TEST_CASE("smallness scaling", "[potential]") {
    auto spec = gauss::dirichlet_spectrum(2);
    auto base = pot::composite_potential(pot::scalar_shape("sqrt1p"), spec, 2, 64);
    REQUIRE(base.grad_sup_norm == 1.0);

    SECTION("delta = 2 gives gradient bound pi/4 exactly") {
        auto scaled = pot::scale_for_smallness(base, 2.0);
        CHECK(*scaled.grad_sup_norm == kPi / 4.0);
        auto rep = pot::check_smallness(scaled, 1.0 / (kPi * kPi));
        CHECK(rep.bound == Catch::Approx(kPi * kPi / 4.0).epsilon(1e-15));
        CHECK(rep.pass);
    }

    SECTION("delta = 1 on a unit-derivative shape gives factor pi/3") {
        auto scaled = pot::scale_for_smallness(base, 1.0);
        CHECK(*scaled.grad_sup_norm == Catch::Approx(kPi / 3.0).epsilon(1e-15));
        VectorXd x(2);
        x << 0.3, -0.7;
        CHECK(scaled.value(x) == Catch::Approx(kPi / 3.0 * base.value(x)).epsilon(1e-14));
    }

    SECTION("bound vanishes as delta grows") {
        auto s1 = pot::scale_for_smallness(base, 1e3);
        auto s2 = pot::scale_for_smallness(base, 1e6);
        CHECK(*s2.grad_sup_norm < *s1.grad_sup_norm);
        CHECK(*s2.grad_sup_norm < 1e-5);
    }

    SECTION("missing gradient bound is rejected") {
        auto q = pot::quadratic_potential(2); // unbounded derivative
        CHECK_FALSE(q.grad_sup_norm.has_value());
        CHECK_THROWS_AS(pot::scale_for_smallness(q, 2.0), precondition_error);
    }
}
