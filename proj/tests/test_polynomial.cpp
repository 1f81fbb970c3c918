#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "degenlab/gaussian.hpp"
#include "degenlab/polynomial.hpp"
#include "test_helpers.hpp"

using namespace degenlab;
using Eigen::VectorXd;

TEST_CASE("polynomial arithmetic and evaluation", "[polynomial]") {
    auto x = Polynomial::coordinate(2, 0);
    auto y = Polynomial::coordinate(2, 1);
    auto p = x * x + 2.0 * (x * y) - Polynomial::constant(2, 3.0);
    VectorXd v(2);
    v << 1.5, -0.5;
    CHECK(p(v) == Catch::Approx(1.5 * 1.5 + 2.0 * 1.5 * -0.5 - 3.0));
    CHECK(p.total_degree() == 2);
    CHECK(p.max_axis_degree() == 2);

    auto q = p - p;
    CHECK(q.is_zero());
}

TEST_CASE("polynomial derivative matches finite differences", "[polynomial]") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        auto p = testhelp::random_polynomial(rng, 3, 4);
        VectorXd x = testhelp::random_vector(rng, 3);
        auto grads = p.gradient();
        VectorXd exact(3);
        for (int i = 0; i < 3; ++i) exact[i] = grads[static_cast<std::size_t>(i)](x);
        VectorXd fd = testhelp::fd_gradient([&](const VectorXd& z) { return p(z); }, x);
        CHECK((exact - fd).norm() <= 1e-6 * std::max(1.0, exact.norm()));
    }
}

TEST_CASE("quadrature reproduces exact polynomial moments", "[polynomial][quadrature]") {
    auto g = gauss::project_measure(gauss::dirichlet_spectrum(2), 2);
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        auto p = testhelp::random_polynomial(rng, 2, 6);
        auto rule = gauss::quadrature(g, 8);
        const double q = rule.integrate([&](const VectorXd& x) { return p(x); });
        const double exact = testhelp::gaussian_poly_integral(p, g.variances());
        CHECK(std::abs(q - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
    }
}
