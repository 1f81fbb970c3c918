#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "degenlab/assembly.hpp"
#include "degenlab/gaussian.hpp"
#include "test_helpers.hpp"

using namespace degenlab;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

spectral::OperatorMatrix literal_matrix(const MatrixXd& m) {
    spectral::HermiteBasis basis(VectorXd::Ones(1), static_cast<int>(m.rows()) - 1);
    REQUIRE(static_cast<Eigen::Index>(basis.size()) == m.rows());
    return {basis, ops::OperatorKind::OU0, m, MatrixXd::Identity(m.rows(), m.cols()), false, {}};
}

} // namespace

TEST_CASE("hermite basis enumeration and orthonormality", "[spectral]") {
    auto m = ops::dirichlet_identity_model(2);

    auto basis = spectral::position_basis(m, 4);
    CHECK(basis.size() == 15); // C(2+4,2)
    CHECK(basis.index_set()[0] == std::vector<int>{0, 0});

    // Gram matrix under exact quadrature equals the identity
    for (int degree : {3, 5}) {
        auto b = spectral::phase_basis(m, degree);
        auto g = gauss::ProjectedGaussian((Eigen::VectorXd(4) << m.q1, m.q2).finished());
        auto rule = gauss::quadrature(g, static_cast<std::size_t>(degree) + 2);
        MatrixXd gram = MatrixXd::Zero(static_cast<Eigen::Index>(b.size()),
                                       static_cast<Eigen::Index>(b.size()));
        for (std::size_t j = 0; j < rule.size(); ++j) {
            VectorXd vals(static_cast<Eigen::Index>(b.size()));
            for (std::size_t i = 0; i < b.size(); ++i)
                vals[static_cast<Eigen::Index>(i)] = b.value(i, rule.nodes()[j]);
            gram += rule.weights()[j] * vals * vals.transpose();
        }
        CHECK((gram - MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <=
              1e-10);
    }
}

TEST_CASE("ou assembly with diagonal coefficients is the eigenvalue matrix", "[spectral]") {
    auto m = ops::dirichlet_identity_model(2);
    auto basis = spectral::position_basis(m, 5);
    auto M = spectral::assemble(ops::OperatorKind::OU0, m, nullptr, basis);

    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = 0; j < basis.size(); ++j) {
            double expected = 0.0;
            if (i == j) {
                const auto& alpha = basis.index_set()[i];
                for (Eigen::Index a = 0; a < m.n; ++a)
                    expected -= alpha[static_cast<std::size_t>(a)] * m.c(a, a) / m.q1[a];
            }
            CHECK(std::abs(M.entries(static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(j)) -
                           expected) <= 1e-8 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("structure of the assembled kinetic parts", "[spectral]") {
    auto m = ops::dirichlet_identity_model(2);
    auto basis = spectral::phase_basis(m, 4);
    auto S = spectral::assemble(ops::OperatorKind::Dissipation, m, nullptr, basis);
    auto A = spectral::assemble(ops::OperatorKind::Transport, m, nullptr, basis);
    auto L = spectral::assemble(ops::OperatorKind::Langevin, m, nullptr, basis);

    CHECK((S.entries - S.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((A.entries + A.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((L.entries - (S.entries - A.entries)).cwiseAbs().maxCoeff() <= 1e-12);

    // S is negative semidefinite
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S.entries + S.entries.transpose()),
                                               Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().maxCoeff() <= 1e-10);

    // row of the constant basis function vanishes: the measure is invariant
    CHECK(L.entries.row(0).cwiseAbs().maxCoeff() <= 1e-10);
    // and so does the constant column: the operator kills constants
    CHECK(L.entries.col(0).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("dissipativity reports", "[spectral]") {
    SECTION("assembled kinetic operator, scalar model, degree 6") {
        auto m = ops::dirichlet_identity_model(1);
        auto basis = spectral::phase_basis(m, 6);
        auto L = spectral::assemble(ops::OperatorKind::Langevin, m, nullptr, basis);
        auto rep = spectral::check_dissipativity(L, 1e-9);
        CHECK(rep.max_sym_eigenvalue <= 1e-9);
        CHECK(rep.pass);
    }
    SECTION("zero matrix passes, identity fails") {
        auto zero = literal_matrix(MatrixXd::Zero(3, 3));
        auto rep0 = spectral::check_dissipativity(zero, 1e-12);
        CHECK(rep0.max_sym_eigenvalue == 0.0);
        CHECK(rep0.pass);

        auto ident = literal_matrix(MatrixXd::Identity(3, 3));
        auto rep1 = spectral::check_dissipativity(ident, 1e-9);
        CHECK(rep1.max_sym_eigenvalue == Catch::Approx(1.0));
        CHECK_FALSE(rep1.pass);
    }
    SECTION("model test matrix: N0, S, L all dissipative") {
        auto m = ops::dirichlet_identity_model(2);
        auto nb = spectral::position_basis(m, 5);
        auto pb = spectral::phase_basis(m, 4);
        auto M0 = spectral::assemble(ops::OperatorKind::OU0, m, nullptr, nb);
        CHECK(spectral::check_dissipativity(M0, 1e-9).pass);
        for (auto kind : {ops::OperatorKind::Dissipation, ops::OperatorKind::Langevin}) {
            auto M = spectral::assemble(kind, m, nullptr, pb);
            CHECK(spectral::check_dissipativity(M, 1e-9).pass);
        }
    }
}

TEST_CASE("weighted assembly keeps the structural properties", "[spectral]") {
    auto m = ops::dirichlet_identity_model(1);
    auto spec = gauss::dirichlet_spectrum(1);
    auto p = pot::scale_for_smallness(
        pot::composite_potential(pot::scalar_shape("sqrt1p"), spec, 1, 48), 2.0);
    auto basis = spectral::phase_basis(m, 4);

    auto A = spectral::assemble(ops::OperatorKind::Transport, m, &p, basis);
    CHECK(A.weighted);
    CHECK(A.assembly.two_level_error <= 1e-2); // conservative coarse-error estimate
    // antisymmetry holds in the weighted inner product as well
    CHECK((A.entries + A.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-6);

    auto L = spectral::assemble(ops::OperatorKind::Langevin, m, &p, basis);
    auto rep = spectral::check_dissipativity(L, 1e-6);
    CHECK(rep.pass);

    // invariance of the weighted measure: constant row vanishes
    CHECK(L.entries.row(0).cwiseAbs().maxCoeff() <= 1e-6);

    // weighted perturbed generator: dissipative under the generalized check
    auto nb = spectral::position_basis(m, 5);
    auto N = spectral::assemble(ops::OperatorKind::OU, m, &p, nb);
    CHECK(spectral::check_dissipativity(N, 1e-8).pass);
}

TEST_CASE("resolvent solve", "[spectral]") {
    auto m = ops::dirichlet_identity_model(2);
    auto basis = spectral::position_basis(m, 5);
    auto M = spectral::assemble(ops::OperatorKind::OU0, m, nullptr, basis);
    const auto nb = static_cast<Eigen::Index>(basis.size());
    std::mt19937_64 rng(3);

    SECTION("kernel vector: constants solve with f = g / alpha") {
        VectorXd g = VectorXd::Zero(nb);
        g[0] = 2.5;
        for (double alpha : {0.5, 1.0, 2.0}) {
            VectorXd f = spectral::resolvent_solve(M, alpha, g);
            CHECK((f - g / alpha).norm() <= 1e-10);
        }
    }

    SECTION("diagonal closed form") {
        const double alpha = 1.3;
        VectorXd g = testhelp::random_vector(rng, nb);
        VectorXd f = spectral::resolvent_solve(M, alpha, g);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const auto& a = basis.index_set()[i];
            double lam = 0.0;
            for (Eigen::Index k = 0; k < m.n; ++k)
                lam += a[static_cast<std::size_t>(k)] * m.c(k, k) / m.q1[k];
            CHECK(f[static_cast<Eigen::Index>(i)] ==
                  Catch::Approx(g[static_cast<Eigen::Index>(i)] / (alpha + lam)).margin(1e-10));
        }
    }

    SECTION("residual, contraction, and the large-alpha limit") {
        for (double alpha : {0.5, 1.0, 2.0}) {
            for (int rep = 0; rep < 20; ++rep) {
                VectorXd g = testhelp::random_vector(rng, nb);
                VectorXd f = spectral::resolvent_solve(M, alpha, g);
                CHECK(((alpha * MatrixXd::Identity(nb, nb) - M.entries) * f - g).norm() <=
                      1e-10 * g.norm());
                CHECK(f.norm() <= g.norm() / alpha * (1.0 + 1e-10));
            }
        }
        // alpha R(alpha) g -> g with the O(1/alpha) bound |R(alpha) M g| <= |M g| / alpha
        VectorXd g = testhelp::random_vector(rng, nb);
        const double mg = (M.entries * g).norm();
        const double e2 = (100.0 * spectral::resolvent_solve(M, 100.0, g) - g).norm();
        const double e4 = (10000.0 * spectral::resolvent_solve(M, 10000.0, g) - g).norm();
        CHECK(e2 <= mg / 100.0 * (1.0 + 1e-9));
        CHECK(e4 <= mg / 10000.0 * (1.0 + 1e-9));
        CHECK(e4 < e2);
    }

    SECTION("argument validation") {
        VectorXd g = VectorXd::Ones(nb);
        CHECK_THROWS_AS(spectral::resolvent_solve(M, 0.0, g), invalid_argument);
        CHECK_THROWS_AS(spectral::resolvent_solve(M, 1.0, VectorXd::Ones(2)), invalid_argument);
    }
}

TEST_CASE("semigroup apply", "[spectral]") {
    auto m = ops::dirichlet_identity_model(2);
    std::mt19937_64 rng(5);

    SECTION("t = 0 is the identity and negative t rejected") {
        auto basis = spectral::position_basis(m, 4);
        auto M = spectral::assemble(ops::OperatorKind::OU0, m, nullptr, basis);
        VectorXd f0 = testhelp::random_vector(rng, static_cast<Eigen::Index>(basis.size()));
        CHECK(spectral::semigroup_apply(M, 0.0, f0) == f0);
        CHECK_THROWS_AS(spectral::semigroup_apply(M, -1.0, f0), invalid_argument);
    }

    SECTION("diagonal generator decays componentwise") {
        auto basis = spectral::position_basis(m, 4);
        auto M = spectral::assemble(ops::OperatorKind::OU0, m, nullptr, basis);
        VectorXd f0 = testhelp::random_vector(rng, static_cast<Eigen::Index>(basis.size()));
        const double t = 0.01;
        VectorXd ft = spectral::semigroup_apply(M, t, f0);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const auto& a = basis.index_set()[i];
            double lam = 0.0;
            for (Eigen::Index k = 0; k < m.n; ++k)
                lam += a[static_cast<std::size_t>(k)] * m.c(k, k) / m.q1[k];
            CHECK(ft[static_cast<Eigen::Index>(i)] ==
                  Catch::Approx(f0[static_cast<Eigen::Index>(i)] * std::exp(-lam * t))
                      .margin(1e-9));
        }
    }

    SECTION("kinetic semigroup contracts and preserves the mean coefficient") {
        auto basis = spectral::phase_basis(m, 4);
        auto L = spectral::assemble(ops::OperatorKind::Langevin, m, nullptr, basis);
        VectorXd f0 = testhelp::random_vector(rng, static_cast<Eigen::Index>(basis.size()));
        double prev = f0.norm();
        for (double t : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            VectorXd ft = spectral::semigroup_apply(L, t, f0);
            CHECK(ft.norm() <= prev * (1.0 + 1e-9));
            prev = ft.norm();
            CHECK(ft[0] == Catch::Approx(f0[0]).margin(1e-9)); // constant coefficient
        }
    }
}

TEST_CASE("assembly guards", "[spectral]") {
    auto m = ops::dirichlet_identity_model(2);
    SECTION("basis dimension must match the operator") {
        auto nb = spectral::position_basis(m, 3);
        CHECK_THROWS_AS(spectral::assemble(ops::OperatorKind::Langevin, m, nullptr, nb),
                        invalid_argument);
    }
    SECTION("dense budget") {
        auto m3 = ops::dirichlet_identity_model(3);
        auto big = spectral::phase_basis(m3, 14); // C(20,6) members, far over budget
        CHECK_THROWS_AS(spectral::assemble(ops::OperatorKind::Langevin, m3, nullptr, big),
                        resource_limit_error);
    }
}
