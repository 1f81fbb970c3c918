#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "degenlab/errors.hpp"
#include "degenlab/spectrum.hpp"

namespace degenlab::ops {

/// Truncated coefficient matrices of the position/velocity model: diagonal
/// covariances, the diffusion coefficient restricted to the truncated span,
/// the coupling blocks, and the user-supplied negative-type constants.
struct GalerkinModel {
    Eigen::Index n = 0;
    Eigen::VectorXd q1; // eigenvalues of the position covariance
    Eigen::VectorXd q2; // eigenvalues of the velocity covariance
    Eigen::MatrixXd c;
    Eigen::MatrixXd k12;
    Eigen::MatrixXd k21;
    Eigen::MatrixXd k22;
    double tau1 = 0.0;
    double tau2 = 0.0;

    Eigen::VectorXd q1_inv() const { return q1.cwiseInverse(); }
    Eigen::VectorXd q2_inv() const { return q2.cwiseInverse(); }
};

namespace detail {
inline Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }
inline double min_sym_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}
} // namespace detail

/// Check the standing structural assumptions; throws naming the first
/// violated one. Symmetry/positivity checks use an absolute slack.
inline void validate_model(const GalerkinModel& m, double tol = 1e-10) {
    if (m.n <= 0) throw invalid_argument("GalerkinModel: n must be >= 1");
    const auto n = m.n;
    if (m.q1.size() != n || m.q2.size() != n || m.c.rows() != n || m.c.cols() != n ||
        m.k12.rows() != n || m.k12.cols() != n || m.k21.rows() != n || m.k21.cols() != n ||
        m.k22.rows() != n || m.k22.cols() != n)
        throw invalid_argument("GalerkinModel: matrix shapes must all be n x n");
    if ((m.q1.array() <= 0.0).any() || (m.q2.array() <= 0.0).any())
        throw invalid_argument("GalerkinModel: covariance eigenvalues must be positive");

    if ((m.c - m.c.transpose()).cwiseAbs().maxCoeff() > tol)
        throw precondition_error("GalerkinModel: c must be symmetric");
    if (detail::min_sym_eigenvalue(m.c) < -tol)
        throw precondition_error("GalerkinModel: c must be positive semidefinite");
    if (detail::min_sym_eigenvalue(m.q1_inv().asDiagonal() * m.c) < m.tau1 - tol)
        throw precondition_error("GalerkinModel: q1^-1 c fails the negative-type bound tau1");
    if ((m.k22 - m.k22.transpose()).cwiseAbs().maxCoeff() > tol)
        throw precondition_error("GalerkinModel: k22 must be symmetric");
    if (detail::min_sym_eigenvalue(m.k22) <= tol)
        throw precondition_error("GalerkinModel: k22 must be positive definite");
    if ((m.k21 - m.k12.transpose()).cwiseAbs().maxCoeff() > tol)
        throw precondition_error("GalerkinModel: k21 must equal k12 transposed");
    if (detail::min_sym_eigenvalue(m.k22 * m.q2_inv().asDiagonal().toDenseMatrix()) <
        m.tau2 - tol)
        throw precondition_error("GalerkinModel: k22 q2^-1 fails the negative-type bound tau2");
}

/// The sine-basis example at truncation n: inverse Dirichlet-Laplacian
/// covariances, identity couplings, and c = k21 q2^-1 k12 = diag(k^2 pi^2).
inline GalerkinModel dirichlet_identity_model(Eigen::Index n) {
    if (n <= 0) throw invalid_argument("dirichlet_identity_model: n must be >= 1");
    constexpr double pi = 3.14159265358979323846;
    GalerkinModel m;
    m.n = n;
    m.q1.resize(n);
    for (Eigen::Index k = 1; k <= n; ++k)
        m.q1[k - 1] = 1.0 / (static_cast<double>(k * k) * pi * pi);
    m.q2 = m.q1;
    m.k12 = Eigen::MatrixXd::Identity(n, n);
    m.k21 = Eigen::MatrixXd::Identity(n, n);
    m.k22 = Eigen::MatrixXd::Identity(n, n);
    m.c = m.q2_inv().asDiagonal();
    m.tau1 = pi * pi * pi * pi; // min eig of q1^-1 c = pi^4 at mode 1
    m.tau2 = pi * pi;           // min eig of k22 q2^-1 = pi^2 at mode 1
    validate_model(m);
    return m;
}

/// Model with explicit matrices; validates before returning.
inline GalerkinModel make_model(Eigen::VectorXd q1, Eigen::VectorXd q2, Eigen::MatrixXd c,
                                Eigen::MatrixXd k12, Eigen::MatrixXd k22, double tau1,
                                double tau2) {
    GalerkinModel m;
    m.n = q1.size();
    m.q1 = std::move(q1);
    m.q2 = std::move(q2);
    m.c = std::move(c);
    m.k12 = std::move(k12);
    m.k21 = m.k12.transpose();
    m.k22 = std::move(k22);
    m.tau1 = tau1;
    m.tau2 = tau2;
    validate_model(m);
    return m;
}

} // namespace degenlab::ops
