#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"
#include "degenlab/galerkin.hpp"
#include "degenlab/potential.hpp"
#include "degenlab/quadrature.hpp"
#include "degenlab/smooth_function.hpp"

namespace degenlab::ops {

enum class OperatorKind { OU0, OU, Dissipation, Transport, Langevin };

inline const char* operator_tag(OperatorKind k) {
    switch (k) {
        case OperatorKind::OU0: return "N0";
        case OperatorKind::OU: return "N";
        case OperatorKind::Dissipation: return "S";
        case OperatorKind::Transport: return "A";
        case OperatorKind::Langevin: return "L";
    }
    return "?";
}

inline OperatorKind operator_kind_from_tag(const std::string& tag) {
    if (tag == "N0") return OperatorKind::OU0;
    if (tag == "N") return OperatorKind::OU;
    if (tag == "S") return OperatorKind::Dissipation;
    if (tag == "A") return OperatorKind::Transport;
    if (tag == "L") return OperatorKind::Langevin;
    throw invalid_argument("unknown operator tag '" + tag + "'");
}

namespace detail {
inline void check_dim(const GalerkinModel& m, const SmoothFunction& f, Eigen::Index expected) {
    if (f.dim != expected)
        throw invalid_argument("operator application: function dimension mismatch");
    if (m.n <= 0) throw invalid_argument("operator application: empty model");
}
inline double potential_gradient_term(const pot::Potential& p, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& direction) {
    const double v = p.value(x);
    if (std::isinf(v) && v > 0.0)
        throw domain_error("operator application: potential is infinite at x");
    return p.gradient(x).dot(direction);
}
} // namespace detail

/// Ornstein-Uhlenbeck generator with diffusion coefficient c:
/// tr[c D^2 f](x) - <x, q1^-1 c Df(x)>.
inline double ou_apply(const GalerkinModel& m, const SmoothFunction& f,
                       const Eigen::VectorXd& x) {
    detail::check_dim(m, f, m.n);
    const Eigen::MatrixXd hess = f.hessian(x);
    const Eigen::VectorXd grad = f.gradient(x);
    return (m.c * hess).trace() - x.dot(m.q1_inv().asDiagonal() * (m.c * grad));
}

/// Gradient perturbation: ou_apply(f) - <DPhi(x), c Df(x)>.
inline double perturbed_ou_apply(const GalerkinModel& m, const pot::Potential& p,
                                 const SmoothFunction& f, const Eigen::VectorXd& x) {
    detail::check_dim(m, f, m.n);
    if (p.dim != m.n) throw invalid_argument("perturbed_ou_apply: potential dimension mismatch");
    return ou_apply(m, f, x) - detail::potential_gradient_term(p, x, m.c * f.gradient(x));
}

/// Symmetric dissipative part, second order in the velocity variable:
/// tr[k22 D_y^2 f] - <y, q2^-1 k22 D_y f>.
inline double dissipation_apply(const GalerkinModel& m, const SmoothFunction& f,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    detail::check_dim(m, f, 2 * m.n);
    Eigen::VectorXd z(2 * m.n);
    z << x, y;
    const Eigen::MatrixXd hess_yy = f.hessian(z).bottomRightCorner(m.n, m.n);
    const Eigen::VectorXd grad_y = f.gradient(z).tail(m.n);
    return (m.k22 * hess_yy).trace() - y.dot(m.q2_inv().asDiagonal() * (m.k22 * grad_y));
}

/// Antisymmetric transport part including the potential term:
/// <x, q1^-1 k21 D_y f> + <DPhi(x), k21 D_y f> - <y, q2^-1 k12 D_x f>.
inline double transport_apply(const GalerkinModel& m, const pot::Potential& p,
                              const SmoothFunction& f, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) {
    detail::check_dim(m, f, 2 * m.n);
    if (p.dim != m.n) throw invalid_argument("transport_apply: potential dimension mismatch");
    Eigen::VectorXd z(2 * m.n);
    z << x, y;
    const Eigen::VectorXd grad = f.gradient(z);
    const Eigen::VectorXd grad_x = grad.head(m.n);
    const Eigen::VectorXd grad_y = grad.tail(m.n);
    const Eigen::VectorXd k21gy = m.k21 * grad_y;
    return x.dot(m.q1_inv().asDiagonal() * k21gy) +
           detail::potential_gradient_term(p, x, k21gy) -
           y.dot(m.q2_inv().asDiagonal() * (m.k12 * grad_x));
}

/// Kinetic generator: dissipation minus transport.
inline double langevin_apply(const GalerkinModel& m, const pot::Potential& p,
                             const SmoothFunction& f, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y) {
    return dissipation_apply(m, f, x, y) - transport_apply(m, p, f, x, y);
}

/// Flat-space representation of the dissipative part under the ground-state
/// transform: tr[k22 D_y^2 phi] - (1/4) <q2^-1 k22 q2^-1 y, y> phi
/// + (1/2) tr[k22 q2^-1] phi.
inline double ground_state_dissipation_apply(const GalerkinModel& m, const SmoothFunction& phi,
                                             const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& y) {
    detail::check_dim(m, phi, 2 * m.n);
    Eigen::VectorXd z(2 * m.n);
    z << x, y;
    const Eigen::MatrixXd hess_yy = phi.hessian(z).bottomRightCorner(m.n, m.n);
    const double v = phi.value(z);
    const Eigen::VectorXd q2inv = m.q2_inv();
    const Eigen::VectorXd w = q2inv.asDiagonal() * (m.k22 * (q2inv.asDiagonal() * y).eval());
    const double trace_term = (m.k22 * q2inv.asDiagonal()).trace();
    return (m.k22 * hess_yy).trace() - 0.25 * w.dot(y) * v + 0.5 * trace_term * v;
}

/// The multiplication factor of the ground-state transform, as a smooth
/// function with analytic derivatives (used to cross-check the conjugated
/// formula by direct composition).
inline SmoothFunction ground_state_weight(const GalerkinModel& m) {
    constexpr double two_pi = 6.28318530717958647692;
    const Eigen::VectorXd q1inv = m.q1_inv();
    const Eigen::VectorXd q2inv = m.q2_inv();
    double log_norm = 0.0; // log of ((2 pi)^n det q1)^(1/4) ((2 pi)^n det q2)^(1/4)
    for (Eigen::Index i = 0; i < m.n; ++i)
        log_norm += 0.25 * (std::log(two_pi * m.q1[i]) + std::log(two_pi * m.q2[i]));
    const Eigen::Index n = m.n;

    SmoothFunction f;
    f.dim = 2 * n;
    auto logval = [q1inv, q2inv, n, log_norm](const Eigen::VectorXd& z) {
        const auto x = z.head(n), y = z.tail(n);
        return log_norm + 0.25 * (x.cwiseProduct(q1inv.cwiseProduct(x)).sum() +
                                  y.cwiseProduct(q2inv.cwiseProduct(y)).sum());
    };
    f.value = [logval](const Eigen::VectorXd& z) { return std::exp(logval(z)); };
    f.gradient = [logval, q1inv, q2inv, n](const Eigen::VectorXd& z) {
        Eigen::VectorXd g(2 * n);
        g.head(n) = 0.5 * q1inv.cwiseProduct(z.head(n));
        g.tail(n) = 0.5 * q2inv.cwiseProduct(z.tail(n));
        return (std::exp(logval(z)) * g).eval();
    };
    f.hessian = [logval, q1inv, q2inv, n](const Eigen::VectorXd& z) {
        Eigen::VectorXd g(2 * n);
        g.head(n) = 0.5 * q1inv.cwiseProduct(z.head(n));
        g.tail(n) = 0.5 * q2inv.cwiseProduct(z.tail(n));
        Eigen::MatrixXd curv = (g * g.transpose()).eval();
        for (Eigen::Index i = 0; i < n; ++i) {
            curv(i, i) += 0.5 * q1inv[i];
            curv(n + i, n + i) += 0.5 * q2inv[i];
        }
        return (std::exp(logval(z)) * curv).eval();
    };
    f.family_tag = "gaussian-weight";
    return f;
}

/// Position-space diffusion coefficient k21 q2^-1 k12, symmetrized against
/// roundoff; positive semidefinite by construction.
inline Eigen::MatrixXd reduced_diffusion(const GalerkinModel& m) {
    const Eigen::MatrixXd r = m.k21 * m.q2_inv().asDiagonal() * m.k12;
    return 0.5 * (r + r.transpose());
}

/// Velocity-averaged reduction: integrates out y with the supplied rule,
/// then applies the perturbed Ornstein-Uhlenbeck generator with the reduced
/// diffusion coefficient. The y-nodes are fixed, so differentiation passes
/// under the integral.
inline double reduced_ou_apply(const GalerkinModel& m, const pot::Potential& p,
                               const SmoothFunction& f, const Eigen::VectorXd& x,
                               const gauss::QuadratureRule& y_rule) {
    detail::check_dim(m, f, 2 * m.n);
    if (p.dim != m.n) throw invalid_argument("reduced_ou_apply: potential dimension mismatch");
    const Eigen::Index n = m.n;
    Eigen::VectorXd grad_s = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd hess_s = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd z(2 * n);
    for (std::size_t j = 0; j < y_rule.size(); ++j) {
        z << x, y_rule.nodes()[j];
        const double w = y_rule.weights()[j];
        grad_s += w * f.gradient(z).head(n);
        hess_s += w * f.hessian(z).topLeftCorner(n, n);
    }
    const Eigen::MatrixXd cred = reduced_diffusion(m);
    return (cred * hess_s).trace() - x.dot(m.q1_inv().asDiagonal() * (cred * grad_s)) -
           detail::potential_gradient_term(p, x, cred * grad_s);
}

} // namespace degenlab::ops
