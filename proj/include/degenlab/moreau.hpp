#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"
#include "degenlab/potential.hpp"

namespace degenlab::pot {

struct MoreauResult {
    double value = 0.0;        // Phi_t(u)
    Eigen::VectorXd gradient;  // (u - prox)/t
    Eigen::VectorXd prox;
};

struct MoreauOptions {
    double tolerance = 1e-10;  // first-order residual |grad F|
    int max_iterations = 10'000;
};

namespace detail {

/// Damped descent on the t^{-1}-strongly convex objective
/// F(x) = Phi(x) + |u-x|^2 / (2t). Uses the Newton direction when the
/// potential exposes a Hessian, otherwise the gradient scaled by t. Steps are
/// accepted on Armijo decrease or, near the optimum where objective
/// differences fall below double resolution, on residual decrease.
inline Eigen::VectorXd prox_by_descent(const Potential& p, double t, const Eigen::VectorXd& u,
                                       const MoreauOptions& opt) {
    // Iterate on the displacement d = x - u: the optimality residual
    // grad Phi(u+d) + d/t then avoids the catastrophic cancellation that
    // forming (x-u)/t directly would suffer at small t.
    auto objective = [&](const Eigen::VectorXd& d) {
        return p.value(u + d) + d.squaredNorm() / (2.0 * t);
    };
    auto grad = [&](const Eigen::VectorXd& d) {
        return (p.gradient(u + d) + d / t).eval();
    };

    Eigen::VectorXd d = Eigen::VectorXd::Zero(u.size());
    double fd = objective(d);
    Eigen::VectorXd g = grad(d);
    double residual = g.norm();
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (residual <= opt.tolerance) return u + d;
        Eigen::VectorXd dir;
        if (p.hessian) {
            Eigen::MatrixXd curv = p.hessian(u + d);
            curv.diagonal().array() += 1.0 / t;
            dir = -curv.llt().solve(g);
        } else {
            dir = -t * g;
        }
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            Eigen::VectorXd cand = d + step * dir;
            const double fc = objective(cand);
            const Eigen::VectorXd gc = grad(cand);
            // Armijo decrease, or residual decrease once objective differences
            // drop below double resolution near the optimum.
            if (fc <= fd + 1e-4 * step * g.dot(dir) || gc.norm() < residual) {
                d = std::move(cand);
                fd = fc;
                g = gc;
                residual = g.norm();
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break; // fully stalled; report the residual below
    }
    if (residual <= opt.tolerance) return u + d;
    throw numerical_error("moreau_yoshida: prox solver did not reach tolerance", residual);
}

} // namespace detail

/// Moreau-Yoshida envelope of a convex potential at parameter t:
/// value inf_x { Phi(x) + |u-x|^2/(2t) }, its minimizer, and the envelope
/// gradient (u - prox)/t. Potentials with a closed-form prox bypass the solver.
inline MoreauResult moreau_yoshida(const Potential& p, double t, const Eigen::VectorXd& u,
                                   const MoreauOptions& opt = {}) {
    if (!(t > 0.0)) throw invalid_argument("moreau_yoshida: t must be positive");
    if (!p.convex)
        throw unsupported_error("moreau_yoshida: potential must be convex (prox unique)");
    if (u.size() != p.dim) throw invalid_argument("moreau_yoshida: dimension mismatch");

    MoreauResult r;
    if (p.prox) {
        r.prox = p.prox(u, t);
    } else {
        if (!p.gradient)
            throw precondition_error("moreau_yoshida: potential without prox needs a gradient");
        r.prox = detail::prox_by_descent(p, t, u, opt);
    }
    r.gradient = (u - r.prox) / t;
    r.value = p.value(r.prox) + (u - r.prox).squaredNorm() / (2.0 * t);
    return r;
}

} // namespace degenlab::pot
