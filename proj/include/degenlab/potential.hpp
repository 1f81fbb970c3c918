#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"
#include "degenlab/quadrature.hpp"
#include "degenlab/spectrum.hpp"

namespace degenlab::pot {

constexpr double kPi = 3.14159265358979323846;

struct GrowthConstants {
    double c1 = 0.0;
    double p1 = 2.0;
    double c2 = 0.0;
    double p2 = 1.0;
};

/// Scalar potential shape phi: R -> R with derivative and, where smooth, a
/// second derivative. Used to build the composite potentials u -> int phi(u(s)) ds.
struct ScalarShape {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::function<double(double)> second_derivative; // empty for nonsmooth shapes
    std::optional<double> lower_bound;
    std::optional<double> derivative_sup;  // ess-sup of |phi'|
    bool convex = false;
};

inline ScalarShape scalar_shape(const std::string& name) {
    ScalarShape s;
    s.name = name;
    if (name == "zero") {
        s.value = [](double) { return 0.0; };
        s.derivative = [](double) { return 0.0; };
        s.second_derivative = [](double) { return 0.0; };
        s.lower_bound = 0.0;
        s.derivative_sup = 0.0;
        s.convex = true;
    } else if (name == "abs") {
        s.value = [](double t) { return std::abs(t); };
        s.derivative = [](double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); };
        s.lower_bound = 0.0;
        s.derivative_sup = 1.0;
        s.convex = true;
    } else if (name == "quadratic") {
        s.value = [](double t) { return 0.5 * t * t; };
        s.derivative = [](double t) { return t; };
        s.second_derivative = [](double) { return 1.0; };
        s.lower_bound = 0.0;
        s.convex = true; // derivative unbounded: no derivative_sup
    } else if (name == "sqrt1p") {
        s.value = [](double t) { return std::sqrt(1.0 + t * t); };
        s.derivative = [](double t) { return t / std::sqrt(1.0 + t * t); };
        s.second_derivative = [](double t) { return std::pow(1.0 + t * t, -1.5); };
        s.lower_bound = 1.0;
        s.derivative_sup = 1.0;
        s.convex = true;
    } else if (name == "soft-well") {
        s.value = [](double t) { return std::log(std::cosh(t)); };
        s.derivative = [](double t) { return std::tanh(t); };
        s.second_derivative = [](double t) {
            const double c = std::cosh(t);
            return 1.0 / (c * c);
        };
        s.lower_bound = 0.0;
        s.derivative_sup = 1.0;
        s.convex = true;
    } else {
        throw invalid_argument("scalar_shape: unknown shape '" + name + "'");
    }
    return s;
}

/// Potential evaluator bundle on the truncated coordinate space, with the
/// metadata the theorems consume (lower bound, convexity, gradient bounds).
struct Potential {
    Eigen::Index dim = 0;
    std::function<double(const Eigen::VectorXd&)> value;       // may return +inf
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian; // optional
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> prox; // optional closed form
    std::optional<double> lower_bound;
    bool convex = false;
    std::optional<double> grad_sup_norm;
    std::optional<double> grad_lipschitz;
    std::optional<GrowthConstants> growth;
    std::string name;

    bool has_hessian() const noexcept { return static_cast<bool>(hessian); }
};

inline Potential zero_potential(Eigen::Index dim) {
    Potential p;
    p.dim = dim;
    p.value = [](const Eigen::VectorXd&) { return 0.0; };
    p.gradient = [dim](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(dim).eval(); };
    p.hessian = [dim](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(dim, dim).eval(); };
    p.prox = [](const Eigen::VectorXd& u, double) { return u; };
    p.lower_bound = 0.0;
    p.convex = true;
    p.grad_sup_norm = 0.0;
    p.grad_lipschitz = 0.0;
    p.name = "zero";
    return p;
}

/// 0.5 |x|^2 on R^n.
inline Potential quadratic_potential(Eigen::Index dim) {
    Potential p;
    p.dim = dim;
    p.value = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); };
    p.gradient = [](const Eigen::VectorXd& x) { return x.eval(); };
    p.hessian = [dim](const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(dim, dim).eval();
    };
    p.prox = [](const Eigen::VectorXd& u, double t) { return (u / (1.0 + t)).eval(); };
    p.lower_bound = 0.0;
    p.convex = true;
    p.grad_lipschitz = 1.0;
    p.name = "quadratic";
    return p;
}

/// l1 norm; prox is coordinatewise soft-thresholding. No Hessian, gradient is
/// the subgradient selection sign(x).
inline Potential abs_potential(Eigen::Index dim) {
    Potential p;
    p.dim = dim;
    p.value = [](const Eigen::VectorXd& x) { return x.lpNorm<1>(); };
    p.gradient = [](const Eigen::VectorXd& x) {
        return x.unaryExpr([](double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); })
            .eval();
    };
    p.prox = [](const Eigen::VectorXd& u, double t) {
        return u.unaryExpr([t](double v) {
                    if (v > t) return v - t;
                    if (v < -t) return v + t;
                    return 0.0;
                })
            .eval();
    };
    p.lower_bound = 0.0;
    p.convex = true;
    p.grad_sup_norm = std::sqrt(static_cast<double>(dim));
    p.name = "abs";
    return p;
}

/// Composite potential of the sine-basis example: the first n coordinates
/// parameterize u(s) = sum_k x_k sqrt(2) sin(k pi s) and
///
///   Phi(x) = int_0^1 phi(u(s)) ds,   dPhi/dx_k = int_0^1 phi'(u(s)) sqrt(2) sin(k pi s) ds,
///
/// evaluated with a fixed-panel Gauss-Legendre rule in s.
inline Potential composite_potential(const ScalarShape& phi, const gauss::CovSpectrum& spectrum,
                                     std::size_t n, std::size_t s_quad_points = 64) {
    if (spectrum.basis_label() != "sine-dirichlet")
        throw precondition_error("composite_potential: spectrum basis must be sine-dirichlet");
    if (!phi.lower_bound)
        throw precondition_error("composite_potential: scalar shape must be bounded below");
    if (n == 0) throw invalid_argument("composite_potential: n must be >= 1");
    if (s_quad_points == 0)
        throw invalid_argument("composite_potential: s_quad_points must be >= 1");

    const gauss::Rule1D rule = gauss::gauss_legendre01(s_quad_points);
    const auto dim = static_cast<Eigen::Index>(n);

    // cached sine table: sines[j][k] = sqrt(2) sin((k+1) pi s_j)
    auto sines = std::make_shared<std::vector<Eigen::VectorXd>>();
    sines->reserve(s_quad_points);
    for (double s : rule.nodes) {
        Eigen::VectorXd row(dim);
        for (Eigen::Index k = 0; k < dim; ++k)
            row[k] = std::sqrt(2.0) * std::sin(static_cast<double>(k + 1) * kPi * s);
        sines->push_back(std::move(row));
    }
    auto weights = std::make_shared<std::vector<double>>(rule.weights);

    Potential p;
    p.dim = dim;
    p.value = [phi, sines, weights](const Eigen::VectorXd& x) {
        double v = 0.0;
        for (std::size_t j = 0; j < weights->size(); ++j)
            v += (*weights)[j] * phi.value((*sines)[j].dot(x));
        return v;
    };
    p.gradient = [phi, sines, weights, dim](const Eigen::VectorXd& x) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
        for (std::size_t j = 0; j < weights->size(); ++j)
            g += ((*weights)[j] * phi.derivative((*sines)[j].dot(x))) * (*sines)[j];
        return g;
    };
    if (phi.second_derivative) {
        p.hessian = [phi, sines, weights, dim](const Eigen::VectorXd& x) {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
            for (std::size_t j = 0; j < weights->size(); ++j)
                h += ((*weights)[j] * phi.second_derivative((*sines)[j].dot(x))) *
                     ((*sines)[j] * (*sines)[j].transpose());
            return h;
        };
    }
    p.lower_bound = *phi.lower_bound; // probability measure in s preserves the bound
    p.convex = phi.convex;
    // Bessel: |DPhi(x)|^2 <= |phi' o u|_{L^2(0,1)}^2 <= sup|phi'|^2
    p.grad_sup_norm = phi.derivative_sup;
    p.name = "composite-" + phi.name;
    return p;
}

/// Multiply a potential by a positive factor, rescaling its metadata.
inline Potential scale_potential(const Potential& p, double factor) {
    if (!(factor > 0.0)) throw invalid_argument("scale_potential: factor must be positive");
    Potential q = p;
    auto v = p.value;
    auto g = p.gradient;
    q.value = [v, factor](const Eigen::VectorXd& x) { return factor * v(x); };
    q.gradient = [g, factor](const Eigen::VectorXd& x) { return (factor * g(x)).eval(); };
    if (p.hessian) {
        auto h = p.hessian;
        q.hessian = [h, factor](const Eigen::VectorXd& x) { return (factor * h(x)).eval(); };
    }
    if (p.prox) {
        // argmin c*Phi(x) + |u-x|^2/(2t) = prox of Phi at parameter c*t
        auto base = p.prox;
        q.prox = [base, factor](const Eigen::VectorXd& u, double t) {
            return base(u, factor * t);
        };
    }
    if (p.lower_bound) q.lower_bound = factor * *p.lower_bound;
    if (p.grad_sup_norm) q.grad_sup_norm = factor * *p.grad_sup_norm;
    if (p.grad_lipschitz) q.grad_lipschitz = factor * *p.grad_lipschitz;
    q.name = p.name + "-scaled";
    return q;
}

/// Rescale a potential with bounded gradient so that its gradient sup-norm is
/// exactly pi/(2+delta), which places |DPhi|^2 strictly below pi^2/4, the
/// perturbation bound of the sine-basis example.
inline Potential scale_for_smallness(const Potential& p, double delta) {
    if (!(delta > 0.0)) throw invalid_argument("scale_for_smallness: delta must be positive");
    if (!p.grad_sup_norm || !(*p.grad_sup_norm > 0.0) || !std::isfinite(*p.grad_sup_norm))
        throw precondition_error("scale_for_smallness: potential lacks a finite gradient bound");
    const double factor = kPi / ((2.0 + delta) * *p.grad_sup_norm);
    Potential q = scale_potential(p, factor);
    q.grad_sup_norm = kPi / (2.0 + delta); // exact by construction
    q.name = p.name + "-small";
    return q;
}

/// Perturbation precondition |DPhi|_inf^2 < 1/(4 nu_1), with nu_1 the largest
/// eigenvalue of the velocity covariance.
struct SmallnessReport {
    double grad_sup_norm_sq = 0.0;
    double bound = 0.0;
    bool pass = false;
};

inline SmallnessReport check_smallness(const Potential& p, double nu1) {
    if (!p.grad_sup_norm)
        throw precondition_error("check_smallness: potential lacks a gradient bound");
    if (!(nu1 > 0.0)) throw invalid_argument("check_smallness: nu1 must be positive");
    SmallnessReport r;
    r.grad_sup_norm_sq = *p.grad_sup_norm * *p.grad_sup_norm;
    r.bound = 1.0 / (4.0 * nu1);
    r.pass = r.grad_sup_norm_sq < r.bound;
    return r;
}

} // namespace degenlab::pot
