#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"
#include "degenlab/hermite.hpp"
#include "degenlab/polynomial.hpp"

namespace degenlab::ops {

/// Finitely based test function with analytic value, gradient and Hessian.
/// Polynomial-backed instances keep their symbolic form so that callers can
/// differentiate exactly (needed wherever derivatives of operator outputs
/// appear).
struct SmoothFunction {
    using Value = std::function<double(const Eigen::VectorXd&)>;
    using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
    using Hessian = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

    Eigen::Index dim = 0;
    Value value;
    Gradient gradient;
    Hessian hessian;
    std::string family_tag;
    std::shared_ptr<const Polynomial> poly; // set for the polynomial family

    bool is_polynomial() const noexcept { return poly != nullptr; }
};

inline SmoothFunction constant_function(Eigen::Index dim, double c) {
    SmoothFunction f;
    f.dim = dim;
    f.value = [c](const Eigen::VectorXd&) { return c; };
    f.gradient = [dim](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(dim).eval(); };
    f.hessian = [dim](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(dim, dim).eval(); };
    f.family_tag = "constant";
    f.poly = std::make_shared<Polynomial>(
        Polynomial::constant(static_cast<std::size_t>(dim), c));
    return f;
}

inline SmoothFunction from_polynomial(Polynomial p, std::string tag = "polynomial") {
    const auto dim = static_cast<Eigen::Index>(p.dim());
    auto shared = std::make_shared<Polynomial>(std::move(p));
    auto grads = std::make_shared<std::vector<Polynomial>>(shared->gradient());
    auto hessians = std::make_shared<std::vector<Polynomial>>();
    hessians->reserve(static_cast<std::size_t>(dim * dim));
    for (std::size_t i = 0; i < shared->dim(); ++i)
        for (std::size_t j = 0; j < shared->dim(); ++j)
            hessians->push_back((*grads)[i].derivative(j));

    SmoothFunction f;
    f.dim = dim;
    f.value = [shared](const Eigen::VectorXd& x) { return (*shared)(x); };
    f.gradient = [grads, dim](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(dim);
        for (Eigen::Index i = 0; i < dim; ++i) g[i] = (*grads)[static_cast<std::size_t>(i)](x);
        return g;
    };
    f.hessian = [hessians, dim](const Eigen::VectorXd& x) {
        Eigen::MatrixXd h(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j)
                h(i, j) = (*hessians)[static_cast<std::size_t>(i * dim + j)](x);
        return h;
    };
    f.family_tag = std::move(tag);
    f.poly = shared;
    return f;
}

inline SmoothFunction linear_function(const Eigen::VectorXd& a) {
    return from_polynomial(Polynomial::linear(a), "linear");
}

/// Bounded wave sin(<a,x> + phase); the paper-faithful bounded family.
inline SmoothFunction trig_function(const Eigen::VectorXd& a, double phase) {
    SmoothFunction f;
    f.dim = a.size();
    Eigen::VectorXd av = a;
    f.value = [av, phase](const Eigen::VectorXd& x) { return std::sin(av.dot(x) + phase); };
    f.gradient = [av, phase](const Eigen::VectorXd& x) {
        return (std::cos(av.dot(x) + phase) * av).eval();
    };
    f.hessian = [av, phase](const Eigen::VectorXd& x) {
        return (-std::sin(av.dot(x) + phase) * (av * av.transpose())).eval();
    };
    f.family_tag = "trig";
    return f;
}

/// Product of per-axis orthonormal Hermite polynomials scaled by the Gaussian
/// standard deviations; the eigenfunction family of the Ornstein-Uhlenbeck
/// generator with diagonal coefficients.
inline SmoothFunction hermite_function(const std::vector<int>& alpha,
                                       const Eigen::VectorXd& axis_scales) {
    const auto dim = axis_scales.size();
    if (static_cast<Eigen::Index>(alpha.size()) != dim)
        throw invalid_argument("hermite_function: index/scale dimension mismatch");

    auto factors = [alpha, axis_scales](const Eigen::VectorXd& x) {
        std::vector<double> v(static_cast<std::size_t>(x.size()));
        for (Eigen::Index i = 0; i < x.size(); ++i)
            v[static_cast<std::size_t>(i)] = hermite_value(
                static_cast<std::size_t>(alpha[static_cast<std::size_t>(i)]),
                x[i] / axis_scales[i]);
        return v;
    };

    SmoothFunction f;
    f.dim = dim;
    f.value = [factors](const Eigen::VectorXd& x) {
        double v = 1.0;
        for (double t : factors(x)) v *= t;
        return v;
    };
    f.gradient = [alpha, axis_scales, factors](const Eigen::VectorXd& x) {
        auto vals = factors(x);
        Eigen::VectorXd g(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const auto k = static_cast<std::size_t>(alpha[static_cast<std::size_t>(i)]);
            double d = hermite_derivative(k, x[i] / axis_scales[i]) / axis_scales[i];
            for (Eigen::Index j = 0; j < x.size(); ++j)
                if (j != i) d *= vals[static_cast<std::size_t>(j)];
            g[i] = d;
        }
        return g;
    };
    f.hessian = [alpha, axis_scales, factors](const Eigen::VectorXd& x) {
        auto vals = factors(x);
        const auto n = x.size();
        Eigen::MatrixXd h(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                double d = 1.0;
                for (Eigen::Index m = 0; m < n; ++m) {
                    const auto k = static_cast<std::size_t>(alpha[static_cast<std::size_t>(m)]);
                    const double z = x[m] / axis_scales[m];
                    if (m == i && m == j)
                        d *= hermite_second_derivative(k, z) / (axis_scales[m] * axis_scales[m]);
                    else if (m == i || m == j)
                        d *= hermite_derivative(k, z) / axis_scales[m];
                    else
                        d *= vals[static_cast<std::size_t>(m)];
                }
                h(i, j) = d;
                h(j, i) = d;
            }
        }
        return h;
    };
    f.family_tag = "hermite";
    return f;
}

/// Phase-space product f(x,y) = g(x) h(y).
inline SmoothFunction product_function(const SmoothFunction& g, const SmoothFunction& h) {
    const Eigen::Index nx = g.dim;
    const Eigen::Index ny = h.dim;
    SmoothFunction f;
    f.dim = nx + ny;
    f.value = [g, h, nx, ny](const Eigen::VectorXd& z) {
        return g.value(z.head(nx)) * h.value(z.tail(ny));
    };
    f.gradient = [g, h, nx, ny](const Eigen::VectorXd& z) {
        const Eigen::VectorXd x = z.head(nx), y = z.tail(ny);
        const double gv = g.value(x), hv = h.value(y);
        Eigen::VectorXd grad(nx + ny);
        grad.head(nx) = hv * g.gradient(x);
        grad.tail(ny) = gv * h.gradient(y);
        return grad;
    };
    f.hessian = [g, h, nx, ny](const Eigen::VectorXd& z) {
        const Eigen::VectorXd x = z.head(nx), y = z.tail(ny);
        const double gv = g.value(x), hv = h.value(y);
        const Eigen::VectorXd gg = g.gradient(x), hg = h.gradient(y);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(nx + ny, nx + ny);
        hess.topLeftCorner(nx, nx) = hv * g.hessian(x);
        hess.bottomRightCorner(ny, ny) = gv * h.hessian(y);
        hess.topRightCorner(nx, ny) = gg * hg.transpose();
        hess.bottomLeftCorner(ny, nx) = hg * gg.transpose();
        return hess;
    };
    f.family_tag = "product";
    if (g.poly && h.poly) {
        // lift both factors to the joint variable set and multiply
        const std::size_t dim = static_cast<std::size_t>(nx + ny);
        Polynomial gp(dim), hp(dim);
        for (const auto& [e, c] : g.poly->terms()) {
            Polynomial::Exponents lifted(dim, 0);
            std::copy(e.begin(), e.end(), lifted.begin());
            gp += Polynomial::monomial(dim, lifted, c);
        }
        for (const auto& [e, c] : h.poly->terms()) {
            Polynomial::Exponents lifted(dim, 0);
            std::copy(e.begin(), e.end(), lifted.begin() + nx);
            hp += Polynomial::monomial(dim, lifted, c);
        }
        f.poly = std::make_shared<Polynomial>(gp * hp);
    }
    return f;
}

/// Pointwise linear combination a*f + b*g.
inline SmoothFunction linear_combination(double a, const SmoothFunction& f, double b,
                                         const SmoothFunction& g) {
    if (f.dim != g.dim) throw invalid_argument("linear_combination: dimension mismatch");
    SmoothFunction r;
    r.dim = f.dim;
    r.value = [a, f, b, g](const Eigen::VectorXd& x) { return a * f.value(x) + b * g.value(x); };
    r.gradient = [a, f, b, g](const Eigen::VectorXd& x) {
        return (a * f.gradient(x) + b * g.gradient(x)).eval();
    };
    r.hessian = [a, f, b, g](const Eigen::VectorXd& x) {
        return (a * f.hessian(x) + b * g.hessian(x)).eval();
    };
    r.family_tag = "combination";
    if (f.poly && g.poly) r.poly = std::make_shared<Polynomial>(*f.poly * a + *g.poly * b);
    return r;
}

/// Pointwise product with analytic product-rule derivatives.
inline SmoothFunction pointwise_product(const SmoothFunction& f, const SmoothFunction& g) {
    if (f.dim != g.dim) throw invalid_argument("pointwise_product: dimension mismatch");
    SmoothFunction r;
    r.dim = f.dim;
    r.value = [f, g](const Eigen::VectorXd& x) { return f.value(x) * g.value(x); };
    r.gradient = [f, g](const Eigen::VectorXd& x) {
        return (f.value(x) * g.gradient(x) + g.value(x) * f.gradient(x)).eval();
    };
    r.hessian = [f, g](const Eigen::VectorXd& x) {
        const Eigen::VectorXd fg = f.gradient(x), gg = g.gradient(x);
        return (f.value(x) * g.hessian(x) + g.value(x) * f.hessian(x) + fg * gg.transpose() +
                gg * fg.transpose())
            .eval();
    };
    r.family_tag = "product";
    if (f.poly && g.poly) r.poly = std::make_shared<Polynomial>(*f.poly * *g.poly);
    return r;
}

} // namespace degenlab::ops
