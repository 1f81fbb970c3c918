#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"
#include "degenlab/expectation.hpp"
#include "degenlab/galerkin.hpp"
#include "degenlab/gaussian.hpp"
#include "degenlab/operators.hpp"
#include "degenlab/polynomial.hpp"
#include "degenlab/potential.hpp"
#include "degenlab/reports.hpp"
#include "degenlab/rng.hpp"
#include "degenlab/smooth_function.hpp"

namespace degenlab::verify {

struct VerifyOptions {
    gauss::Method method = gauss::Method::quadrature;
    std::size_t points_per_axis = 0; // 0: derived from the integrand degrees
    std::size_t mc_samples = 200'000;
    std::uint64_t seed = 0;
    double tolerance = 0.0; // 0: contextual default
    std::size_t grid_budget = gauss::kDefaultGridBudget;
};

namespace detail {

// ---- polynomial calculus for the operator identities ----

using PolyVec = std::vector<Polynomial>;

inline PolyVec gradient_block(const Polynomial& f, std::size_t from, std::size_t count) {
    PolyVec g;
    g.reserve(count);
    for (std::size_t i = 0; i < count; ++i) g.push_back(f.derivative(from + i));
    return g;
}

inline PolyVec mat_apply(const Eigen::MatrixXd& m, const PolyVec& v) {
    PolyVec out;
    out.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        Polynomial s(v.front().dim());
        for (Eigen::Index i = 0; i < m.cols(); ++i)
            if (m(j, i) != 0.0) s += v[static_cast<std::size_t>(i)] * m(j, i);
        out.push_back(std::move(s));
    }
    return out;
}

inline Polynomial dot(const PolyVec& a, const PolyVec& b) {
    Polynomial s(a.front().dim());
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Polynomial dot_diag(const PolyVec& a, const Eigen::VectorXd& d, const PolyVec& b) {
    Polynomial s(a.front().dim());
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i] * d[static_cast<Eigen::Index>(i)];
    return s;
}

/// <z_block, diag(d) * v> with z the coordinates starting at `offset`.
inline Polynomial coord_dot_diag(std::size_t offset, const Eigen::VectorXd& d, const PolyVec& v) {
    const std::size_t dim = v.front().dim();
    Polynomial s(dim);
    for (std::size_t i = 0; i < v.size(); ++i)
        s += Polynomial::coordinate(dim, offset + i) * v[i] * d[static_cast<Eigen::Index>(i)];
    return s;
}

/// Matrix polynomial (M H)(a,b) = sum_i M(a,i) d_i d_b f for the Hessian block
/// starting at `from`; returns the full square of its trace contraction
/// tr[(M H)^2].
inline Polynomial trace_square(const Eigen::MatrixXd& m, const Polynomial& f, std::size_t from) {
    const auto n = static_cast<std::size_t>(m.rows());
    std::vector<PolyVec> mh(n); // mh[a][b] = (M H)(a,b)
    for (std::size_t a = 0; a < n; ++a) {
        mh[a].reserve(n);
        for (std::size_t b = 0; b < n; ++b) {
            Polynomial s(f.dim());
            for (std::size_t i = 0; i < n; ++i) {
                const double coef = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i));
                if (coef != 0.0) s += f.derivative(from + i).derivative(from + b) * coef;
            }
            mh[a].push_back(std::move(s));
        }
    }
    Polynomial tr(f.dim());
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) tr += mh[a][b] * mh[b][a];
    return tr;
}

inline Polynomial trace_hessian(const Eigen::MatrixXd& m, const Polynomial& f,
                                std::size_t from) {
    Polynomial s(f.dim());
    const auto n = static_cast<std::size_t>(m.rows());
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t i = 0; i < n; ++i) {
            const double coef = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i));
            if (coef != 0.0) s += f.derivative(from + i).derivative(from + a) * coef;
        }
    return s;
}

/// Ornstein-Uhlenbeck generator applied symbolically.
inline Polynomial poly_ou(const ops::GalerkinModel& m, const Polynomial& f) {
    PolyVec cdf = mat_apply(m.c, gradient_block(f, 0, static_cast<std::size_t>(m.n)));
    return trace_hessian(m.c, f, 0) - coord_dot_diag(0, m.q1_inv(), cdf);
}

/// Kinetic generator applied symbolically (zero potential).
inline Polynomial poly_kinetic(const ops::GalerkinModel& m, const Polynomial& f) {
    const auto n = static_cast<std::size_t>(m.n);
    const PolyVec d1 = gradient_block(f, 0, n);
    const PolyVec d2 = gradient_block(f, n, n);
    Polynomial s = trace_hessian(m.k22, f, n) - coord_dot_diag(n, m.q2_inv(), mat_apply(m.k22, d2));
    Polynomial a = coord_dot_diag(0, m.q1_inv(), mat_apply(m.k21, d2)) -
                   coord_dot_diag(n, m.q2_inv(), mat_apply(m.k12, d1));
    return s - a;
}

// ---- batch integration over the (optionally reweighted) product measure ----

struct BatchResult {
    std::vector<double> values;
    std::vector<double> std_errors; // mc only
    std::size_t budget = 0;
};

inline BatchResult integrate_batch(const std::vector<gauss::Integrand>& integrands,
                                   const Eigen::VectorXd& variances,
                                   const pot::Potential* p, Eigen::Index pot_dim,
                                   const VerifyOptions& opt, std::size_t auto_points) {
    if (p && !p->lower_bound)
        throw precondition_error("verify: potential must declare a lower bound");
    auto density = [&](const Eigen::VectorXd& z) {
        if (!p) return 1.0;
        const double v = p->value(z.head(pot_dim));
        return (std::isinf(v) && v > 0.0) ? 0.0 : std::exp(-v);
    };

    BatchResult out;
    out.values.assign(integrands.size(), 0.0);
    out.std_errors.assign(integrands.size(), 0.0);

    if (opt.method == gauss::Method::quadrature) {
        const std::size_t points = opt.points_per_axis > 0 ? opt.points_per_axis : auto_points;
        std::vector<double> scales(static_cast<std::size_t>(variances.size()));
        for (Eigen::Index i = 0; i < variances.size(); ++i)
            scales[static_cast<std::size_t>(i)] = std::sqrt(variances[i]);
        const auto rule = gauss::tensor_gauss_hermite(scales, points, opt.grid_budget);
        double mass = 0.0;
        for (std::size_t j = 0; j < rule.size(); ++j) {
            const double w = rule.weights()[j] * density(rule.nodes()[j]);
            mass += w;
            for (std::size_t k = 0; k < integrands.size(); ++k)
                out.values[k] += w * integrands[k](rule.nodes()[j]);
        }
        for (auto& v : out.values) v /= mass;
        out.budget = rule.size();
        return out;
    }

    const auto g = gauss::ProjectedGaussian(variances);
    const auto draws = gauss::sample(g, opt.mc_samples, opt.seed);
    const auto nmc = static_cast<double>(draws.size());
    std::vector<double> wsum(integrands.size(), 0.0);
    double mass = 0.0;
    std::vector<std::vector<double>> per_draw(integrands.size());
    std::vector<double> rho(draws.size());
    for (std::size_t j = 0; j < draws.size(); ++j) {
        rho[j] = density(draws[j]);
        mass += rho[j];
        for (std::size_t k = 0; k < integrands.size(); ++k)
            per_draw[k].push_back(integrands[k](draws[j]));
    }
    const double wbar = mass / nmc;
    for (std::size_t k = 0; k < integrands.size(); ++k) {
        double num = 0.0;
        for (std::size_t j = 0; j < draws.size(); ++j) num += rho[j] * per_draw[k][j];
        const double value = num / mass;
        double var = 0.0;
        for (std::size_t j = 0; j < draws.size(); ++j) {
            const double infl = (per_draw[k][j] - value) * rho[j] / wbar;
            var += infl * infl;
        }
        var /= std::max(1.0, nmc - 1.0);
        out.values[k] = value;
        out.std_errors[k] = std::sqrt(var / nmc);
    }
    out.budget = draws.size();
    return out;
}

// points per axis that integrate the given polynomials exactly, with margin
inline std::size_t exact_points(const std::vector<const Polynomial*>& polys) {
    int per_axis = 0;
    for (const auto* p : polys) per_axis = std::max(per_axis, p->max_axis_degree());
    return static_cast<std::size_t>(per_axis / 2 + 2);
}

inline double default_tolerance(const VerifyOptions& opt, bool weighted) {
    if (opt.tolerance > 0.0) return opt.tolerance;
    if (opt.method == gauss::Method::mc) return 0.0; // replaced by 3 se downstream
    return weighted ? 1e-6 : 1e-9;
}

// ---- digests ----

inline void add_function(DigestBuilder& d, const ops::SmoothFunction& f) {
    d.add(f.family_tag).add(static_cast<int>(f.dim));
    Eigen::VectorXd probe(f.dim);
    for (int k = 0; k < 3; ++k) {
        for (Eigen::Index i = 0; i < f.dim; ++i)
            probe[i] = 0.1 * (k + 1) * (((i + k) % 3) - 1.0);
        d.add(f.value(probe));
    }
}

inline void add_model(DigestBuilder& d, const ops::GalerkinModel& m) {
    d.add(static_cast<int>(m.n));
    for (Eigen::Index i = 0; i < m.n; ++i) d.add(m.q1[i]).add(m.q2[i]);
    for (Eigen::Index i = 0; i < m.n; ++i)
        for (Eigen::Index j = 0; j < m.n; ++j)
            d.add(m.c(i, j)).add(m.k12(i, j)).add(m.k22(i, j));
}

inline void add_potential(DigestBuilder& d, const pot::Potential* p) {
    if (!p) {
        d.add(std::string{"none"});
        return;
    }
    d.add(p->name).add(static_cast<int>(p->dim));
    Eigen::VectorXd probe = Eigen::VectorXd::Constant(p->dim, 0.37);
    d.add(p->value(probe));
}

struct TermSet {
    std::vector<gauss::Integrand> lhs;
    std::vector<gauss::Integrand> rhs;
};

/// Evaluate a term set plus the residual in one sweep and fill a report.
inline IdentityReport run_check(const std::string& tag, CheckKind kind, const TermSet& terms,
                                const Eigen::VectorXd& variances, const pot::Potential* p,
                                Eigen::Index pot_dim, const VerifyOptions& opt,
                                std::size_t auto_points, double tol, DigestBuilder digest) {
    std::vector<gauss::Integrand> all = terms.lhs;
    all.insert(all.end(), terms.rhs.begin(), terms.rhs.end());
    all.push_back([lhs = terms.lhs, rhs = terms.rhs](const Eigen::VectorXd& z) {
        double v = 0.0;
        for (const auto& f : lhs) v += f(z);
        for (const auto& f : rhs) v -= f(z);
        return v;
    });
    const BatchResult batch = integrate_batch(all, variances, p, pot_dim, opt, auto_points);

    IdentityReport rep;
    rep.identity_tag = tag;
    rep.kind = kind;
    for (std::size_t i = 0; i < terms.lhs.size(); ++i) rep.lhs += batch.values[i];
    for (std::size_t i = 0; i < terms.rhs.size(); ++i)
        rep.rhs += batch.values[terms.lhs.size() + i];
    rep.method = gauss::to_string(opt.method);
    rep.budget = batch.budget;
    rep.seed = opt.seed;
    rep.n = static_cast<int>(pot_dim);
    if (opt.method == gauss::Method::mc) {
        const double se = batch.std_errors.back();
        rep.tolerance = tol > 0.0 ? tol : 3.0 * se + 1e-12;
    } else {
        rep.tolerance = tol;
    }
    digest.add(tag).add(rep.method).add(static_cast<std::uint64_t>(rep.budget)).add(rep.seed);
    rep.inputs_digest = digest.hex();
    rep.finalize();
    return rep;
}

inline const Polynomial& require_poly(const ops::SmoothFunction& f, const char* who) {
    if (!f.poly)
        throw precondition_error(std::string(who) +
                                 ": test function must carry its polynomial form");
    return *f.poly;
}

inline gauss::Integrand eval_of(const Polynomial& p) {
    return [p](const Eigen::VectorXd& z) { return p(z); };
}

} // namespace detail

// ---------------------------------------------------------------------------
// Gaussian integration by parts, with and without a reweighting potential.
// ---------------------------------------------------------------------------
inline IdentityReport verify_ibp(const ops::SmoothFunction& f, const ops::SmoothFunction& g,
                                 Eigen::Index axis, const gauss::ProjectedGaussian& gm,
                                 const pot::Potential* p, const VerifyOptions& opt = {}) {
    if (axis < 0 || axis >= gm.dim()) throw invalid_argument("verify_ibp: axis out of range");
    if (f.dim != gm.dim() || g.dim != gm.dim())
        throw invalid_argument("verify_ibp: dimension mismatch");
    const double lam = gm.variance(axis);

    detail::TermSet terms;
    terms.lhs.push_back(
        [f, g, axis](const Eigen::VectorXd& z) { return f.gradient(z)[axis] * g.value(z); });
    terms.rhs.push_back(
        [f, g, axis](const Eigen::VectorXd& z) { return -f.value(z) * g.gradient(z)[axis]; });
    terms.rhs.push_back([f, g, axis, lam](const Eigen::VectorXd& z) {
        return z[axis] / lam * f.value(z) * g.value(z);
    });
    if (p) {
        terms.rhs.push_back([f, g, axis, p](const Eigen::VectorXd& z) {
            return p->gradient(z)[axis] * f.value(z) * g.value(z);
        });
    }

    std::size_t auto_points = 12;
    if (f.poly && g.poly && !p) {
        const Polynomial prod = *f.poly * *g.poly;
        auto_points = static_cast<std::size_t>(prod.max_axis_degree() / 2 + 3);
    } else if (p) {
        auto_points = 24; // degree-doubled regime for the smooth density
    }
    const double tol = detail::default_tolerance(opt, p != nullptr || !(f.poly && g.poly));

    DigestBuilder dig;
    detail::add_function(dig, f);
    detail::add_function(dig, g);
    detail::add_potential(dig, p);
    dig.add(static_cast<int>(axis));
    auto rep = detail::run_check(p ? "ibp-weighted" : "ibp", CheckKind::equality, terms,
                                 gm.variances(), p, gm.dim(), opt, auto_points, tol, dig);
    rep.degree = f.poly ? f.poly->total_degree() : -1;
    return rep;
}

// ---------------------------------------------------------------------------
// Dirichlet form of the perturbed Ornstein-Uhlenbeck generator:
// int (Nf) g  = - int <c Df, Dg>  under the reweighted measure.
// ---------------------------------------------------------------------------
inline IdentityReport verify_dirichlet_form(const ops::SmoothFunction& f,
                                            const ops::SmoothFunction& g,
                                            const ops::GalerkinModel& m,
                                            const pot::Potential& p,
                                            const VerifyOptions& opt = {}) {
    if (f.dim != m.n || g.dim != m.n)
        throw invalid_argument("verify_dirichlet_form: dimension mismatch");

    detail::TermSet terms;
    terms.lhs.push_back([&m, &p, f, g](const Eigen::VectorXd& x) {
        return ops::perturbed_ou_apply(m, p, f, x) * g.value(x);
    });
    Eigen::MatrixXd c = m.c;
    terms.rhs.push_back([c, f, g](const Eigen::VectorXd& x) {
        return -(c * f.gradient(x)).dot(g.gradient(x));
    });

    const bool weighted = p.name != "zero";
    std::size_t auto_points = 12;
    if (f.poly && g.poly) {
        const int deg = f.poly->max_axis_degree() + g.poly->max_axis_degree();
        auto_points = static_cast<std::size_t>(deg / 2 + 3);
        if (weighted) auto_points *= 2;
    } else if (weighted) {
        auto_points = 24;
    }
    const double tol = detail::default_tolerance(opt, weighted || !(f.poly && g.poly));

    DigestBuilder dig;
    detail::add_model(dig, m);
    detail::add_function(dig, f);
    detail::add_function(dig, g);
    detail::add_potential(dig, &p);
    auto rep = detail::run_check("dirichlet-form", CheckKind::equality, terms, m.q1,
                                 weighted ? &p : nullptr, m.n, opt, auto_points, tol, dig);
    rep.degree = f.poly ? f.poly->total_degree() : -1;
    return rep;
}

// ---------------------------------------------------------------------------
// First/second-order regularity identities for the unperturbed generator,
// plus the coercivity bound (1/lambda_1) |c Df|^2 <= |q1^{-1/2} c Df|^2.
// Test functions must be polynomial so that derivatives of g = alpha f - N0 f
// are available symbolically.
// ---------------------------------------------------------------------------
inline std::vector<IdentityReport> verify_reg_ou(const ops::SmoothFunction& fs, double alpha,
                                                 const ops::GalerkinModel& m,
                                                 const VerifyOptions& opt = {}) {
    const Polynomial& f = detail::require_poly(fs, "verify_reg_ou");
    if (static_cast<Eigen::Index>(f.dim()) != m.n)
        throw invalid_argument("verify_reg_ou: dimension mismatch");
    if (!(alpha > 0.0)) throw invalid_argument("verify_reg_ou: alpha must be positive");
    const auto n = static_cast<std::size_t>(m.n);

    using detail::PolyVec;
    const PolyVec df = detail::gradient_block(f, 0, n);
    const PolyVec cdf = detail::mat_apply(m.c, df);
    const Polynomial n0f = detail::poly_ou(m, f);
    const Polynomial g = f * alpha - n0f;
    const PolyVec dg = detail::gradient_block(g, 0, n);

    const Polynomial t_ff = f * f;
    const Polynomial t_cdf_df = detail::dot(cdf, df);
    const Polynomial t_gf = g * f;
    const Polynomial t_q = detail::dot_diag(cdf, m.q1_inv(), cdf);
    const Polynomial t_tr2 = detail::trace_square(m.c, f, 0);
    const Polynomial t_dg_cdf = detail::dot(dg, cdf);
    const Polynomial t_n0sq = n0f * n0f;
    const Polynomial t_cdf_sq = detail::dot(cdf, cdf);

    const std::size_t auto_points = detail::exact_points(
        {&t_ff, &t_cdf_df, &t_gf, &t_q, &t_tr2, &t_dg_cdf, &t_n0sq, &t_cdf_sq});
    const double tol = detail::default_tolerance(opt, false);

    DigestBuilder base;
    detail::add_model(base, m);
    detail::add_function(base, fs);
    base.add(alpha);

    std::vector<IdentityReport> out;
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_ff * alpha));
        t.lhs.push_back(detail::eval_of(t_cdf_df));
        t.rhs.push_back(detail::eval_of(t_gf));
        out.push_back(detail::run_check("ou-reg-first-order", CheckKind::equality, t, m.q1,
                                        nullptr, m.n, opt, auto_points, tol, base));
    }
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_cdf_df * alpha));
        t.lhs.push_back(detail::eval_of(t_q));
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.rhs.push_back(detail::eval_of(t_dg_cdf));
        out.push_back(detail::run_check("ou-reg-second-order", CheckKind::equality, t, m.q1,
                                        nullptr, m.n, opt, auto_points, tol, base));
    }
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_q));
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.rhs.push_back(detail::eval_of(t_n0sq));
        out.push_back(detail::run_check("ou-reg-squares", CheckKind::equality, t, m.q1, nullptr,
                                        m.n, opt, auto_points, tol, base));
    }
    {
        detail::TermSet t;
        const double lam1 = m.q1.maxCoeff();
        t.lhs.push_back(detail::eval_of(t_cdf_sq * (1.0 / lam1)));
        t.rhs.push_back(detail::eval_of(t_q));
        out.push_back(detail::run_check("ou-coercivity", CheckKind::bound, t, m.q1, nullptr,
                                        m.n, opt, auto_points,
                                        opt.tolerance > 0.0 ? opt.tolerance : 1e-10, base));
    }
    for (auto& r : out) r.degree = f.total_degree();
    return out;
}

// ---------------------------------------------------------------------------
// Regularity identities for the gradient-perturbed generator under the
// reweighted measure; requires a potential Hessian.
// ---------------------------------------------------------------------------
inline std::vector<IdentityReport> verify_reg_perturbed(const ops::SmoothFunction& fs,
                                                        double alpha,
                                                        const ops::GalerkinModel& m,
                                                        const pot::Potential& p,
                                                        const VerifyOptions& opt = {}) {
    const Polynomial& f = detail::require_poly(fs, "verify_reg_perturbed");
    if (static_cast<Eigen::Index>(f.dim()) != m.n)
        throw invalid_argument("verify_reg_perturbed: dimension mismatch");
    if (!p.has_hessian())
        throw precondition_error("verify_reg_perturbed: potential must provide a Hessian");
    const auto n = static_cast<std::size_t>(m.n);

    using detail::PolyVec;
    const PolyVec df = detail::gradient_block(f, 0, n);
    const PolyVec cdf = detail::mat_apply(m.c, df);
    const Polynomial n0f = detail::poly_ou(m, f);
    const PolyVec dn0f = detail::gradient_block(n0f, 0, n);
    const Polynomial t_q = detail::dot_diag(cdf, m.q1_inv(), cdf);
    const Polynomial t_tr2 = detail::trace_square(m.c, f, 0);
    const Polynomial t_cdf_df = detail::dot(cdf, df);
    const Polynomial t_ff = f * f;

    // pointwise pieces that involve the potential
    auto cdf_at = [cdf, n](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = cdf[i](x);
        return v;
    };
    auto nf_at = [&p, n0f, cdf_at](const Eigen::VectorXd& x) {
        return n0f(x) - p.gradient(x).dot(cdf_at(x));
    };
    auto g_at = [alpha, f, nf_at](const Eigen::VectorXd& x) { return alpha * f(x) - nf_at(x); };

    // Dg = alpha Df - D(N0 f) + D2Phi c Df + D2f c DPhi
    Eigen::MatrixXd cmat = m.c;
    auto dg_full = [alpha, df, dn0f, &p, fs, cdf_at, cmat, n](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        const Eigen::VectorXd hcd = p.hessian(x) * cdf_at(x);
        const Eigen::VectorXd hfc = fs.hessian(x) * (cmat * p.gradient(x));
        for (std::size_t i = 0; i < n; ++i)
            v[static_cast<Eigen::Index>(i)] =
                alpha * df[i](x) - dn0f[i](x) + hcd[static_cast<Eigen::Index>(i)] +
                hfc[static_cast<Eigen::Index>(i)];
        return v;
    };

    const std::size_t base_points = std::max<std::size_t>(
        detail::exact_points({&t_ff, &t_cdf_df, &t_q, &t_tr2}) * 4, 24);
    const double tol = detail::default_tolerance(opt, true);

    DigestBuilder base;
    detail::add_model(base, m);
    detail::add_function(base, fs);
    detail::add_potential(base, &p);
    base.add(alpha);

    std::vector<IdentityReport> out;
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_ff * alpha));
        t.lhs.push_back(detail::eval_of(t_cdf_df));
        t.rhs.push_back([g_at, f](const Eigen::VectorXd& x) { return g_at(x) * f(x); });
        out.push_back(detail::run_check("ou-reg-potential-first-order", CheckKind::equality, t,
                                        m.q1, &p, m.n, opt, base_points, tol, base));
    }
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_cdf_df * alpha));
        t.lhs.push_back(detail::eval_of(t_q));
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.lhs.push_back([&p, cdf_at](const Eigen::VectorXd& x) {
            const Eigen::VectorXd v = cdf_at(x);
            return (p.hessian(x) * v).dot(v);
        });
        t.rhs.push_back([dg_full, cdf_at](const Eigen::VectorXd& x) {
            return dg_full(x).dot(cdf_at(x));
        });
        out.push_back(detail::run_check("ou-reg-potential-second-order", CheckKind::equality, t,
                                        m.q1, &p, m.n, opt, base_points, tol, base));
    }
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_q));
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.lhs.push_back([&p, cdf_at](const Eigen::VectorXd& x) {
            const Eigen::VectorXd v = cdf_at(x);
            return (p.hessian(x) * v).dot(v);
        });
        t.rhs.push_back([nf_at](const Eigen::VectorXd& x) {
            const double v = nf_at(x);
            return v * v;
        });
        out.push_back(detail::run_check("ou-reg-potential-squares", CheckKind::equality, t, m.q1,
                                        &p, m.n, opt, base_points, tol, base));
    }
    for (auto& r : out) r.degree = f.total_degree();
    return out;
}

// ---------------------------------------------------------------------------
// One-sided resolvent bounds for convex potentials: the 1/alpha bound on the
// first-order form and the factor-4 bound on the second-order terms.
// ---------------------------------------------------------------------------
inline std::vector<IdentityReport> verify_reg_bounds(const ops::SmoothFunction& fs, double alpha,
                                                     const ops::GalerkinModel& m,
                                                     const pot::Potential& p,
                                                     const VerifyOptions& opt = {}) {
    const Polynomial& f = detail::require_poly(fs, "verify_reg_bounds");
    if (!p.convex) throw precondition_error("verify_reg_bounds: potential must be convex");
    const auto n = static_cast<std::size_t>(m.n);

    using detail::PolyVec;
    const PolyVec df = detail::gradient_block(f, 0, n);
    const PolyVec cdf = detail::mat_apply(m.c, df);
    const Polynomial n0f = detail::poly_ou(m, f);
    const Polynomial t_ff = f * f;
    const Polynomial t_cdf_df = detail::dot(cdf, df);
    const Polynomial t_q = detail::dot_diag(cdf, m.q1_inv(), cdf);
    const Polynomial t_tr2 = detail::trace_square(m.c, f, 0);

    auto cdf_at = [cdf, n](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = cdf[i](x);
        return v;
    };
    auto gsq_at = [alpha, f, n0f, &p, cdf_at](const Eigen::VectorXd& x) {
        const double g = alpha * f(x) - n0f(x) + p.gradient(x).dot(cdf_at(x));
        return g * g;
    };

    const std::size_t base_points = std::max<std::size_t>(
        detail::exact_points({&t_ff, &t_cdf_df, &t_q, &t_tr2}) * 4, 24);
    const double tol = opt.tolerance > 0.0 ? opt.tolerance : 1e-10;

    DigestBuilder base;
    detail::add_model(base, m);
    detail::add_function(base, fs);
    detail::add_potential(base, &p);
    base.add(alpha);

    std::vector<IdentityReport> out;
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_ff * alpha));
        t.lhs.push_back(detail::eval_of(t_cdf_df));
        t.rhs.push_back([gsq_at, alpha](const Eigen::VectorXd& x) { return gsq_at(x) / alpha; });
        out.push_back(detail::run_check("ou-reg-bound-resolvent", CheckKind::bound, t, m.q1, &p,
                                        m.n, opt, base_points, tol, base));
    }
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.lhs.push_back(detail::eval_of(t_q));
        t.rhs.push_back([gsq_at](const Eigen::VectorXd& x) { return 4.0 * gsq_at(x); });
        out.push_back(detail::run_check("ou-reg-bound-energy", CheckKind::bound, t, m.q1, &p,
                                        m.n, opt, base_points, tol, base));
    }
    for (auto& r : out) r.degree = f.total_degree();
    return out;
}

// ---------------------------------------------------------------------------
// Kinetic regularity identities (zero potential) and the coercivity chain.
// ---------------------------------------------------------------------------
inline std::vector<IdentityReport> verify_kinetic_reg(const ops::SmoothFunction& fs, double alpha,
                                                      const ops::GalerkinModel& m,
                                                      const VerifyOptions& opt = {}) {
    const Polynomial& f = detail::require_poly(fs, "verify_kinetic_reg");
    if (static_cast<Eigen::Index>(f.dim()) != 2 * m.n)
        throw invalid_argument("verify_kinetic_reg: phase-space dimension mismatch");
    const auto n = static_cast<std::size_t>(m.n);

    using detail::PolyVec;
    const PolyVec d1 = detail::gradient_block(f, 0, n);
    const PolyVec d2 = detail::gradient_block(f, n, n);
    const PolyVec k22d2 = detail::mat_apply(m.k22, d2);
    const PolyVec k21d2 = detail::mat_apply(m.k21, d2);
    const PolyVec k12d1 = detail::mat_apply(m.k12, d1);
    const Polynomial lf = detail::poly_kinetic(m, f);
    const Polynomial g = f * alpha - lf;
    const PolyVec d1g = detail::gradient_block(g, 0, n);
    const PolyVec d2g = detail::gradient_block(g, n, n);

    PolyVec mixed; // k22 d2 f - k12 d1 f
    for (std::size_t i = 0; i < n; ++i) mixed.push_back(k22d2[i] - k12d1[i]);

    // Cross term left over from the symmetric/antisymmetric splitting of the
    // differentiated resolvent equations:
    //   -2 sum_ij K12(i,j) int A(d_{i,2} f) d_{j,1} f dmu.
    // It vanishes when f depends on x or y alone but not in general; without
    // it the second-order identity has O(1) residuals already for f = x y.
    auto transport_poly = [&](const Polynomial& u) {
        return detail::coord_dot_diag(0, m.q1_inv(),
                                      detail::mat_apply(m.k21, detail::gradient_block(u, n, n))) -
               detail::coord_dot_diag(n, m.q2_inv(),
                                      detail::mat_apply(m.k12, detail::gradient_block(u, 0, n)));
    };
    Polynomial cross(2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (m.k12(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0)
                cross += transport_poly(d2[i]) * d1[j] *
                         (-2.0 * m.k12(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));

    const Polynomial t_ff = f * f;
    const Polynomial t_k22 = detail::dot(k22d2, d2);
    const Polynomial t_fg = f * g;
    const Polynomial t_q1 = detail::dot_diag(k21d2, m.q1_inv(), k21d2);
    const Polynomial t_q2 = detail::dot_diag(mixed, m.q2_inv(), mixed);
    const Polynomial t_tr2 = detail::trace_square(m.k22, f, n);
    const Polynomial t_rhs2 =
        detail::dot(k22d2, d2g) - detail::dot(k12d1, d2g) + detail::dot(k21d2, d1g);
    const Polynomial t_lfsq = lf * lf;
    const Polynomial t_k21sq = detail::dot(k21d2, k21d2);

    Eigen::VectorXd variances(2 * m.n);
    variances << m.q1, m.q2;

    const std::size_t auto_points = detail::exact_points(
        {&t_ff, &t_k22, &t_fg, &t_q1, &t_q2, &t_tr2, &t_rhs2, &t_lfsq, &t_k21sq, &cross});
    const double tol = detail::default_tolerance(opt, false);

    DigestBuilder base;
    detail::add_model(base, m);
    detail::add_function(base, fs);
    base.add(alpha);

    std::vector<IdentityReport> out;
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_ff * alpha));
        t.lhs.push_back(detail::eval_of(t_k22));
        t.rhs.push_back(detail::eval_of(t_fg));
        out.push_back(detail::run_check("kinetic-reg-first-order", CheckKind::equality, t,
                                        variances, nullptr, m.n, opt, auto_points, tol, base));
    }
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_k22 * alpha));
        t.lhs.push_back(detail::eval_of(t_q1));
        t.lhs.push_back(detail::eval_of(t_q2));
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.lhs.push_back(detail::eval_of(cross));
        t.rhs.push_back(detail::eval_of(t_rhs2));
        out.push_back(detail::run_check("kinetic-reg-second-order", CheckKind::equality, t,
                                        variances, nullptr, m.n, opt, auto_points, tol, base));
    }
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_q1));
        t.lhs.push_back(detail::eval_of(t_q2));
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.lhs.push_back(detail::eval_of(cross));
        t.rhs.push_back(detail::eval_of(t_lfsq));
        out.push_back(detail::run_check("kinetic-reg-squares", CheckKind::equality, t, variances,
                                        nullptr, m.n, opt, auto_points, tol, base));
    }
    const double bound_tol = opt.tolerance > 0.0 ? opt.tolerance : 1e-10;
    {
        detail::TermSet t;
        const double nu1 = m.q2.maxCoeff();
        t.lhs.push_back(detail::eval_of(t_k21sq * (1.0 / nu1)));
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.rhs.push_back(detail::eval_of(t_q1));
        t.rhs.push_back(detail::eval_of(t_tr2));
        out.push_back(detail::run_check("kinetic-coercivity-lower", CheckKind::bound, t,
                                        variances, nullptr, m.n, opt, auto_points, bound_tol,
                                        base));
    }
    {
        detail::TermSet t;
        t.lhs.push_back(detail::eval_of(t_q1));
        t.lhs.push_back(detail::eval_of(t_tr2));
        t.rhs.push_back(detail::eval_of(t_lfsq));
        out.push_back(detail::run_check("kinetic-coercivity-upper", CheckKind::bound, t,
                                        variances, nullptr, m.n, opt, auto_points, bound_tol,
                                        base));
    }
    for (auto& r : out) r.degree = f.total_degree();
    return out;
}

// ---------------------------------------------------------------------------
// Invariance of the product measure: int L_Phi f d(mu^Phi) = 0.
// ---------------------------------------------------------------------------
inline IdentityReport verify_invariance(const ops::SmoothFunction& f, const ops::GalerkinModel& m,
                                        const pot::Potential& p, const VerifyOptions& opt = {}) {
    if (f.dim != 2 * m.n) throw invalid_argument("verify_invariance: dimension mismatch");

    detail::TermSet terms;
    terms.lhs.push_back([&m, &p, f](const Eigen::VectorXd& z) {
        const Eigen::Index n = m.n;
        return ops::langevin_apply(m, p, f, z.head(n), z.tail(n));
    });
    terms.rhs.push_back([](const Eigen::VectorXd&) { return 0.0; });

    Eigen::VectorXd variances(2 * m.n);
    variances << m.q1, m.q2;
    const bool weighted = p.name != "zero";
    std::size_t auto_points = 12;
    if (f.poly) auto_points = static_cast<std::size_t>(f.poly->max_axis_degree() / 2 + 3);
    if (weighted) auto_points = std::max<std::size_t>(2 * auto_points, 16);
    const double tol = detail::default_tolerance(opt, weighted || !f.poly);

    DigestBuilder dig;
    detail::add_model(dig, m);
    detail::add_function(dig, f);
    detail::add_potential(dig, &p);
    auto rep = detail::run_check("invariance", CheckKind::equality, terms, variances,
                                 weighted ? &p : nullptr, m.n, opt, auto_points, tol, dig);
    rep.degree = f.poly ? f.poly->total_degree() : -1;
    return rep;
}

// ---------------------------------------------------------------------------
// Antisymmetry of the transport part in the reweighted inner product:
// int (A f) g + int f (A g) = 0.
// ---------------------------------------------------------------------------
inline IdentityReport verify_antisymmetry(const ops::SmoothFunction& f,
                                          const ops::SmoothFunction& g,
                                          const ops::GalerkinModel& m, const pot::Potential& p,
                                          const VerifyOptions& opt = {}) {
    if (f.dim != 2 * m.n || g.dim != 2 * m.n)
        throw invalid_argument("verify_antisymmetry: dimension mismatch");

    detail::TermSet terms;
    terms.lhs.push_back([&m, &p, f, g](const Eigen::VectorXd& z) {
        const Eigen::Index n = m.n;
        return ops::transport_apply(m, p, f, z.head(n), z.tail(n)) * g.value(z);
    });
    terms.lhs.push_back([&m, &p, f, g](const Eigen::VectorXd& z) {
        const Eigen::Index n = m.n;
        return f.value(z) * ops::transport_apply(m, p, g, z.head(n), z.tail(n));
    });
    terms.rhs.push_back([](const Eigen::VectorXd&) { return 0.0; });

    Eigen::VectorXd variances(2 * m.n);
    variances << m.q1, m.q2;
    const bool weighted = p.name != "zero";
    std::size_t auto_points = 12;
    if (f.poly && g.poly)
        auto_points = static_cast<std::size_t>(
            (f.poly->max_axis_degree() + g.poly->max_axis_degree()) / 2 + 3);
    if (weighted) auto_points = std::max<std::size_t>(2 * auto_points, 16);
    const double tol = detail::default_tolerance(opt, weighted || !(f.poly && g.poly));

    DigestBuilder dig;
    detail::add_model(dig, m);
    detail::add_function(dig, f);
    detail::add_function(dig, g);
    detail::add_potential(dig, &p);
    auto rep = detail::run_check("antisymmetry", CheckKind::equality, terms, variances,
                                 weighted ? &p : nullptr, m.n, opt, auto_points, tol, dig);
    rep.degree = f.poly ? f.poly->total_degree() : -1;
    return rep;
}

// ---------------------------------------------------------------------------
// Perturbation-smallness precondition |DPhi|_inf^2 < 1/(4 nu_1).
// ---------------------------------------------------------------------------
inline IdentityReport verify_smallness(const pot::Potential& p, double nu1) {
    const auto rep = pot::check_smallness(p, nu1);
    IdentityReport out;
    out.identity_tag = "smallness";
    out.kind = CheckKind::bound;
    out.lhs = rep.grad_sup_norm_sq;
    out.rhs = rep.bound;
    out.method = "analytic";
    out.tolerance = 0.0;
    DigestBuilder dig;
    detail::add_potential(dig, &p);
    dig.add(nu1);
    out.inputs_digest = dig.hex();
    out.finalize();
    // strict inequality required: no tolerance slack on this one
    out.pass = rep.pass;
    return out;
}

} // namespace degenlab::verify
