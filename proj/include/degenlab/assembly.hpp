#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "degenlab/errors.hpp"
#include "degenlab/galerkin.hpp"
#include "degenlab/hermite.hpp"
#include "degenlab/operators.hpp"
#include "degenlab/potential.hpp"
#include "degenlab/quadrature.hpp"

namespace degenlab::spectral {

inline constexpr std::size_t kDenseBasisBudget = 5000;

struct AssemblyRecord {
    std::size_t points_per_axis = 0;
    std::size_t nodes = 0;
    // two-level difference between the degree-doubled and the base rule;
    // only meaningful for weighted assemblies (zero when the integrands are
    // polynomial and the rule is exact)
    double two_level_error = 0.0;
};

/// Galerkin matrix of one operator on a truncated Hermite basis. `entries`
/// is the bilinear form <op b_j, b_i> under the (possibly reweighted)
/// Gaussian; `gram` is the corresponding basis Gram matrix, the identity in
/// the unweighted case.
struct OperatorMatrix {
    HermiteBasis basis;
    ops::OperatorKind kind = ops::OperatorKind::OU0;
    Eigen::MatrixXd entries;
    Eigen::MatrixXd gram;
    bool weighted = false;
    AssemblyRecord assembly;
};

inline HermiteBasis position_basis(const ops::GalerkinModel& m, int max_total_degree) {
    return HermiteBasis(m.q1.cwiseSqrt(), max_total_degree);
}

inline HermiteBasis phase_basis(const ops::GalerkinModel& m, int max_total_degree) {
    Eigen::VectorXd scales(2 * m.n);
    scales << m.q1.cwiseSqrt(), m.q2.cwiseSqrt();
    return HermiteBasis(scales, max_total_degree);
}

namespace detail {

/// Per-node evaluation of every basis member's value, gradient and Hessian,
/// accumulated into dense Galerkin sums in node chunks.
struct BasisEval {
    const HermiteBasis& basis;
    std::vector<std::vector<double>> hv, hd, he; // per axis, per degree tables

    explicit BasisEval(const HermiteBasis& b)
        : basis(b),
          hv(static_cast<std::size_t>(b.dim())),
          hd(static_cast<std::size_t>(b.dim())),
          he(static_cast<std::size_t>(b.dim())) {}

    void at_node(const Eigen::VectorXd& x) {
        const auto deg = static_cast<std::size_t>(basis.max_total_degree());
        for (Eigen::Index i = 0; i < basis.dim(); ++i) {
            const double s = basis.axis_scales()[i];
            const double z = x[i] / s;
            auto vals = hermite_values(deg, z);
            auto& v = hv[static_cast<std::size_t>(i)];
            auto& d = hd[static_cast<std::size_t>(i)];
            auto& e = he[static_cast<std::size_t>(i)];
            v.assign(deg + 1, 0.0);
            d.assign(deg + 1, 0.0);
            e.assign(deg + 1, 0.0);
            for (std::size_t k = 0; k <= deg; ++k) {
                v[k] = vals[k];
                if (k >= 1) d[k] = std::sqrt(static_cast<double>(k)) * vals[k - 1] / s;
                if (k >= 2)
                    e[k] = std::sqrt(static_cast<double>(k * (k - 1))) * vals[k - 2] / (s * s);
            }
        }
    }

    double value(const std::vector<int>& alpha) const {
        double v = 1.0;
        for (std::size_t i = 0; i < alpha.size(); ++i)
            v *= hv[i][static_cast<std::size_t>(alpha[i])];
        return v;
    }

    Eigen::VectorXd gradient(const std::vector<int>& alpha) const {
        const auto dim = alpha.size();
        Eigen::VectorXd g(static_cast<Eigen::Index>(dim));
        for (std::size_t a = 0; a < dim; ++a) {
            double t = hd[a][static_cast<std::size_t>(alpha[a])];
            for (std::size_t i = 0; i < dim; ++i)
                if (i != a) t *= hv[i][static_cast<std::size_t>(alpha[i])];
            g[static_cast<Eigen::Index>(a)] = t;
        }
        return g;
    }

    Eigen::MatrixXd hessian(const std::vector<int>& alpha) const {
        const auto dim = alpha.size();
        Eigen::MatrixXd h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                double t = 1.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    const auto k = static_cast<std::size_t>(alpha[i]);
                    if (i == a && i == b) t *= he[i][k];
                    else if (i == a || i == b) t *= hd[i][k];
                    else t *= hv[i][k];
                }
                h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = t;
                h(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = t;
            }
        }
        return h;
    }
};

/// Pointwise operator value for basis member alpha at a node, by kind.
inline double operator_value(ops::OperatorKind kind, const ops::GalerkinModel& m,
                             const pot::Potential* p, const BasisEval& ev,
                             const std::vector<int>& alpha, const Eigen::VectorXd& node,
                             const Eigen::VectorXd* pot_grad) {
    const Eigen::Index n = m.n;
    switch (kind) {
        case ops::OperatorKind::OU0:
        case ops::OperatorKind::OU: {
            const Eigen::VectorXd g = ev.gradient(alpha);
            const Eigen::MatrixXd h = ev.hessian(alpha);
            double v = (m.c * h).trace() - node.dot(m.q1_inv().asDiagonal() * (m.c * g));
            if (kind == ops::OperatorKind::OU && pot_grad) v -= pot_grad->dot(m.c * g);
            return v;
        }
        case ops::OperatorKind::Dissipation: {
            const Eigen::VectorXd g = ev.gradient(alpha);
            const Eigen::MatrixXd h = ev.hessian(alpha);
            const auto y = node.tail(n);
            return (m.k22 * h.bottomRightCorner(n, n)).trace() -
                   y.dot(m.q2_inv().asDiagonal() * (m.k22 * g.tail(n)));
        }
        case ops::OperatorKind::Transport: {
            const Eigen::VectorXd g = ev.gradient(alpha);
            const auto x = node.head(n);
            const auto y = node.tail(n);
            double v = x.dot(m.q1_inv().asDiagonal() * (m.k21 * g.tail(n))) -
                       y.dot(m.q2_inv().asDiagonal() * (m.k12 * g.head(n)));
            if (pot_grad) v += pot_grad->dot(m.k21 * g.tail(n));
            return v;
        }
        case ops::OperatorKind::Langevin: {
            return operator_value(ops::OperatorKind::Dissipation, m, p, ev, alpha, node,
                                  pot_grad) -
                   operator_value(ops::OperatorKind::Transport, m, p, ev, alpha, node, pot_grad);
        }
    }
    throw invalid_argument("operator_value: unknown kind");
}

struct RawAssembly {
    Eigen::MatrixXd entries;
    Eigen::MatrixXd gram;
};

inline RawAssembly assemble_with_rule(ops::OperatorKind kind, const ops::GalerkinModel& m,
                                      const pot::Potential* p, const HermiteBasis& basis,
                                      std::size_t points_per_axis, std::size_t grid_budget) {
    std::vector<double> scales(static_cast<std::size_t>(basis.dim()));
    for (Eigen::Index i = 0; i < basis.dim(); ++i)
        scales[static_cast<std::size_t>(i)] = basis.axis_scales()[i];
    const gauss::QuadratureRule rule =
        gauss::tensor_gauss_hermite(scales, points_per_axis, grid_budget);

    const auto nb = static_cast<Eigen::Index>(basis.size());
    const std::size_t chunk = 2048;
    Eigen::MatrixXd num = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nb, nb);
    double mass = 0.0;

    BasisEval ev(basis);
    Eigen::MatrixXd vals(chunk, nb), opvals(chunk, nb);
    Eigen::VectorXd wts(chunk);
    const bool needs_potential = p && (kind == ops::OperatorKind::OU ||
                                       kind == ops::OperatorKind::Transport ||
                                       kind == ops::OperatorKind::Langevin);

    std::size_t row = 0;
    auto flush = [&](std::size_t rows) {
        if (rows == 0) return;
        num.noalias() += vals.topRows(static_cast<Eigen::Index>(rows)).transpose() *
                         wts.head(static_cast<Eigen::Index>(rows)).asDiagonal() *
                         opvals.topRows(static_cast<Eigen::Index>(rows));
        gram.noalias() += vals.topRows(static_cast<Eigen::Index>(rows)).transpose() *
                          wts.head(static_cast<Eigen::Index>(rows)).asDiagonal() *
                          vals.topRows(static_cast<Eigen::Index>(rows));
    };

    for (std::size_t j = 0; j < rule.size(); ++j) {
        const Eigen::VectorXd& node = rule.nodes()[j];
        double rho = 1.0;
        std::optional<Eigen::VectorXd> pg;
        if (p) {
            // the density and the drift act on the position block only
            const Eigen::VectorXd x =
                basis.dim() == m.n ? node : node.head(m.n).eval();
            const double pv = p->value(x);
            rho = (std::isinf(pv) && pv > 0.0) ? 0.0 : std::exp(-pv);
            if (needs_potential) pg = p->gradient(x);
        }
        ev.at_node(node);
        const double w = rule.weights()[j] * rho;
        mass += w;
        wts[static_cast<Eigen::Index>(row)] = w;
        for (std::size_t b = 0; b < basis.size(); ++b) {
            const auto& alpha = basis.index_set()[b];
            vals(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(b)) = ev.value(alpha);
            opvals(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(b)) =
                operator_value(kind, m, p, ev, alpha, node, pg ? &*pg : nullptr);
        }
        if (++row == chunk) {
            flush(row);
            row = 0;
        }
    }
    flush(row);

    RawAssembly out;
    out.entries = num / mass;
    out.gram = gram / mass;
    return out;
}

} // namespace detail

struct AssembleOptions {
    std::size_t grid_budget = gauss::kDefaultGridBudget;
    // points per axis; 0 means derive from the basis degree (exact for the
    // polynomial integrands of the unweighted case)
    std::size_t points_per_axis = 0;
};

/// Galerkin projection of one operator onto the truncated Hermite basis. For
/// a reweighted measure the quadrature degree is doubled and the two-level
/// difference recorded; the basis is kept as the unweighted Hermite family,
/// so `gram` carries the frame's inner products.
inline OperatorMatrix assemble(ops::OperatorKind kind, const ops::GalerkinModel& m,
                               const pot::Potential* p, const HermiteBasis& basis,
                               const AssembleOptions& opt = {}) {
    const bool phase = kind == ops::OperatorKind::Dissipation ||
                       kind == ops::OperatorKind::Transport ||
                       kind == ops::OperatorKind::Langevin;
    if (basis.dim() != (phase ? 2 * m.n : m.n))
        throw invalid_argument("assemble: basis dimension incompatible with operator");
    if (basis.size() > kDenseBasisBudget)
        throw resource_limit_error("assemble: basis exceeds the dense-storage budget");
    if (p && !p->lower_bound)
        throw precondition_error("assemble: potential must declare a lower bound");

    // integrands have per-axis degree <= 2*max_total_degree + 1
    const std::size_t base_points =
        opt.points_per_axis > 0 ? opt.points_per_axis
                                : static_cast<std::size_t>(basis.max_total_degree()) + 2;
    const bool weighted = p != nullptr;

    OperatorMatrix out{basis, kind, {}, {}, weighted, {}};
    if (!weighted) {
        auto raw = detail::assemble_with_rule(kind, m, nullptr, basis, base_points,
                                              opt.grid_budget);
        out.entries = std::move(raw.entries);
        out.gram = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(basis.size()),
                                             static_cast<Eigen::Index>(basis.size()));
        out.assembly = {base_points, 0, 0.0};
    } else {
        // non-polynomial density: double the exactness rule twice over and
        // keep the coarse/fine gap as a (conservative) error estimate
        auto coarse =
            detail::assemble_with_rule(kind, m, p, basis, 2 * base_points, opt.grid_budget);
        auto fine =
            detail::assemble_with_rule(kind, m, p, basis, 4 * base_points, opt.grid_budget);
        out.entries = fine.entries;
        out.gram = fine.gram;
        out.assembly = {4 * base_points, 0,
                        (fine.entries - coarse.entries).cwiseAbs().maxCoeff()};
    }
    std::size_t nodes = 1;
    for (Eigen::Index i = 0; i < basis.dim(); ++i) nodes *= out.assembly.points_per_axis;
    out.assembly.nodes = nodes;

    if (!out.entries.allFinite())
        throw numerical_error("assemble: non-finite matrix entries", 0.0);
    return out;
}

struct DissipativityReport {
    double max_sym_eigenvalue = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Largest eigenvalue of the symmetric part; for weighted assemblies the
/// generalized problem with the Gram matrix is solved, so the value is the
/// worst Rayleigh quotient <Lf,f>/|f|^2 over the projected space.
inline DissipativityReport check_dissipativity(const OperatorMatrix& M, double tol) {
    DissipativityReport rep;
    rep.tolerance = tol;
    const Eigen::MatrixXd sym = 0.5 * (M.entries + M.entries.transpose());
    if (M.weighted) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, M.gram,
                                                                     Eigen::EigenvaluesOnly);
        rep.max_sym_eigenvalue = es.eigenvalues().maxCoeff();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
        rep.max_sym_eigenvalue = es.eigenvalues().maxCoeff();
    }
    rep.pass = rep.max_sym_eigenvalue <= tol;
    return rep;
}

/// Solve (alpha G - M) f = G g; with the identity Gram this is the plain
/// resolvent system (alpha I - M) f = g.
inline Eigen::VectorXd resolvent_solve(const OperatorMatrix& M, double alpha,
                                       const Eigen::VectorXd& g) {
    if (!(alpha > 0.0)) throw invalid_argument("resolvent_solve: alpha must be positive");
    if (g.size() != M.entries.rows())
        throw invalid_argument("resolvent_solve: coefficient dimension mismatch");
    const Eigen::MatrixXd lhs = alpha * M.gram - M.entries;
    const Eigen::VectorXd rhs = M.gram * g;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    const Eigen::VectorXd f = lu.solve(rhs);
    const double resid = (lhs * f - rhs).norm();
    if (!f.allFinite() || resid > 1e-10 * std::max(1.0, rhs.norm()))
        throw numerical_error(
            "resolvent_solve: singular or ill-conditioned system (inconsistent with projected "
            "dissipativity)",
            resid);
    return f;
}

/// exp(t M) f0 (with the Gram-corrected generator for weighted frames).
/// Contraction of the projected semigroup follows from the dissipativity of
/// the projected operator.
inline Eigen::VectorXd semigroup_apply(const OperatorMatrix& M, double t,
                                       const Eigen::VectorXd& f0) {
    if (t < 0.0) throw invalid_argument("semigroup_apply: t must be nonnegative");
    if (f0.size() != M.entries.rows())
        throw invalid_argument("semigroup_apply: coefficient dimension mismatch");
    if (t == 0.0) return f0;
    Eigen::MatrixXd gen = M.weighted
                              ? Eigen::MatrixXd(M.gram.llt().solve(M.entries))
                              : M.entries;
    const Eigen::MatrixXd e = (t * gen).exp();
    return e * f0;
}

} // namespace degenlab::spectral
