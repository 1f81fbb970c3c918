#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "degenlab/errors.hpp"

namespace degenlab::gauss {

/// One-dimensional rule: nodes and weights.
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for the standard normal weight (probabilists'
/// convention): integrates polynomials of degree <= 2p-1 against N(0,1)
/// exactly, weights sum to 1. Golub-Welsch on the Jacobi matrix with
/// off-diagonal sqrt(k).
inline Rule1D gauss_hermite(std::size_t points) {
    if (points == 0) throw invalid_argument("gauss_hermite: points must be >= 1");
    const auto p = static_cast<Eigen::Index>(points);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd sub(p > 1 ? p - 1 : 0);
    for (Eigen::Index k = 1; k < p; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

    // orthonormal Hermite values h_0..h_points at z
    auto hvals = [points](double z) {
        std::vector<double> h(points + 1);
        h[0] = 1.0;
        if (points >= 1) h[1] = z;
        for (std::size_t k = 1; k < points; ++k)
            h[k + 1] = (z * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) /
                       std::sqrt(static_cast<double>(k + 1));
        return h;
    };

    Rule1D r;
    r.nodes.resize(points);
    r.weights.resize(points);
    for (Eigen::Index j = 0; j < p; ++j) {
        // Newton-polish the eigenvalue against h_p(z) = 0, then take the
        // Christoffel weight 1 / sum_{k<p} h_k(z)^2
        double z = es.eigenvalues()[j];
        for (int it = 0; it < 3; ++it) {
            const auto h = hvals(z);
            const double deriv = std::sqrt(static_cast<double>(points)) * h[points - 1];
            if (deriv == 0.0) break;
            z -= h[points] / deriv;
        }
        const auto h = hvals(z);
        double kern = 0.0;
        for (std::size_t k = 0; k < points; ++k) kern += h[k] * h[k];
        r.nodes[static_cast<std::size_t>(j)] = z;
        r.weights[static_cast<std::size_t>(j)] = 1.0 / kern;
    }
    return r;
}

/// Gauss-Legendre rule on [0,1] with unit total weight.
inline Rule1D gauss_legendre01(std::size_t points) {
    if (points == 0) throw invalid_argument("gauss_legendre01: points must be >= 1");
    const auto p = static_cast<Eigen::Index>(points);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd sub(p > 1 ? p - 1 : 0);
    for (Eigen::Index k = 1; k < p; ++k) {
        const double kk = static_cast<double>(k);
        sub[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    Rule1D r;
    r.nodes.resize(points);
    r.weights.resize(points);
    for (Eigen::Index j = 0; j < p; ++j) {
        // map [-1,1] -> [0,1]; normalized so the weights sum to 1
        r.nodes[static_cast<std::size_t>(j)] = 0.5 * (es.eigenvalues()[j] + 1.0);
        const double v0 = es.eigenvectors()(0, j);
        r.weights[static_cast<std::size_t>(j)] = v0 * v0;
    }
    return r;
}

/// Tensor quadrature rule against a projected Gaussian: axis i carries
/// Gauss-Hermite nodes scaled by sqrt(lambda_i). Weights are positive and sum
/// to 1; polynomials of per-axis degree <= exact_degree are integrated
/// exactly.
class QuadratureRule {
public:
    QuadratureRule(std::vector<Eigen::VectorXd> nodes, std::vector<double> weights,
                   int exact_degree)
        : nodes_(std::move(nodes)), weights_(std::move(weights)), exact_degree_(exact_degree) {}

    const std::vector<Eigen::VectorXd>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    int exact_degree() const noexcept { return exact_degree_; }
    std::size_t size() const noexcept { return weights_.size(); }

    double integrate(const std::function<double(const Eigen::VectorXd&)>& f) const {
        double s = 0.0;
        for (std::size_t j = 0; j < weights_.size(); ++j) s += weights_[j] * f(nodes_[j]);
        return s;
    }

private:
    std::vector<Eigen::VectorXd> nodes_;
    std::vector<double> weights_;
    int exact_degree_;
};

inline constexpr std::size_t kDefaultGridBudget = 10'000'000;

/// Tensor grid over per-axis scalings (sqrt of covariance eigenvalues).
inline QuadratureRule tensor_gauss_hermite(const std::vector<double>& axis_scales,
                                           std::size_t points_per_axis,
                                           std::size_t grid_budget = kDefaultGridBudget) {
    if (points_per_axis == 0)
        throw invalid_argument("tensor_gauss_hermite: points_per_axis must be >= 1");
    const std::size_t n = axis_scales.size();
    if (n == 0) throw invalid_argument("tensor_gauss_hermite: empty scale list");

    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (total > grid_budget / points_per_axis)
            throw resource_limit_error("tensor_gauss_hermite: grid exceeds node budget");
        total *= points_per_axis;
    }

    const Rule1D base = gauss_hermite(points_per_axis);
    std::vector<Eigen::VectorXd> nodes(total, Eigen::VectorXd(static_cast<Eigen::Index>(n)));
    std::vector<double> weights(total, 1.0);
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t j = 0; j < total; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            nodes[j][static_cast<Eigen::Index>(i)] = axis_scales[i] * base.nodes[idx[i]];
            weights[j] *= base.weights[idx[i]];
        }
        for (std::size_t i = 0; i < n; ++i) { // odometer increment
            if (++idx[i] < points_per_axis) break;
            idx[i] = 0;
        }
    }
    return QuadratureRule(std::move(nodes), std::move(weights),
                          static_cast<int>(2 * points_per_axis - 1));
}

} // namespace degenlab::gauss
