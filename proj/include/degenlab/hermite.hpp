#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"

namespace degenlab {

/// Orthonormal probabilists' Hermite polynomials: h_0 = 1, h_1(z) = z,
/// h_{k+1} = (z h_k - sqrt(k) h_{k-1}) / sqrt(k+1). Orthonormal under N(0,1).
inline std::vector<double> hermite_values(std::size_t k_max, double z) {
    std::vector<double> h(k_max + 1);
    h[0] = 1.0;
    if (k_max >= 1) h[1] = z;
    for (std::size_t k = 1; k < k_max; ++k)
        h[k + 1] = (z * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) /
                   std::sqrt(static_cast<double>(k + 1));
    return h;
}

inline double hermite_value(std::size_t k, double z) { return hermite_values(k, z)[k]; }

/// First derivative: h_k' = sqrt(k) h_{k-1}.
inline double hermite_derivative(std::size_t k, double z) {
    if (k == 0) return 0.0;
    return std::sqrt(static_cast<double>(k)) * hermite_value(k - 1, z);
}

/// Second derivative: h_k'' = sqrt(k (k-1)) h_{k-2}.
inline double hermite_second_derivative(std::size_t k, double z) {
    if (k < 2) return 0.0;
    return std::sqrt(static_cast<double>(k * (k - 1))) * hermite_value(k - 2, z);
}

namespace spectral {

/// All multi-indices in N^dim with total degree <= max_total, graded
/// lexicographic: the zero index (constant function) comes first.
inline std::vector<std::vector<int>> total_degree_indices(std::size_t dim, int max_total) {
    if (dim == 0) throw invalid_argument("total_degree_indices: dim must be >= 1");
    if (max_total < 0) throw invalid_argument("total_degree_indices: negative degree");
    std::vector<std::vector<int>> out;
    std::vector<int> idx(dim, 0);
    for (int deg = 0; deg <= max_total; ++deg) {
        // enumerate all idx with sum == deg, lexicographically
        std::function<void(std::size_t, int)> rec = [&](std::size_t axis, int remaining) {
            if (axis + 1 == dim) {
                idx[axis] = remaining;
                out.push_back(idx);
                return;
            }
            for (int k = remaining; k >= 0; --k) {
                idx[axis] = k;
                rec(axis + 1, remaining - k);
            }
        };
        rec(0, deg);
    }
    return out;
}

/// Truncated Hermite orthonormal basis of L^2 for a centered Gaussian with
/// diagonal covariance: basis function alpha is the product over axes of
/// h_{alpha_i}(x_i / s_i), with s_i the per-axis standard deviation.
class HermiteBasis {
public:
    HermiteBasis(Eigen::VectorXd axis_scales, int max_total_degree)
        : scales_(std::move(axis_scales)), max_total_degree_(max_total_degree) {
        if (scales_.size() == 0) throw invalid_argument("HermiteBasis: empty scale vector");
        for (Eigen::Index i = 0; i < scales_.size(); ++i)
            if (!(scales_[i] > 0.0))
                throw invalid_argument("HermiteBasis: axis scales must be positive");
        indices_ = total_degree_indices(static_cast<std::size_t>(scales_.size()),
                                        max_total_degree);
    }

    Eigen::Index dim() const noexcept { return scales_.size(); }
    int max_total_degree() const noexcept { return max_total_degree_; }
    std::size_t size() const noexcept { return indices_.size(); }
    const std::vector<std::vector<int>>& index_set() const noexcept { return indices_; }
    const Eigen::VectorXd& axis_scales() const noexcept { return scales_; }

    double value(std::size_t member, const Eigen::VectorXd& x) const {
        const auto& alpha = indices_.at(member);
        double v = 1.0;
        for (Eigen::Index i = 0; i < scales_.size(); ++i)
            v *= hermite_value(static_cast<std::size_t>(alpha[static_cast<std::size_t>(i)]),
                               x[i] / scales_[i]);
        return v;
    }

private:
    Eigen::VectorXd scales_;
    int max_total_degree_;
    std::vector<std::vector<int>> indices_;
};

} // namespace spectral
} // namespace degenlab
