#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"
#include "degenlab/quadrature.hpp"
#include "degenlab/rng.hpp"
#include "degenlab/spectrum.hpp"

namespace degenlab::gauss {

/// Centered Gaussian on R^n with diagonal covariance, obtained by projecting
/// an infinite-dimensional Gaussian measure onto the span of its first n
/// covariance eigenvectors.
class ProjectedGaussian {
public:
    explicit ProjectedGaussian(Eigen::VectorXd variances) : variances_(std::move(variances)) {
        if (variances_.size() == 0)
            throw invalid_argument("ProjectedGaussian: dimension must be >= 1");
        for (Eigen::Index i = 0; i < variances_.size(); ++i)
            if (!(variances_[i] > 0.0))
                throw invalid_argument("ProjectedGaussian: covariance entries must be positive");
    }

    Eigen::Index dim() const noexcept { return variances_.size(); }
    const Eigen::VectorXd& variances() const noexcept { return variances_; }
    double variance(Eigen::Index i) const { return variances_[i]; }
    Eigen::MatrixXd covariance() const { return variances_.asDiagonal(); }

private:
    Eigen::VectorXd variances_;
};

inline ProjectedGaussian project_measure(const CovSpectrum& spectrum, std::size_t n) {
    if (n == 0) throw invalid_argument("project_measure: n must be >= 1");
    if (n > spectrum.size())
        throw invalid_argument("project_measure: spectrum has fewer than n eigenvalues");
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) v[static_cast<Eigen::Index>(k)] = spectrum.eigenvalues()[k];
    return ProjectedGaussian(std::move(v));
}

/// Second moment <Q l1, l2> of the coordinate functionals u -> (u,l1), (u,l2).
inline double moment2(const Eigen::VectorXd& l1, const Eigen::VectorXd& l2,
                      const ProjectedGaussian& g) {
    if (l1.size() != g.dim() || l2.size() != g.dim())
        throw invalid_argument("moment2: vector dimension mismatch");
    return l1.cwiseProduct(g.variances()).dot(l2);
}

/// Fourth moment by the Isserlis pairing formula.
inline double moment4(const Eigen::VectorXd& l1, const Eigen::VectorXd& l2,
                      const Eigen::VectorXd& l3, const Eigen::VectorXd& l4,
                      const ProjectedGaussian& g) {
    return moment2(l1, l2, g) * moment2(l3, l4, g) + moment2(l1, l3, g) * moment2(l2, l4, g) +
           moment2(l1, l4, g) * moment2(l2, l3, g);
}

/// i.i.d. draws from the projected Gaussian. The stream is split into fixed
/// chunks with independently derived substreams, so the output depends on the
/// seed only, never on how the chunks are scheduled.
inline std::vector<Eigen::VectorXd> sample(const ProjectedGaussian& g, std::size_t count,
                                           std::uint64_t seed) {
    std::vector<Eigen::VectorXd> out(count, Eigen::VectorXd(g.dim()));
    Eigen::VectorXd sd = g.variances().cwiseSqrt();
    const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
    for (std::size_t c = 0; c < chunks; ++c) {
        NormalStream rng(seed, c);
        const std::size_t begin = c * kSampleChunk;
        const std::size_t end = std::min(begin + kSampleChunk, count);
        for (std::size_t j = begin; j < end; ++j)
            for (Eigen::Index i = 0; i < g.dim(); ++i) out[j][i] = sd[i] * rng.normal();
    }
    return out;
}

/// Tensor Gauss-Hermite rule matched to the projected Gaussian.
inline QuadratureRule quadrature(const ProjectedGaussian& g, std::size_t points_per_axis,
                                 std::size_t grid_budget = kDefaultGridBudget) {
    std::vector<double> scales(static_cast<std::size_t>(g.dim()));
    for (Eigen::Index i = 0; i < g.dim(); ++i)
        scales[static_cast<std::size_t>(i)] = std::sqrt(g.variance(i));
    return tensor_gauss_hermite(scales, points_per_axis, grid_budget);
}

} // namespace degenlab::gauss
