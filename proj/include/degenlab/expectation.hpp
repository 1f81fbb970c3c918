#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"
#include "degenlab/gaussian.hpp"
#include "degenlab/potential.hpp"

namespace degenlab::gauss {

enum class Method { quadrature, mc };

inline std::string to_string(Method m) { return m == Method::quadrature ? "quadrature" : "mc"; }

struct Estimate {
    double value = 0.0;
    double error = 0.0;       // standard error (mc) or two-level difference (quadrature)
    Method method = Method::quadrature;
    std::size_t budget = 0;   // nodes or samples
    std::uint64_t seed = 0;
};

struct ExpectationOptions {
    Method method = Method::quadrature;
    std::size_t points_per_axis = 10;
    std::size_t mc_samples = 100'000;
    std::uint64_t seed = 0;
    std::size_t grid_budget = kDefaultGridBudget;
};

using Integrand = std::function<double(const Eigen::VectorXd&)>;

/// Expectation of f under the projected Gaussian, optionally reweighted by
/// exp(-Phi)/c_Phi. The normalizing constant is evaluated with the same nodes
/// or samples as the numerator, so the potential-free path and a zero
/// potential produce bit-identical results.
inline Estimate weighted_expectation(const Integrand& f, const ProjectedGaussian& g,
                                     const pot::Potential* potential,
                                     const ExpectationOptions& opt = {}) {
    if (potential) {
        if (potential->dim != g.dim())
            throw invalid_argument("weighted_expectation: potential dimension mismatch");
        if (!potential->lower_bound)
            throw precondition_error(
                "weighted_expectation: potential must declare a lower bound");
    }
    auto density = [&](const Eigen::VectorXd& x) {
        if (!potential) return 1.0;
        const double v = potential->value(x);
        if (std::isinf(v) && v > 0.0) return 0.0;
        return std::exp(-v);
    };

    Estimate est;
    est.method = opt.method;
    est.seed = opt.seed;

    if (opt.method == Method::quadrature) {
        auto run = [&](std::size_t points) {
            const QuadratureRule rule = quadrature(g, points, opt.grid_budget);
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < rule.size(); ++j) {
                const double w = rule.weights()[j];
                const double rho = density(rule.nodes()[j]);
                num += w * rho * f(rule.nodes()[j]);
                den += w * rho;
            }
            return num / den;
        };
        est.value = run(opt.points_per_axis);
        est.budget = 1;
        for (Eigen::Index i = 0; i < g.dim(); ++i) est.budget *= opt.points_per_axis;
        est.error = opt.points_per_axis >= 2
                        ? std::abs(est.value - run(opt.points_per_axis - 1))
                        : std::numeric_limits<double>::infinity();
        return est;
    }

    const auto draws = sample(g, opt.mc_samples, opt.seed);
    const std::size_t nmc = draws.size();
    if (nmc == 0) throw invalid_argument("weighted_expectation: mc_samples must be >= 1");
    Eigen::VectorXd fv(static_cast<Eigen::Index>(nmc)), rho(static_cast<Eigen::Index>(nmc));
    for (std::size_t j = 0; j < nmc; ++j) {
        fv[static_cast<Eigen::Index>(j)] = f(draws[j]);
        rho[static_cast<Eigen::Index>(j)] = density(draws[j]);
    }
    const double wbar = rho.mean();
    est.value = fv.cwiseProduct(rho).sum() / rho.sum();
    // linearized standard error of the self-normalized estimator
    const Eigen::VectorXd infl = (fv.array() - est.value).matrix().cwiseProduct(rho) / wbar;
    const double var = (infl.array() - infl.mean()).square().sum() /
                       std::max<double>(1.0, static_cast<double>(nmc - 1));
    est.error = std::sqrt(var / static_cast<double>(nmc));
    est.budget = nmc;
    return est;
}

} // namespace degenlab::gauss
