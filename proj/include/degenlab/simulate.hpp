#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "degenlab/errors.hpp"
#include "degenlab/expectation.hpp"
#include "degenlab/galerkin.hpp"
#include "degenlab/operators.hpp"
#include "degenlab/potential.hpp"
#include "degenlab/rng.hpp"
#include "degenlab/smooth_function.hpp"

namespace degenlab::sim {

constexpr double kPi = 3.14159265358979323846;

enum class Scheme { euler, semi_implicit };

inline std::string to_string(Scheme s) {
    return s == Scheme::euler ? "euler" : "semi-implicit";
}

/// Linear drift of one sine mode: with a = k^2 pi^2 the pair (u_k, v_k)
/// follows d(u,v) = [[0, a], [-a, -a]] (u,v) dt + (0, sqrt(2)) dW.
struct ModeBlock {
    double stiffness = 0.0;       // k^2 pi^2
    Eigen::Matrix2d drift;        // in (u, v) coordinates
    Eigen::Matrix2d propagator;   // exp(dt * drift), filled by the integrator
    Eigen::Matrix2d noise_chol;   // exact increment covariance factor, (v, u) ordered
};

inline std::vector<ModeBlock> mode_coefficients(Eigen::Index n_modes) {
    if (n_modes < 1) throw invalid_argument("mode_coefficients: n_modes must be >= 1");
    std::vector<ModeBlock> blocks(static_cast<std::size_t>(n_modes));
    for (Eigen::Index k = 1; k <= n_modes; ++k) {
        auto& b = blocks[static_cast<std::size_t>(k - 1)];
        b.stiffness = static_cast<double>(k * k) * kPi * kPi;
        b.drift << 0.0, b.stiffness, -b.stiffness, -b.stiffness;
    }
    return blocks;
}

namespace detail {

/// Exact Gaussian transition of dz = B z dt + N dW over one step: propagator
/// exp(B h) and the increment covariance int_0^h exp(Bs) N N^T exp(B^T s) ds
/// via the Van Loan block-exponential.
inline void fill_discrete_transition(ModeBlock& b, double h) {
    b.propagator = (h * b.drift).exp();
    Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
    q(1, 1) = 2.0; // noise intensity sqrt(2) on the v-row
    Eigen::Matrix4d block = Eigen::Matrix4d::Zero();
    block.topLeftCorner<2, 2>() = -b.drift;
    block.topRightCorner<2, 2>() = q;
    block.bottomRightCorner<2, 2>() = b.drift.transpose();
    const Eigen::Matrix4d e = (h * block).exp();
    const Eigen::Matrix2d cov =
        e.bottomRightCorner<2, 2>().transpose() * e.topRightCorner<2, 2>();
    // factor in (v, u) ordering so the dominant sqrt(2h) component multiplies
    // the same normal draw an explicit Euler step consumes
    Eigen::Matrix2d cov_vu;
    cov_vu << cov(1, 1), cov(1, 0), cov(0, 1), cov(0, 0);
    Eigen::LLT<Eigen::Matrix2d> llt(0.5 * (cov_vu + cov_vu.transpose()));
    if (llt.info() != Eigen::Success)
        throw numerical_error("simulate: increment covariance not positive definite", 0.0);
    b.noise_chol = llt.matrixL();
}

} // namespace detail

struct SimConfig {
    Eigen::Index n_modes = 1;
    double dt = 1e-3;
    std::size_t steps = 1000;
    std::size_t ensemble = 100;
    Scheme scheme = Scheme::semi_implicit;
    const pot::Potential* potential = nullptr; // null: free dynamics
    std::uint64_t seed = 0;
    std::size_t burn_in = static_cast<std::size_t>(-1); // default: 20% of steps
    std::size_t output_stride = 0;                      // 0: about 200 frames
    unsigned workers = 1;
    double noise_scale = 1.0; // diagnostic switch; 0 gives the deterministic flow
    Eigen::VectorXd init_u;   // empty: start from the origin
    Eigen::VectorXd init_v;

    std::size_t effective_burn_in() const {
        return burn_in == static_cast<std::size_t>(-1) ? steps / 5 : burn_in;
    }
    std::size_t effective_stride() const {
        return output_stride > 0 ? output_stride : std::max<std::size_t>(1, steps / 200);
    }
};

inline void validate_config(const SimConfig& cfg) {
    if (cfg.n_modes < 1) throw invalid_argument("simulate: n_modes must be >= 1");
    if (!(cfg.dt > 0.0)) throw invalid_argument("simulate: dt must be positive");
    if (cfg.steps == 0) throw invalid_argument("simulate: steps must be >= 1");
    if (cfg.ensemble == 0) throw invalid_argument("simulate: ensemble must be >= 1");
    if (cfg.potential && cfg.potential->dim != cfg.n_modes)
        throw invalid_argument("simulate: potential dimension must equal n_modes");
    if (cfg.scheme == Scheme::euler) {
        const double stiff = static_cast<double>(cfg.n_modes * cfg.n_modes) * kPi * kPi;
        if (!(cfg.dt < 2.0 / (stiff + 1.0)))
            throw invalid_argument("simulate: euler scheme unstable at this dt; require dt < "
                                   "2/(n_modes^2 pi^2 + 1)");
    }
    if (cfg.init_u.size() != 0 && cfg.init_u.size() != cfg.n_modes)
        throw invalid_argument("simulate: init_u dimension mismatch");
    if (cfg.init_v.size() != 0 && cfg.init_v.size() != cfg.n_modes)
        throw invalid_argument("simulate: init_v dimension mismatch");
}

/// Per-member running sums of the post-burn-in first and second moments.
struct MomentAccumulator {
    Eigen::ArrayXd su, sv, suu, svv, suv;
    std::size_t count = 0;
};

struct TrajectoryEnsemble {
    std::vector<double> times;
    std::vector<std::vector<Eigen::VectorXd>> states; // [member][frame] -> (u, v) stacked
    std::vector<MomentAccumulator> member_moments;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::semi_implicit;
    double dt = 0.0;
    std::size_t steps = 0;
    std::size_t burn_in = 0;
    Eigen::Index n_modes = 0;
};

/// Spectral Galerkin integration of the degenerate mode system. Both schemes
/// consume two normal draws per mode per step from the same per-member
/// substream, so their paths are driven by identical increments and the
/// output never depends on the worker count.
inline TrajectoryEnsemble simulate(const SimConfig& cfg) {
    validate_config(cfg);
    const auto n = cfg.n_modes;
    auto blocks = mode_coefficients(n);
    for (auto& b : blocks) detail::fill_discrete_transition(b, cfg.dt);

    const std::size_t stride = cfg.effective_stride();
    const std::size_t burn = cfg.effective_burn_in();
    std::vector<double> times;
    times.push_back(0.0);
    for (std::size_t s = 1; s <= cfg.steps; ++s)
        if (s % stride == 0 || s == cfg.steps) times.push_back(static_cast<double>(s) * cfg.dt);

    TrajectoryEnsemble out;
    out.times = times;
    out.states.assign(cfg.ensemble, {});
    out.member_moments.assign(cfg.ensemble, {});
    out.seed = cfg.seed;
    out.scheme = cfg.scheme;
    out.dt = cfg.dt;
    out.steps = cfg.steps;
    out.burn_in = burn;
    out.n_modes = n;

    const Eigen::VectorXd u0 =
        cfg.init_u.size() ? cfg.init_u : Eigen::VectorXd::Zero(n).eval();
    const Eigen::VectorXd v0 =
        cfg.init_v.size() ? cfg.init_v : Eigen::VectorXd::Zero(n).eval();
    const double sqrt_noise = std::sqrt(2.0 * cfg.dt);

    auto run_member = [&](std::size_t member) {
        NormalStream rng(cfg.seed, member);
        Eigen::VectorXd u = u0, v = v0;
        auto& acc = out.member_moments[member];
        acc.su = acc.sv = acc.suu = acc.svv = acc.suv = Eigen::ArrayXd::Zero(n);
        auto& frames = out.states[member];
        frames.reserve(times.size());
        Eigen::VectorXd state(2 * n);
        state << u, v;
        frames.push_back(state);

        // gradient of the potential at the current position; refreshed after
        // each position update so each step costs one evaluation
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        if (cfg.potential) w = cfg.potential->gradient(u);

        for (std::size_t s = 1; s <= cfg.steps; ++s) {
            if (cfg.scheme == Scheme::euler) {
                for (Eigen::Index k = 0; k < n; ++k) {
                    const auto& b = blocks[static_cast<std::size_t>(k)];
                    const double z1 = rng.normal();
                    rng.normal(); // keep the stream aligned with the other scheme
                    const double du = b.stiffness * v[k] * cfg.dt;
                    const double dv =
                        (-b.stiffness * v[k] - b.stiffness * u[k] - w[k]) * cfg.dt +
                        cfg.noise_scale * sqrt_noise * z1;
                    u[k] += du;
                    v[k] += dv;
                }
                if (cfg.potential) w = cfg.potential->gradient(u);
            } else {
                // half kick, exact linear-Gaussian transition, half kick
                v -= 0.5 * cfg.dt * w;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const auto& b = blocks[static_cast<std::size_t>(k)];
                    const double z1 = rng.normal();
                    const double z2 = rng.normal();
                    const Eigen::Vector2d mean = b.propagator * Eigen::Vector2d(u[k], v[k]);
                    const Eigen::Vector2d xi_vu =
                        cfg.noise_scale * (b.noise_chol * Eigen::Vector2d(z1, z2));
                    u[k] = mean[0] + xi_vu[1];
                    v[k] = mean[1] + xi_vu[0];
                }
                if (cfg.potential) w = cfg.potential->gradient(u);
                v -= 0.5 * cfg.dt * w;
            }
            if (!u.allFinite() || !v.allFinite())
                throw numerical_error("simulate: non-finite state at step " + std::to_string(s),
                                      static_cast<double>(s));
            if (s > burn) {
                acc.su += u.array();
                acc.sv += v.array();
                acc.suu += u.array().square();
                acc.svv += v.array().square();
                acc.suv += (u.array() * v.array());
                ++acc.count;
            }
            if (s % stride == 0 || s == cfg.steps) {
                state << u, v;
                frames.push_back(state);
            }
        }
    };

    const unsigned workers = std::max(1u, cfg.workers);
    if (workers == 1 || cfg.ensemble < 2) {
        for (std::size_t mbr = 0; mbr < cfg.ensemble; ++mbr) run_member(mbr);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    for (std::size_t mbr = w; mbr < cfg.ensemble; mbr += workers)
                        run_member(mbr);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return out;
}

struct InvariantReport {
    int mode = 0; // 1-based
    double var_u = 0.0, var_v = 0.0, cov_uv = 0.0;
    double target_var_u = 0.0, target_var_v = 0.0, target_cov = 0.0;
    double z_var_u = 0.0, z_var_v = 0.0, z_cov = 0.0;
    std::size_t members = 0;
    std::size_t samples_per_member = 0;
};

/// Compare the empirical stationary moments of mode k against the invariant
/// measure: 1/(k^2 pi^2) for both variances and zero covariance in the free
/// case, or the reweighted position moments when a potential is given.
/// Standard errors come from the spread of per-member time averages.
inline InvariantReport invariant_check(const TrajectoryEnsemble& ens, int mode,
                                       const pot::Potential* potential = nullptr,
                                       std::size_t moment_points = 48) {
    if (mode < 1 || mode > ens.n_modes)
        throw invalid_argument("invariant_check: mode out of range");
    const auto k = static_cast<Eigen::Index>(mode - 1);
    const std::size_t members = ens.member_moments.size();
    if (members == 0 || ens.member_moments.front().count == 0)
        throw precondition_error("invariant_check: no post-burn-in samples");

    std::vector<double> vu(members), vv(members), cuv(members);
    for (std::size_t i = 0; i < members; ++i) {
        const auto& a = ens.member_moments[i];
        const double cnt = static_cast<double>(a.count);
        const double mu = a.su[k] / cnt, mv = a.sv[k] / cnt;
        vu[i] = a.suu[k] / cnt - mu * mu;
        vv[i] = a.svv[k] / cnt - mv * mv;
        cuv[i] = a.suv[k] / cnt - mu * mv;
    }
    auto mean_se = [members](const std::vector<double>& x) {
        double m = 0.0;
        for (double t : x) m += t;
        m /= static_cast<double>(members);
        double var = 0.0;
        for (double t : x) var += (t - m) * (t - m);
        var /= std::max<double>(1.0, static_cast<double>(members - 1));
        return std::pair<double, double>(m, std::sqrt(var / static_cast<double>(members)));
    };
    const auto [mu, su] = mean_se(vu);
    const auto [mv, sv] = mean_se(vv);
    const auto [mc, sc] = mean_se(cuv);

    InvariantReport rep;
    rep.mode = mode;
    rep.members = members;
    rep.samples_per_member = ens.member_moments.front().count;
    rep.var_u = mu;
    rep.var_v = mv;
    rep.cov_uv = mc;
    const double lambda_k = 1.0 / (static_cast<double>(mode * mode) * kPi * kPi);
    rep.target_var_v = lambda_k; // velocity marginal is never reweighted
    rep.target_cov = 0.0;
    if (!potential) {
        rep.target_var_u = lambda_k;
    } else {
        // position marginal of the reweighted measure, by quadrature
        auto g = gauss::ProjectedGaussian(Eigen::VectorXd::NullaryExpr(
            ens.n_modes, [&](Eigen::Index i) {
                return 1.0 / (static_cast<double>((i + 1) * (i + 1)) * kPi * kPi);
            }));
        gauss::ExpectationOptions opt;
        opt.points_per_axis = moment_points;
        auto m1 = gauss::weighted_expectation(
            [k](const Eigen::VectorXd& x) { return x[k]; }, g, potential, opt);
        auto m2 = gauss::weighted_expectation(
            [k](const Eigen::VectorXd& x) { return x[k] * x[k]; }, g, potential, opt);
        rep.target_var_u = m2.value - m1.value * m1.value;
    }
    rep.z_var_u = (rep.var_u - rep.target_var_u) / su;
    rep.z_var_v = (rep.var_v - rep.target_var_v) / sv;
    rep.z_cov = (rep.cov_uv - rep.target_cov) / sc;
    return rep;
}

struct GeneratorReport {
    double reference = 0.0; // pointwise generator value
    std::vector<double> horizons;
    std::vector<double> slopes;
    std::vector<double> std_errors;
    double band = 0.0;
    double weak_order_slope = 0.0;
    bool pass = false;
};

/// Short-horizon finite-difference estimate of the generator:
/// (E f(X_h) - f(x0,y0)) / h for h in {dt, 2dt, 4dt}, compared against the
/// pointwise kinetic operator. Pass iff the reference lies within the
/// O(h) + 3 sigma band of the h = dt quotient.
inline GeneratorReport generator_consistency(const SimConfig& cfg, const ops::SmoothFunction& f,
                                             const Eigen::VectorXd& x0,
                                             const Eigen::VectorXd& y0) {
    validate_config(cfg);
    if (f.dim != 2 * cfg.n_modes)
        throw invalid_argument("generator_consistency: function dimension mismatch");
    if (static_cast<double>(cfg.steps) * cfg.dt > 0.1 + 1e-12)
        throw precondition_error("generator_consistency: horizon steps*dt must be <= 0.1");

    auto model = ops::dirichlet_identity_model(cfg.n_modes);
    const pot::Potential zero = pot::zero_potential(cfg.n_modes);
    const pot::Potential& p = cfg.potential ? *cfg.potential : zero;

    GeneratorReport rep;
    rep.reference = ops::langevin_apply(model, p, f, x0, y0);
    const double f0 = f.value((Eigen::VectorXd(2 * cfg.n_modes) << x0, y0).finished());

    for (std::size_t mult : {1u, 2u, 4u}) {
        SimConfig run = cfg;
        run.steps = mult;
        run.burn_in = 0;
        run.output_stride = mult;
        run.init_u = x0;
        run.init_v = y0;
        run.seed = cfg.seed + mult; // independent ensembles per horizon
        const auto ens = simulate(run);
        const double h = static_cast<double>(mult) * cfg.dt;
        double sum = 0.0, sumsq = 0.0;
        for (const auto& frames : ens.states) {
            const double fv = f.value(frames.back());
            sum += fv;
            sumsq += fv * fv;
        }
        const double nmc = static_cast<double>(cfg.ensemble);
        const double mean = sum / nmc;
        const double var = std::max(0.0, sumsq / nmc - mean * mean);
        rep.horizons.push_back(h);
        rep.slopes.push_back((mean - f0) / h);
        rep.std_errors.push_back(std::sqrt(var / nmc) / h);
    }

    // |slope(2h) - slope(h)| estimates the O(h) error of slope(h); the factor
    // 1.5 covers the curvature the two-point difference cannot see
    rep.band = 1.5 * std::abs(rep.slopes[1] - rep.slopes[0]) +
               3.0 * (rep.std_errors[0] + rep.std_errors[1]);
    rep.pass = std::abs(rep.slopes[0] - rep.reference) <= rep.band;

    // least-squares slope of log|error| against log h
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < rep.horizons.size(); ++i) {
        const double err = std::max(std::abs(rep.slopes[i] - rep.reference), 1e-300);
        const double lx = std::log(rep.horizons[i]);
        const double ly = std::log(err);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double npts = static_cast<double>(rep.horizons.size());
    rep.weak_order_slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    return rep;
}

} // namespace degenlab::sim
