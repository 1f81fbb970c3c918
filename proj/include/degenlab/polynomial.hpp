#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "degenlab/errors.hpp"

namespace degenlab {

/// Dense-exponent multivariate polynomial with real coefficients. Small by
/// construction (desk-scale dimensions and degrees), so a sorted map from
/// exponent vectors to coefficients is plenty.
class Polynomial {
public:
    using Exponents = std::vector<int>;

    explicit Polynomial(std::size_t dim) : dim_(dim) {}

    static Polynomial constant(std::size_t dim, double c) {
        Polynomial p(dim);
        if (c != 0.0) p.terms_[Exponents(dim, 0)] = c;
        return p;
    }

    /// The coordinate monomial x_i (0-based axis).
    static Polynomial coordinate(std::size_t dim, std::size_t axis) {
        if (axis >= dim) throw invalid_argument("Polynomial: axis out of range");
        Polynomial p(dim);
        Exponents e(dim, 0);
        e[axis] = 1;
        p.terms_[e] = 1.0;
        return p;
    }

    static Polynomial monomial(std::size_t dim, Exponents e, double c) {
        if (e.size() != dim) throw invalid_argument("Polynomial: exponent size mismatch");
        Polynomial p(dim);
        if (c != 0.0) p.terms_[std::move(e)] = c;
        return p;
    }

    /// Linear form <a, x>.
    static Polynomial linear(const Eigen::VectorXd& a) {
        Polynomial p(static_cast<std::size_t>(a.size()));
        for (Eigen::Index i = 0; i < a.size(); ++i)
            if (a[i] != 0.0) p += coordinate(p.dim_, static_cast<std::size_t>(i)) * a[i];
        return p;
    }

    std::size_t dim() const noexcept { return dim_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    const std::map<Exponents, double>& terms() const noexcept { return terms_; }

    int total_degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (int k : e) s += k;
            d = std::max(d, s);
        }
        return d;
    }

    int max_axis_degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_)
            for (int k : e) d = std::max(d, k);
        return d;
    }

    double operator()(const Eigen::VectorXd& x) const {
        if (static_cast<std::size_t>(x.size()) != dim_)
            throw invalid_argument("Polynomial: evaluation dimension mismatch");
        double v = 0.0;
        for (const auto& [e, c] : terms_) {
            double t = c;
            for (std::size_t i = 0; i < dim_; ++i)
                for (int k = 0; k < e[i]; ++k) t *= x[static_cast<Eigen::Index>(i)];
            v += t;
        }
        return v;
    }

    Polynomial& operator+=(const Polynomial& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    Polynomial& operator*=(double s) {
        if (s == 0.0) { terms_.clear(); return *this; }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        a.check_dim(b);
        Polynomial r(a.dim_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e(a.dim_);
                for (std::size_t i = 0; i < a.dim_; ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        return r;
    }

    Polynomial derivative(std::size_t axis) const {
        if (axis >= dim_) throw invalid_argument("Polynomial: derivative axis out of range");
        Polynomial r(dim_);
        for (const auto& [e, c] : terms_) {
            if (e[axis] == 0) continue;
            Exponents d = e;
            d[axis] -= 1;
            r.add_term(d, c * static_cast<double>(e[axis]));
        }
        return r;
    }

    std::vector<Polynomial> gradient() const {
        std::vector<Polynomial> g;
        g.reserve(dim_);
        for (std::size_t i = 0; i < dim_; ++i) g.push_back(derivative(i));
        return g;
    }

private:
    void check_dim(const Polynomial& o) const {
        if (o.dim_ != dim_) throw invalid_argument("Polynomial: dimension mismatch");
    }
    void add_term(const Exponents& e, double c) {
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            if (c != 0.0) terms_[e] = c;
        } else {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    std::size_t dim_;
    std::map<Exponents, double> terms_;
};

} // namespace degenlab
