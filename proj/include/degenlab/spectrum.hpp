#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "degenlab/errors.hpp"

namespace degenlab::gauss {

enum class SpaceTag { U, V };

/// Eigenvalue sequence of a trace-class covariance operator together with a
/// label naming the eigenbasis. Eigenvalues must be strictly positive and
/// non-increasing; zeros are rejected rather than truncated.
class CovSpectrum {
public:
    CovSpectrum(std::vector<double> eigenvalues, std::string basis_label, SpaceTag space)
        : eigenvalues_(std::move(eigenvalues)),
          basis_label_(std::move(basis_label)),
          space_(space) {
        if (eigenvalues_.empty())
            throw invalid_argument("CovSpectrum: eigenvalue list is empty");
        for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
            if (!(eigenvalues_[i] > 0.0))
                throw invalid_argument("CovSpectrum: eigenvalues must be strictly positive");
            if (i > 0 && eigenvalues_[i] > eigenvalues_[i - 1])
                throw invalid_argument("CovSpectrum: eigenvalues must be non-increasing");
        }
    }

    std::size_t size() const noexcept { return eigenvalues_.size(); }
    double eigenvalue(std::size_t k) const { return eigenvalues_.at(k - 1); } // 1-indexed
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
    const std::string& basis_label() const noexcept { return basis_label_; }
    SpaceTag space() const noexcept { return space_; }

    /// Partial trace of the first n eigenvalues.
    double partial_trace(std::size_t n) const {
        if (n > eigenvalues_.size())
            throw invalid_argument("CovSpectrum: partial_trace beyond available eigenvalues");
        return std::accumulate(eigenvalues_.begin(), eigenvalues_.begin() + n, 0.0);
    }

private:
    std::vector<double> eigenvalues_;
    std::string basis_label_;
    SpaceTag space_;
};

/// Spectrum of the inverse Dirichlet Laplacian on (0,1) in the sine basis:
/// eigenvalue k is 1/(k^2 pi^2).
inline CovSpectrum dirichlet_spectrum(std::size_t count, SpaceTag space = SpaceTag::U) {
    if (count == 0) throw invalid_argument("dirichlet_spectrum: count must be positive");
    constexpr double pi = 3.14159265358979323846;
    std::vector<double> ev(count);
    for (std::size_t k = 1; k <= count; ++k)
        ev[k - 1] = 1.0 / (static_cast<double>(k) * static_cast<double>(k) * pi * pi);
    return CovSpectrum(std::move(ev), "sine-dirichlet", space);
}

} // namespace degenlab::gauss
