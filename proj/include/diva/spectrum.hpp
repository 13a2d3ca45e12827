#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "diva/errors.hpp"

namespace diva {

// Ordered wavenumber axis in cm^-1. Strictly increasing, uniform spacing,
// at least 3 samples. Non-uniform grids are rejected at construction.
class WavenumberGrid {
public:
    explicit WavenumberGrid(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 3)
            throw DataError("wavenumber grid needs at least 3 samples");
        for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
            if (!(values_[i] < values_[i + 1]))
                throw DataError("wavenumber grid must be strictly increasing");
        }
        const double step0 = values_[1] - values_[0];
        for (std::size_t i = 1; i + 1 < values_.size(); ++i) {
            const double step = values_[i + 1] - values_[i];
            if (std::abs(step - step0) > 1e-6 * std::abs(step0))
                throw DataError("wavenumber grid must be uniformly spaced");
        }
    }

    static WavenumberGrid uniform(double lo, double step, std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = lo + step * static_cast<double>(i);
        return WavenumberGrid(std::move(v));
    }

    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }
    double spacing() const { return (values_.back() - values_.front()) / static_cast<double>(values_.size() - 1); }
    double span() const { return values_.back() - values_.front(); }

    bool operator==(const WavenumberGrid& o) const { return values_ == o.values_; }

private:
    std::vector<double> values_;
};

struct SpectrumMeta {
    std::string condition;
    int replicate_id = 0;
    int location_id = 0;

    bool operator==(const SpectrumMeta&) const = default;
};

namespace detail {
inline void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw DataError(std::string(what) + " contains non-finite values");
}
}  // namespace detail

// Raw or preprocessed intensity spectrum I(v) on a shared grid.
struct Spectrum {
    WavenumberGrid grid;
    std::vector<double> intensities;
    SpectrumMeta meta;

    Spectrum(WavenumberGrid g, std::vector<double> y, SpectrumMeta m = {})
        : grid(std::move(g)), intensities(std::move(y)), meta(std::move(m)) {
        if (intensities.size() != grid.size())
            throw DataError("spectrum length does not match grid length");
        detail::check_finite(intensities, "spectrum");
        if (meta.condition.empty()) meta.condition = "unlabeled";
    }
};

// First-derivative spectrum D(v) on the midpoint grid of its source.
struct DerivativeSpectrum {
    WavenumberGrid grid;
    std::vector<double> values;
    SpectrumMeta meta;

    DerivativeSpectrum(WavenumberGrid g, std::vector<double> v, SpectrumMeta m = {})
        : grid(std::move(g)), values(std::move(v)), meta(std::move(m)) {
        if (values.size() != grid.size())
            throw DataError("derivative length does not match grid length");
        detail::check_finite(values, "derivative spectrum");
    }
};

struct NormalizationScale {
    double factor;  // detector units, > 0
    explicit NormalizationScale(double f) : factor(f) {
        if (!(f > 0.0)) throw DataError("normalization factor must be positive");
    }
};

}  // namespace diva
