#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "diva/spectrum.hpp"

namespace diva {

// Keep only samples with lo <= v <= hi. Metadata is preserved.
inline Spectrum trim(const Spectrum& s, double lo, double hi) {
    if (!(lo < hi)) throw DataError("trim window must satisfy lo < hi");
    std::vector<double> g, y;
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        const double v = s.grid[i];
        if (v >= lo && v <= hi) {
            g.push_back(v);
            y.push_back(s.intensities[i]);
        }
    }
    if (g.size() < 3) throw DataError("trim window excludes all samples");
    return Spectrum(WavenumberGrid(std::move(g)), std::move(y), s.meta);
}

namespace detail {

inline double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    return 0.5 * (v[mid - 1] + hi);
}

}  // namespace detail

// Cosmic-ray removal: samples whose modified z-score against a rolling
// median (MAD-scaled) exceeds the threshold are replaced by that median.
// A MAD of 0 means the window is constant apart from the sample itself, so
// any deviation there counts as an infinite z-score; an exactly constant
// window is left untouched.
inline Spectrum despike(const Spectrum& s, int window, double z_threshold) {
    if (window < 3 || window % 2 == 0) throw DataError("despike window must be odd and >= 3");
    if (!(z_threshold > 0.0)) throw DataError("despike threshold must be positive");

    const auto& y = s.intensities;
    const int n = static_cast<int>(y.size());
    const int half = window / 2;
    std::vector<double> out = y;
    std::vector<double> buf, dev;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        buf.assign(y.begin() + lo, y.begin() + hi + 1);
        const double med = detail::median_of(buf);
        dev.resize(buf.size());
        for (std::size_t k = 0; k < buf.size(); ++k) dev[k] = std::abs(buf[k] - med);
        const double mad = detail::median_of(dev);
        if (mad == 0.0) {
            if (y[i] != med) out[i] = med;
            continue;
        }
        const double z = 0.6745 * (y[i] - med) / mad;
        if (std::abs(z) > z_threshold) out[i] = med;
    }
    return Spectrum(s.grid, std::move(out), s.meta);
}

// Rigid wavenumber shift. The offset itself (e.g. from a polystyrene
// reference) is computed by the caller.
inline Spectrum calibrate(const Spectrum& s, double offset) {
    if (std::abs(offset) >= s.grid.span()) throw DataError("calibration offset exceeds grid span");
    std::vector<double> g(s.grid.values());
    for (double& v : g) v += offset;
    return Spectrum(WavenumberGrid(std::move(g)), s.intensities, s.meta);
}

// Divide every spectrum by the single global max-abs intensity so the
// dataset maximum becomes 1 while between-spectrum ratios are preserved.
inline std::pair<std::vector<Spectrum>, NormalizationScale> normalize(const std::vector<Spectrum>& ds) {
    if (ds.empty()) throw DataError("normalize: empty dataset");
    double factor = 0.0;
    for (const auto& s : ds)
        for (double v : s.intensities) factor = std::max(factor, std::abs(v));
    if (factor == 0.0) throw DataError("degenerate normalization");
    std::vector<Spectrum> out;
    out.reserve(ds.size());
    for (const auto& s : ds) {
        std::vector<double> y(s.intensities);
        for (double& v : y) v /= factor;
        out.emplace_back(s.grid, std::move(y), s.meta);
    }
    return {std::move(out), NormalizationScale(factor)};
}

// Forward difference D[i] = (I[i+1] - I[i]) / dv on the midpoint grid.
inline DerivativeSpectrum differentiate(const Spectrum& s) {
    const std::size_t n = s.grid.size();
    const double dv = s.grid.spacing();
    std::vector<double> mid(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        mid[i] = 0.5 * (s.grid[i] + s.grid[i + 1]);
        d[i] = (s.intensities[i + 1] - s.intensities[i]) / dv;
    }
    return DerivativeSpectrum(WavenumberGrid(std::move(mid)), std::move(d), s.meta);
}

// Cumulative integration back to an intensity spectrum. Exact inverse of
// differentiate when anchor_value is the source's first intensity;
// otherwise the result is defined up to the integration constant.
inline Spectrum detransform(const DerivativeSpectrum& d, double anchor_value,
                            const WavenumberGrid& anchor_grid) {
    if (anchor_grid.size() != d.grid.size() + 1)
        throw DataError("detransform: anchor grid length must be derivative length + 1");
    const double dv = anchor_grid.spacing();
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        const double mid = 0.5 * (anchor_grid[i] + anchor_grid[i + 1]);
        if (std::abs(mid - d.grid[i]) > 1e-6 * std::abs(dv))
            throw DataError("detransform: anchor grid is inconsistent with derivative midpoints");
    }
    std::vector<double> y(anchor_grid.size());
    y[0] = anchor_value;
    for (std::size_t i = 0; i < d.values.size(); ++i) y[i + 1] = y[i] + d.values[i] * dv;
    return Spectrum(anchor_grid, std::move(y), d.meta);
}

struct DatasetSplit {
    std::vector<DerivativeSpectrum> train;
    std::vector<DerivativeSpectrum> test;
    long long seed = 0;
};

// Seed-deterministic shuffle, first round(fraction*n) to train.
// No stratification.
inline DatasetSplit split(const std::vector<DerivativeSpectrum>& ds, double fraction, long long seed) {
    if (ds.empty()) throw DataError("split: empty dataset");
    if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("split fraction must be in (0, 1)");
    const std::size_t n = ds.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n) throw DataError("split leaves train or test empty");
    DatasetSplit out;
    out.seed = seed;
    out.train.reserve(n_train);
    out.test.reserve(n - n_train);
    for (std::size_t k = 0; k < n; ++k)
        (k < n_train ? out.train : out.test).push_back(ds[idx[k]]);
    return out;
}

}  // namespace diva
