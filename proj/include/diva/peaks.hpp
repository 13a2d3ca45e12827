#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "diva/spectrum.hpp"

namespace diva {

enum class CrossingDirection { pos_to_neg, neg_to_pos };

struct ZeroCrossing {
    std::size_t index = 0;      // last sample before (or at) the crossing
    double position = 0.0;      // interpolated wavenumber of the crossing
    double value = 0.0;         // interpolated signal value, 0 by construction
    CrossingDirection direction = CrossingDirection::pos_to_neg;
};

struct PeakRecord {
    double position = 0.0;      // interpolated p2n crossing wavenumber
    long rounded_index = 0;     // round of the interpolated sample index
    double area = 0.0;          // sum of |D| between bracketing crossings

    bool operator==(const PeakRecord&) const = default;
};

struct SigPeaks {
    std::vector<PeakRecord> records;  // area descending, ties by ascending position
};

// Zero crossings by linear interpolation. Adjacent samples of strictly
// opposite sign emit an interpolated crossing; a sample exactly at zero
// with opposite-signed neighbors emits one crossing at that sample; runs
// of zeros emit none.
inline std::vector<ZeroCrossing> find_zero_crossings(const DerivativeSpectrum& d) {
    const auto& v = d.values;
    const auto& g = d.grid;
    std::vector<ZeroCrossing> out;
    if (v.size() < 2) return out;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i] == 0.0) {
            if (i == 0) continue;
            if (v[i - 1] != 0.0 && v[i + 1] != 0.0 &&
                std::signbit(v[i - 1]) != std::signbit(v[i + 1])) {
                out.push_back({i, g[i], 0.0,
                               v[i - 1] > 0.0 ? CrossingDirection::pos_to_neg
                                              : CrossingDirection::neg_to_pos});
            }
            continue;
        }
        if (v[i + 1] == 0.0) continue;
        if ((v[i] > 0.0) == (v[i + 1] > 0.0)) continue;
        const double t = v[i] / (v[i] - v[i + 1]);  // in (0, 1)
        out.push_back({i, g[i] + t * (g[i + 1] - g[i]), 0.0,
                       v[i] > 0.0 ? CrossingDirection::pos_to_neg
                                  : CrossingDirection::neg_to_pos});
    }
    return out;
}

// Area significance for every pos-to-neg crossing bracketed by a crossing
// of any direction on both sides; unbracketed crossings at the spectrum
// edges are discarded. Area sums |v[j]| over samples strictly between the
// bracketing crossing positions.
inline std::vector<PeakRecord> peak_areas(const DerivativeSpectrum& d,
                                          const std::vector<ZeroCrossing>& crossings) {
    const auto& v = d.values;
    const auto& g = d.grid;
    std::vector<PeakRecord> out;
    for (std::size_t k = 0; k < crossings.size(); ++k) {
        if (crossings[k].direction != CrossingDirection::pos_to_neg) continue;
        if (k == 0 || k + 1 == crossings.size()) continue;
        const double lo = crossings[k - 1].position;
        const double hi = crossings[k + 1].position;
        double area = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (g[j] > lo && g[j] < hi) area += std::abs(v[j]);
        PeakRecord rec;
        rec.position = crossings[k].position;
        double frac_index = static_cast<double>(crossings[k].index);
        if (crossings[k].index + 1 < g.size())
            frac_index += (crossings[k].position - g[crossings[k].index]) /
                          (g[crossings[k].index + 1] - g[crossings[k].index]);
        rec.rounded_index = std::lround(frac_index);
        rec.area = area;
        out.push_back(rec);
    }
    return out;
}

// Stable sort: area descending, ties broken by ascending position.
inline SigPeaks rank_peaks(std::vector<PeakRecord> records) {
    std::stable_sort(records.begin(), records.end(), [](const PeakRecord& a, const PeakRecord& b) {
        if (a.area != b.area) return a.area > b.area;
        return a.position < b.position;
    });
    return {std::move(records)};
}

inline std::vector<PeakRecord> top_k(const SigPeaks& s, std::size_t k = 5) {
    if (k < 1) throw DataError("top_k: k must be >= 1");
    const std::size_t n = std::min(k, s.records.size());
    return {s.records.begin(), s.records.begin() + static_cast<std::ptrdiff_t>(n)};
}

inline SigPeaks detect_peaks(const DerivativeSpectrum& d) {
    return rank_peaks(peak_areas(d, find_zero_crossings(d)));
}

}  // namespace diva
