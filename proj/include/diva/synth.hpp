#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "diva/preprocess.hpp"

namespace diva {

enum class PeakShape { gaussian, lorentzian };

struct PeakSpec {
    double center = 0.0;     // cm^-1
    double amplitude = 1.0;  // detector units
    double width = 10.0;     // HWHM (lorentzian) or sigma (gaussian)
    PeakShape shape = PeakShape::lorentzian;
};

// Polynomial in the grid coordinate normalized to [0,1], plus an optional
// broad Gaussian hump modeling the fluorescence background.
struct BaselineSpec {
    std::vector<double> poly_coeffs;  // degree <= 4
    bool has_hump = false;
    double hump_center = 0.0;
    double hump_amplitude = 0.0;
    double hump_width = 300.0;  // >= 200 cm^-1
};

struct SynthCondition {
    std::string label;
    std::vector<PeakSpec> peaks;
};

struct SynthConfig {
    WavenumberGrid grid;
    std::vector<SynthCondition> conditions;
    BaselineSpec baseline;
    double noise_sigma = 0.0;
    double spike_probability = 0.0;
    double spike_amplitude = 0.0;
    int replicates_per_condition = 1;
    long long seed = 0;
};

namespace detail {

inline double peak_value(const PeakSpec& p, double x) {
    const double d = x - p.center;
    if (p.shape == PeakShape::lorentzian)
        return p.amplitude * p.width * p.width / (d * d + p.width * p.width);
    return p.amplitude * std::exp(-0.5 * d * d / (p.width * p.width));
}

inline double baseline_value(const BaselineSpec& b, const WavenumberGrid& grid, double x) {
    const double t = (x - grid.front()) / grid.span();
    double val = 0.0, tn = 1.0;
    for (double c : b.poly_coeffs) {
        val += c * tn;
        tn *= t;
    }
    if (b.has_hump) {
        const double d = x - b.hump_center;
        val += b.hump_amplitude * std::exp(-0.5 * d * d / (b.hump_width * b.hump_width));
    }
    return val;
}

inline const SynthCondition& find_condition(const SynthConfig& cfg, const std::string& label) {
    for (const auto& c : cfg.conditions)
        if (c.label == label) return c;
    throw DataError("synth: unknown condition label '" + label + "'");
}

}  // namespace detail

inline void validate(const SynthConfig& cfg) {
    if (cfg.conditions.empty()) throw DataError("synth: need at least one condition");
    if (cfg.replicates_per_condition < 1) throw DataError("synth: replicates must be >= 1");
    if (cfg.baseline.poly_coeffs.size() > 5) throw DataError("synth: baseline degree must be <= 4");
    if (cfg.baseline.has_hump && cfg.baseline.hump_width < 200.0)
        throw DataError("synth: baseline hump width must be >= 200 cm^-1");
    for (double x : cfg.grid.values())
        if (detail::baseline_value(cfg.baseline, cfg.grid, x) < 0.0)
            throw DataError("synth: baseline is negative on the grid");
    for (const auto& c : cfg.conditions) {
        for (const auto& p : c.peaks) {
            if (!(p.amplitude > 0.0 && p.width > 0.0))
                throw DataError("synth: peak amplitude and width must be positive");
            if (p.center < cfg.grid.front() || p.center > cfg.grid.back())
                throw DataError("synth: peak center outside grid range");
        }
    }
}

// One spectrum: baseline + peaks + Gaussian noise + Bernoulli single-sample
// cosmic-ray spikes. Deterministic per rng state.
template <class Rng>
inline Spectrum gen_spectrum(const SynthConfig& cfg, const std::string& label, Rng& rng) {
    const auto& cond = detail::find_condition(cfg, label);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const std::size_t n = cfg.grid.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = cfg.grid[i];
        double v = detail::baseline_value(cfg.baseline, cfg.grid, x);
        for (const auto& p : cond.peaks) v += detail::peak_value(p, x);
        if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * noise(rng);
        if (cfg.spike_probability > 0.0 && uni(rng) < cfg.spike_probability)
            v += cfg.spike_amplitude;
        y[i] = v;
    }
    SpectrumMeta meta;
    meta.condition = label;
    return Spectrum(cfg.grid, std::move(y), meta);
}

// Derived per-spectrum seed, recorded in the corpus manifest so any single
// spectrum can be regenerated in isolation.
inline std::uint64_t spectrum_seed(long long base_seed, std::size_t condition_index, int replicate) {
    std::uint64_t h = static_cast<std::uint64_t>(base_seed);
    h ^= (condition_index + 1) * 0x9e3779b97f4a7c15ull;
    h ^= (static_cast<std::uint64_t>(replicate) + 1) * 0xbf58476d1ce4e5b9ull;
    h ^= h >> 31;
    return h;
}

inline std::vector<Spectrum> gen_dataset(const SynthConfig& cfg) {
    validate(cfg);
    std::vector<Spectrum> out;
    out.reserve(cfg.conditions.size() * static_cast<std::size_t>(cfg.replicates_per_condition));
    for (std::size_t ci = 0; ci < cfg.conditions.size(); ++ci) {
        for (int r = 0; r < cfg.replicates_per_condition; ++r) {
            std::mt19937_64 rng(spectrum_seed(cfg.seed, ci, r));
            Spectrum s = gen_spectrum(cfg, cfg.conditions[ci].label, rng);
            s.meta.replicate_id = r;
            s.meta.location_id = r / 5;  // 5 replicates per location
            out.push_back(std::move(s));
        }
    }
    return out;
}

namespace detail {

// Reference peak detector used only by ground_truth: a direct scan over the
// noiseless derivative, written independently of the production detector.
struct RefPeak {
    double position;
    double area;
};

inline std::vector<RefPeak> reference_peaks(const std::vector<double>& grid,
                                            const std::vector<double>& v) {
    struct Cross {
        double pos;
        bool p2n;
    };
    std::vector<Cross> cs;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i] > 0.0 && v[i + 1] < 0.0)
            cs.push_back({grid[i] + v[i] / (v[i] - v[i + 1]) * (grid[i + 1] - grid[i]), true});
        else if (v[i] < 0.0 && v[i + 1] > 0.0)
            cs.push_back({grid[i] + v[i] / (v[i] - v[i + 1]) * (grid[i + 1] - grid[i]), false});
        else if (i > 0 && v[i] == 0.0 && v[i - 1] != 0.0 && v[i + 1] != 0.0 &&
                 (v[i - 1] > 0.0) != (v[i + 1] > 0.0))
            cs.push_back({grid[i], v[i - 1] > 0.0});
    }
    std::vector<RefPeak> peaks;
    for (std::size_t k = 1; k + 1 < cs.size(); ++k) {
        if (!cs[k].p2n) continue;
        double area = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (grid[j] > cs[k - 1].pos && grid[j] < cs[k + 1].pos) area += std::abs(v[j]);
        peaks.push_back({cs[k].pos, area});
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const RefPeak& a, const RefPeak& b) {
        if (a.area != b.area) return a.area > b.area;
        return a.position < b.position;
    });
    return peaks;
}

}  // namespace detail

// Expected peak positions for a condition, ordered by derivative-area
// significance as computed by a brute-force pass over the noiseless
// synthetic spectrum (not by amplitude assumptions).
inline std::vector<double> ground_truth(const SynthConfig& cfg, const std::string& label,
                                        std::size_t k) {
    SynthConfig clean = cfg;
    clean.noise_sigma = 0.0;
    clean.spike_probability = 0.0;
    std::mt19937_64 rng(0);
    const Spectrum s = gen_spectrum(clean, label, rng);
    const DerivativeSpectrum d = differentiate(s);
    const auto peaks = detail::reference_peaks(d.grid.values(), d.values);
    std::vector<double> out;
    for (std::size_t i = 0; i < peaks.size() && i < k; ++i) out.push_back(peaks[i].position);
    return out;
}

// The default corpus used by the CLI presets: four stress conditions with
// shared peak positions and per-condition amplitude scalings, on top of a
// fluorescence-like background.
inline SynthConfig default_light_stress_config(long long seed) {
    SynthConfig cfg{WavenumberGrid::uniform(600.0, 1150.0 / 871.0, 872), {}, {}, 0.0, 0.0, 0.0, 40, seed};
    const double centers[5] = {742.0, 1150.0, 1180.0, 1318.0, 1521.0};
    // Base amplitudes give the derivative-area ranking 1521 > 1150 > 1180 >
    // 1318 > 742 with ~1.4x margins between adjacent ranks; the
    // per-condition factors co-vary (overall pigment content tracks the
    // light level) with tilts small enough to never reorder the ranking.
    const double base_amp[5] = {300.0, 1000.0, 730.0, 440.0, 1200.0};
    struct Scale {
        const char* label;
        double factors[5];
    };
    const Scale scales[4] = {
        {"white_light", {1.0, 1.0, 1.0, 1.0, 1.0}},
        {"high_light", {1.95, 2.0, 1.92, 1.88, 2.05}},
        {"low_light", {0.5, 0.47, 0.49, 0.52, 0.45}},
        {"shade", {0.25, 0.23, 0.22, 0.26, 0.21}},
    };
    for (const auto& sc : scales) {
        SynthCondition cond;
        cond.label = sc.label;
        for (int i = 0; i < 5; ++i)
            cond.peaks.push_back({centers[i], base_amp[i] * sc.factors[i], 8.0, PeakShape::lorentzian});
        cfg.conditions.push_back(std::move(cond));
    }
    // The cubic falls gently at the low end and turns back up near 1650 so
    // the derivative crosses zero on both sides of the peak set; without
    // that the outermost peaks would be discarded as unbracketed. Kept small
    // next to the peaks so condition differences dominate the normalized
    // derivatives.
    cfg.baseline.poly_coeffs = {260.0, -230.0, 30.0, 110.0};
    cfg.baseline.has_hump = true;
    cfg.baseline.hump_center = 1000.0;
    cfg.baseline.hump_amplitude = 40.0;
    cfg.baseline.hump_width = 300.0;
    cfg.noise_sigma = 1.0;
    cfg.spike_probability = 0.001;
    cfg.spike_amplitude = 20000.0;
    return cfg;
}

}  // namespace diva
