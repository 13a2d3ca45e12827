#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "diva/preprocess.hpp"
#include "diva/vae.hpp"

namespace diva {

struct LatentPoint {
    SpectrumMeta meta;
    std::array<double, 2> mu{};
    std::array<double, 2> logvar{};
};

struct LatentEmbedding {
    std::vector<LatentPoint> points;
};

struct ClusterSummary {
    std::string condition;
    std::vector<std::array<double, 2>> member_mus;
    std::array<double, 2> median{};
};

struct CharacteristicSpectrum {
    std::string condition;
    DerivativeSpectrum derivative;
    std::array<double, 2> source_median{};
};

// Encoder means only, no sampling: one deterministic point per spectrum.
inline LatentEmbedding embed_dataset(const VaeModel& m, const std::vector<DerivativeSpectrum>& ds) {
    LatentEmbedding e;
    e.points.reserve(ds.size());
    for (const auto& d : ds) {
        const LatentStats st = encode(m, d.values);
        e.points.push_back({d.meta, st.mu, st.logvar});
    }
    return e;
}

namespace detail {

inline double component_median(std::vector<double> v) { return median_of(std::move(v)); }

}  // namespace detail

// One summary per distinct condition label, ordered by first appearance.
// Even member counts take the midpoint of the two middle order statistics.
inline std::vector<ClusterSummary> cluster_medians(const LatentEmbedding& e) {
    if (e.points.empty()) throw DataError("cluster_medians: empty embedding");
    std::vector<ClusterSummary> out;
    for (const auto& p : e.points) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const ClusterSummary& c) { return c.condition == p.meta.condition; });
        if (it == out.end()) {
            out.push_back({p.meta.condition, {}, {}});
            it = out.end() - 1;
        }
        it->member_mus.push_back(p.mu);
    }
    for (auto& c : out) {
        for (std::size_t k = 0; k < 2; ++k) {
            std::vector<double> comps;
            comps.reserve(c.member_mus.size());
            for (const auto& mu : c.member_mus) comps.push_back(mu[k]);
            c.median[k] = detail::component_median(std::move(comps));
        }
    }
    return out;
}

// Decode a cluster median into its characteristic derivative spectrum.
inline CharacteristicSpectrum decode_median(const VaeModel& m, const ClusterSummary& c,
                                            const WavenumberGrid& grid) {
    if (grid.size() != m.input_dim) throw DataError("decode_median: grid length mismatch");
    std::vector<double> values = decode(m, c.median);
    SpectrumMeta meta;
    meta.condition = c.condition;
    return {c.condition, DerivativeSpectrum(grid, std::move(values), meta), c.median};
}

struct SeparationRow {
    std::string label_a;
    std::string label_b;
    double inter_median_distance = 0.0;
    double pooled_intra_mad = 0.0;
};

// Euclidean inter-median distance and pooled median absolute deviation of
// members from their own median, per label pair. Singleton clusters
// contribute MAD 0.
inline std::vector<SeparationRow> separation_stats(const LatentEmbedding& e) {
    const auto clusters = cluster_medians(e);
    if (clusters.size() < 2) throw DataError("separation_stats: need at least 2 clusters");

    auto intra_mad = [](const ClusterSummary& c) {
        if (c.member_mus.size() < 2) return 0.0;
        std::vector<double> dist;
        dist.reserve(c.member_mus.size());
        for (const auto& mu : c.member_mus)
            dist.push_back(std::hypot(mu[0] - c.median[0], mu[1] - c.median[1]));
        return detail::median_of(std::move(dist));
    };

    std::vector<SeparationRow> rows;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        for (std::size_t j = i + 1; j < clusters.size(); ++j) {
            const auto& a = clusters[i];
            const auto& b = clusters[j];
            SeparationRow r;
            r.label_a = a.condition;
            r.label_b = b.condition;
            r.inter_median_distance = std::hypot(a.median[0] - b.median[0], a.median[1] - b.median[1]);
            const double na = static_cast<double>(a.member_mus.size());
            const double nb = static_cast<double>(b.member_mus.size());
            r.pooled_intra_mad = (na * intra_mad(a) + nb * intra_mad(b)) / (na + nb);
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

}  // namespace diva
