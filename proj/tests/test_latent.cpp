#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "diva/latent.hpp"

using namespace diva;

namespace {

DerivativeSpectrum make_deriv(const WavenumberGrid& g, std::vector<double> v,
                              const std::string& cond, int rep = 0) {
    SpectrumMeta m;
    m.condition = cond;
    m.replicate_id = rep;
    return DerivativeSpectrum(g, std::move(v), m);
}

LatentEmbedding embedding_of(const std::vector<std::pair<std::string, std::array<double, 2>>>& pts) {
    LatentEmbedding e;
    for (const auto& [cond, mu] : pts) {
        SpectrumMeta m;
        m.condition = cond;
        e.points.push_back({m, mu, {0.0, 0.0}});
    }
    return e;
}

}  // namespace

TEST_CASE("embed_dataset mirrors encode() and preserves metadata") {
    const auto grid = WavenumberGrid::uniform(600.0, 1.0, 8);
    const auto m = init_model(8, 3);

    CHECK(embed_dataset(m, {}).points.empty());

    std::vector<DerivativeSpectrum> ds;
    ds.push_back(make_deriv(grid, {0.1, 0.2, -0.1, 0.3, 0.0, -0.2, 0.15, 0.05}, "x", 4));
    ds.push_back(ds.front());
    const auto e = embed_dataset(m, ds);
    REQUIRE(e.points.size() == 2);
    CHECK(e.points[0].mu == e.points[1].mu);
    CHECK(e.points[0].meta.replicate_id == 4);

    const auto st = encode(m, ds[0].values);
    CHECK(e.points[0].mu == st.mu);
    CHECK(e.points[0].logvar == st.logvar);

    const auto e2 = embed_dataset(m, ds);
    CHECK(e.points[0].mu == e2.points[0].mu);
}

TEST_CASE("cluster_medians: order statistics and label grouping") {
    const auto single = cluster_medians(embedding_of({{"a", {1.5, -2.0}}}));
    REQUIRE(single.size() == 1);
    CHECK(single[0].median == std::array<double, 2>{1.5, -2.0});

    const auto odd = cluster_medians(
        embedding_of({{"a", {0.0, 0.0}}, {"a", {2.0, 2.0}}, {"a", {10.0, -10.0}}}));
    CHECK(odd[0].median == std::array<double, 2>{2.0, 0.0});

    // grouping keeps first-appearance order and splits by label
    const auto grouped = cluster_medians(
        embedding_of({{"b", {1.0, 1.0}}, {"a", {5.0, 5.0}}, {"b", {3.0, 3.0}}}));
    REQUIRE(grouped.size() == 2);
    CHECK(grouped[0].condition == "b");
    CHECK(grouped[0].median == std::array<double, 2>{2.0, 2.0});
    CHECK(grouped[1].condition == "a");

    CHECK_THROWS_AS(cluster_medians(LatentEmbedding{}), DataError);
}

TEST_CASE("cluster_medians against a full-sort oracle") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uni(-10.0, 10.0);
    std::vector<std::pair<std::string, std::array<double, 2>>> pts;
    for (int i = 0; i < 100; ++i)
        pts.push_back({i % 3 == 0 ? "a" : "b", {uni(rng), uni(rng)}});
    const auto clusters = cluster_medians(embedding_of(pts));

    for (const auto& c : clusters) {
        for (std::size_t k = 0; k < 2; ++k) {
            std::vector<double> comps;
            for (const auto& [cond, mu] : pts)
                if (cond == c.condition) comps.push_back(mu[k]);
            std::sort(comps.begin(), comps.end());
            const std::size_t n = comps.size();
            const double expected =
                n % 2 ? comps[n / 2] : 0.5 * (comps[n / 2 - 1] + comps[n / 2]);
            CHECK(c.median[k] == expected);

            // order-statistic sanity: members above vs below balance to parity
            long above = 0, below = 0;
            for (double v : comps) {
                if (v > c.median[k]) ++above;
                if (v < c.median[k]) --below;
            }
            CHECK(std::abs(above + below) <= 1);
        }
    }

    // invariant under within-cluster permutation
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto clusters2 = cluster_medians(embedding_of(shuffled));
    for (const auto& c : clusters) {
        const auto it = std::find_if(clusters2.begin(), clusters2.end(),
                                     [&](const auto& d) { return d.condition == c.condition; });
        REQUIRE(it != clusters2.end());
        CHECK(it->median == c.median);
    }
}

TEST_CASE("decode_median equals decode of the median") {
    const auto grid = WavenumberGrid::uniform(600.0, 1.0, 8);
    const auto m = init_model(8, 9);
    ClusterSummary c{"x", {{0.3, -0.8}}, {0.3, -0.8}};
    const auto cs = decode_median(m, c, grid);
    CHECK(cs.condition == "x");
    CHECK(cs.derivative.values == decode(m, c.median));
    CHECK(cs.source_median == c.median);

    const auto zero = decode_median(VaeModel(8), c, grid);
    for (double v : zero.derivative.values) CHECK(v == 0.0);

    CHECK_THROWS_AS(decode_median(m, c, WavenumberGrid::uniform(0.0, 1.0, 9)), DataError);
}

TEST_CASE("separation_stats: singletons, coincident clusters, brute force") {
    const auto rows = separation_stats(embedding_of({{"a", {0.0, 0.0}}, {"b", {3.0, 4.0}}}));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].inter_median_distance == 5.0);
    CHECK(rows[0].pooled_intra_mad == 0.0);

    const auto coincident = separation_stats(
        embedding_of({{"a", {1.0, 1.0}}, {"b", {1.0, 1.0}}, {"b", {1.0, 1.0}}}));
    CHECK(coincident[0].inter_median_distance == 0.0);

    std::mt19937_64 rng(15);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::pair<std::string, std::array<double, 2>>> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({"a", {noise(rng), 5.0 + noise(rng)}});
    for (int i = 0; i < 20; ++i) pts.push_back({"b", {8.0 + noise(rng), noise(rng)}});
    const auto stat = separation_stats(embedding_of(pts));
    REQUIRE(stat.size() == 1);

    // direct recomputation
    const auto clusters = cluster_medians(embedding_of(pts));
    auto mad_of = [](const ClusterSummary& c) {
        std::vector<double> d;
        for (const auto& mu : c.member_mus)
            d.push_back(std::hypot(mu[0] - c.median[0], mu[1] - c.median[1]));
        std::sort(d.begin(), d.end());
        const std::size_t n = d.size();
        return n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
    };
    const double inter = std::hypot(clusters[0].median[0] - clusters[1].median[0],
                                    clusters[0].median[1] - clusters[1].median[1]);
    const double pooled = (30.0 * mad_of(clusters[0]) + 20.0 * mad_of(clusters[1])) / 50.0;
    CHECK(stat[0].inter_median_distance == Catch::Approx(inter).margin(1e-12));
    CHECK(stat[0].pooled_intra_mad == Catch::Approx(pooled).margin(1e-12));

    CHECK_THROWS_AS(separation_stats(embedding_of({{"a", {0.0, 0.0}}})), DataError);
}
