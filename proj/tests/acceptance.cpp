// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "diva/diva.hpp"
#include "peak_oracle.hpp"

namespace fs = std::filesystem;
using namespace diva;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail = "") {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, name,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// ---- 1: loss closed forms -----------------------------------------------

void criterion_loss_closed_forms() {
    Timer t;
    bool ok = kl_loss({{0.0, 0.0}, {0.0, 0.0}}) == 0.0;
    ok = ok && kl_loss({{1.0, 0.0}, {0.0, 0.0}}) == 0.5;
    ok = ok && recon_loss({1.0, -2.0, 0.5}, {1.0, -2.0, 0.5}) == 0.0;

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    for (int rep = 0; rep < 500 && ok; ++rep) {
        LatentStats st{{uni(rng), uni(rng)}, {uni(rng), uni(rng)}};
        double kl_direct = 0.0;
        for (int i = 0; i < 2; ++i)
            kl_direct += 1.0 + st.logvar[i] - st.mu[i] * st.mu[i] - std::exp(st.logvar[i]);
        kl_direct *= -0.5;
        ok = std::abs(kl_loss(st) - kl_direct) < 1e-12;

        std::vector<double> x(23), xh(23);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = uni(rng);
            xh[i] = uni(rng);
        }
        double mae = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) mae += std::abs(x[i] - xh[i]);
        mae /= static_cast<double>(x.size());
        ok = ok && std::abs(recon_loss(x, xh) - mae) < 1e-12;
    }
    report(1, "loss closed forms", ok && t.seconds() < 1.0,
           "runtime " + std::to_string(t.seconds()) + " s");
}

// ---- 2: gradient correctness --------------------------------------------

void criterion_gradients() {
    Timer t;
    const std::size_t dim = 12;
    VaeModel m = init_model(dim, 21);
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    for (auto* l : {&m.enc1, &m.enc2, &m.dec1, &m.dec2})
        for (auto& b : l->biases) b = uni(rng);
    std::vector<double> x(dim);
    for (auto& v : x) v = uni(rng);
    const std::array<double, 2> eps{0.41, -0.83};

    VaeGradients analytic(m);
    backward(m, elbo_loss_with_eps(m, x, eps, 1.0).cache, analytic);

    std::vector<double*> params;
    std::vector<const double*> grads;
    {
        VaeModel* pm = &m;
        VaeGradients* pg = &analytic;
        for (auto [lp, lg] : {std::pair{&pm->enc1, &pg->enc1}, std::pair{&pm->enc2, &pg->enc2},
                              std::pair{&pm->dec1, &pg->dec1}, std::pair{&pm->dec2, &pg->dec2}}) {
            for (std::size_t i = 0; i < lp->weights.size(); ++i) {
                params.push_back(&lp->weights[i]);
                grads.push_back(&lg->weights[i]);
            }
            for (std::size_t i = 0; i < lp->biases.size(); ++i) {
                params.push_back(&lp->biases[i]);
                grads.push_back(&lg->biases[i]);
            }
        }
    }
    const double h = 1e-5;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = *params[i];
        *params[i] = orig + h;
        const double fp = elbo_loss_with_eps(m, x, eps, 1.0).total;
        *params[i] = orig - h;
        const double fm = elbo_loss_with_eps(m, x, eps, 1.0).total;
        *params[i] = orig;
        const double fd = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(*grads[i]), 1e-8});
        max_rel = std::max(max_rel, std::abs(fd - *grads[i]) / denom);
    }
    report(2, "analytic gradients vs central finite differences",
           max_rel < 1e-4 && t.seconds() < 10.0,
           "max rel err " + std::to_string(max_rel) + ", runtime " + std::to_string(t.seconds()) +
               " s");
}

// ---- 3: derivative/detransform round trip -------------------------------

void criterion_round_trip() {
    Timer t;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1000.0, 1000.0);
    const auto grid = WavenumberGrid::uniform(600.0, 1150.0 / 871.0, 872);  // 871 features
    double max_err = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> y(grid.size());
        for (auto& v : y) v = uni(rng);
        const Spectrum s(grid, y);
        const auto back = detransform(differentiate(s), y.front(), grid);
        for (std::size_t i = 0; i < y.size(); ++i)
            max_err = std::max(max_err, std::abs(back.intensities[i] - y[i]));
    }
    report(3, "derivative/detransform round trip", max_err < 1e-9 && t.seconds() < 5.0,
           "max abs err " + std::to_string(max_err));
}

// ---- 4: peak detector oracle equivalence --------------------------------

void criterion_peak_oracle() {
    Timer t;
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> len_dist(3, 64);
    std::uniform_int_distribution<int> val_dist(-4, 4);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const int n = len_dist(rng);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = static_cast<double>(val_dist(rng));
        const DerivativeSpectrum d(WavenumberGrid::uniform(0.0, 1.0, v.size()), v, {});
        const auto got = detect_peaks(d).records;
        const auto ref = oracle::peaks(d.grid.values(), d.values);
        ok = got.size() == ref.size();
        for (std::size_t i = 0; ok && i < ref.size(); ++i)
            ok = got[i].position == ref[i].position && got[i].area == ref[i].area &&
                 got[i].rounded_index == ref[i].rounded_index;
    }
    report(4, "peak detector matches brute-force reference exactly", ok && t.seconds() < 10.0);
}

// ---- 5: baseline suppression --------------------------------------------

void criterion_baseline_suppression() {
    Timer t;
    const auto grid = WavenumberGrid::uniform(600.0, 1.0, 1151);
    const double sigma = 10.0, center = 1100.0, amp = 1.0;
    std::vector<double> y(grid.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double u = (grid[i] - grid.front()) / grid.span();
        const double baseline = amp * (0.2 + 0.8 * u - 0.3 * u * u + 0.3 * u * u * u);
        y[i] = baseline + amp * std::exp(-0.5 * std::pow((grid[i] - center) / sigma, 2));
    }
    const auto d = differentiate(Spectrum(grid, y));
    double near = 0.0, far = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        const double dist = std::abs(d.grid[i] - center);
        if (dist <= 3.0 * sigma) near = std::max(near, std::abs(d.values[i]));
        if (dist > 10.0 * sigma) far = std::max(far, std::abs(d.values[i]));
    }
    report(5, "derivative suppresses slowly varying baseline", near >= 5.0 * far && t.seconds() < 1.0,
           "ratio " + std::to_string(near / far));
}

// ---- 6 & 7: end-to-end planted-peak recovery and determinism ------------

PipelineConfig e2e_config(const std::string& out_dir) {
    PipelineConfig cfg;
    cfg.synth = default_light_stress_config(2024);
    cfg.out_dir = out_dir;
    cfg.train.epochs = 300;
    cfg.train.batch_size = 40;
    cfg.train.learning_rate = 1e-3;
    cfg.train.seed = 2024;
    cfg.train.kl_weight = 1.0;
    cfg.top_k = 5;
    return cfg;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criteria_end_to_end(const fs::path& tmp) {
    Timer t;
    const auto cfg = e2e_config((tmp / "run1").string());
    const auto res = run_pipeline(cfg);

    // (a) latent separation: inter-median distance > 2x pooled intra MAD
    bool sep_ok = true;
    std::string sep_detail;
    for (const auto& row : separation_stats(res.train_embedding)) {
        const bool pair_ok = row.inter_median_distance > 2.0 * row.pooled_intra_mad;
        sep_ok = sep_ok && pair_ok;
        if (!pair_ok)
            sep_detail += row.label_a + "/" + row.label_b + " dist " +
                          std::to_string(row.inter_median_distance) + " mad " +
                          std::to_string(row.pooled_intra_mad) + "; ";
    }

    // (b) for every condition, >= 4 of the top-5 peaks near planted centers,
    // with ordering consistent with the brute-force ground truth
    const std::vector<double> centers = {742.0, 1150.0, 1180.0, 1318.0, 1521.0};
    const double step = 1150.0 / 871.0;
    const double tol = 2.0 * step;
    bool peaks_ok = true;
    std::string peak_detail;
    for (const auto& cond : res.report.conditions) {
        const auto gt = ground_truth(*cfg.synth, cond.condition, 5);
        auto nearest_center = [&](double pos) {
            int best = -1;
            double best_d = tol;
            for (std::size_t c = 0; c < centers.size(); ++c)
                if (std::abs(pos - centers[c]) <= best_d) {
                    best_d = std::abs(pos - centers[c]);
                    best = static_cast<int>(c);
                }
            return best;
        };
        int matched = 0;
        std::vector<int> matched_centers;  // in reported (area-ranked) order
        for (const auto& p : cond.peaks) {
            const int c = nearest_center(p.position);
            if (c >= 0) {
                ++matched;
                matched_centers.push_back(c);
            }
        }
        // ground-truth rank of each center
        std::vector<int> gt_rank(centers.size(), -1);
        for (std::size_t g = 0; g < gt.size(); ++g) {
            const int c = nearest_center(gt[g]);
            if (c >= 0) gt_rank[static_cast<std::size_t>(c)] = static_cast<int>(g);
        }
        bool order_ok = true;
        for (std::size_t i = 0; i + 1 < matched_centers.size(); ++i) {
            const int ra = gt_rank[static_cast<std::size_t>(matched_centers[i])];
            const int rb = gt_rank[static_cast<std::size_t>(matched_centers[i + 1])];
            if (ra < 0 || rb < 0 || ra > rb) order_ok = false;
        }
        if (matched < 4 || !order_ok) {
            peaks_ok = false;
            peak_detail += cond.condition + " matched " + std::to_string(matched) +
                           (order_ok ? "" : " order-mismatch") + "; ";
        }
    }

    const double runtime = t.seconds();
    report(6, "end-to-end planted-peak recovery", sep_ok && peaks_ok && runtime < 300.0,
           sep_detail + peak_detail + "runtime " + std::to_string(runtime) + " s");

    // criterion 7: a second identical run is byte-identical
    Timer t7;
    auto cfg2 = e2e_config((tmp / "run2").string());
    run_pipeline(cfg2);
    bool det_ok = true;
    for (const char* name : {"report.json", "latent.csv", "model.ckpt"}) {
        const std::string a = read_file(tmp / "run1" / name);
        const std::string b = read_file(tmp / "run2" / name);
        // out_dir differs inside the config echo; normalize it before comparing
        std::string an = a, bn = b;
        auto strip = [](std::string& s, const std::string& what) {
            for (std::size_t pos = s.find(what); pos != std::string::npos; pos = s.find(what))
                s.erase(pos, what.size());
        };
        strip(an, "run1");
        strip(bn, "run2");
        det_ok = det_ok && !a.empty() && an == bn;
    }
    report(7, "pipeline determinism (byte-identical outputs)", det_ok && t7.seconds() < 300.0);
}

// ---- 8: noise-floor specificity -----------------------------------------

void criterion_noise_floor(const fs::path& tmp) {
    Timer t;
    // pure-noise corpus: flat zero baseline + noise only
    SynthConfig noise_cfg{WavenumberGrid::uniform(600.0, 1150.0 / 871.0, 872),
                          {{"noise", {}}}, {}, 6.0, 0.0, 0.0, 40, 88};
    noise_cfg.baseline.poly_coeffs = {100.0};

    // noise floor: the typical (median) top-5 peak area that pure noise
    // produces; individual noise peaks routinely reach ~3x the all-peak
    // median, so the floor has to be measured on the same top-k statistic
    // that detection reports
    std::vector<double> areas;
    for (const auto& s : gen_dataset(noise_cfg)) {
        const auto ranked = detect_peaks(differentiate(s));
        for (const auto& p : top_k(ranked, 5)) areas.push_back(p.area);
    }
    std::sort(areas.begin(), areas.end());
    const double median_area = areas.empty() ? 0.0 : areas[areas.size() / 2];
    const double threshold = 3.0 * median_area;

    // baseline-plus-noise corpus with no planted peaks, same noise level
    SynthConfig base_cfg = noise_cfg;
    base_cfg.seed = 89;
    base_cfg.baseline.poly_coeffs = {1200.0, -500.0, 120.0};
    base_cfg.baseline.has_hump = true;
    base_cfg.baseline.hump_center = 950.0;
    base_cfg.baseline.hump_amplitude = 600.0;
    base_cfg.baseline.hump_width = 350.0;

    const auto corpus = gen_dataset(base_cfg);
    double max_area_per = 0.0;
    for (const auto& s : corpus)
        for (const auto& p : detect_peaks(differentiate(s)).records)
            max_area_per = std::max(max_area_per, p.area);

    // record the threshold in a report through the pipeline config echo
    PipelineConfig pcfg;
    pcfg.synth = base_cfg;
    pcfg.out_dir = (tmp / "noise").string();
    pcfg.train.epochs = 10;
    pcfg.train.seed = 88;
    pcfg.noise_floor_area = threshold;
    run_pipeline(pcfg);
    const auto rep = read_report((tmp / "noise" / "report.json").string());
    const bool recorded = rep.noise_floor_area && *rep.noise_floor_area == threshold;

    const bool ok = max_area_per <= threshold && recorded && t.seconds() < 60.0;
    report(8, "noise-floor specificity on a peak-free corpus", ok,
           "max area " + std::to_string(max_area_per) + " vs threshold " +
               std::to_string(threshold) + ", runtime " + std::to_string(t.seconds()) + " s");
}

}  // namespace

int main() {
    const fs::path tmp = fs::temp_directory_path() / "diva-acceptance";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    criterion_loss_closed_forms();
    criterion_gradients();
    criterion_round_trip();
    criterion_peak_oracle();
    criterion_baseline_suppression();
    criteria_end_to_end(tmp);
    criterion_noise_floor(tmp);

    fs::remove_all(tmp);
    if (g_failures) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
