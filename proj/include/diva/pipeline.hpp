#pragma once

#include <cinttypes>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diva/io.hpp"
#include "diva/plot.hpp"

namespace diva {

struct PipelineConfig {
    std::string input_csv;                 // corpus on disk, or
    std::optional<SynthConfig> synth;      // generate the corpus in-process
    std::string out_dir = "out";

    double trim_lo = 600.0;
    double trim_hi = 1750.0;
    int despike_window = 5;
    double despike_z = 8.0;
    double calibration_offset = 0.0;
    bool average_locations = false;        // average replicates per (condition, location)
    double split_fraction = 0.9;
    TrainConfig train;
    std::size_t top_k = 5;
    bool include_test_in_medians = false;
    std::map<double, std::string> annotations;  // wavenumber -> biomolecule
    double annotation_tolerance = 5.0;          // cm^-1
    std::optional<double> noise_floor_area;     // echoed into the report
};

inline nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg) {
    nlohmann::json j;
    if (!cfg.input_csv.empty()) j["input_csv"] = cfg.input_csv;
    if (cfg.synth) j["synth"] = synth_config_to_json(*cfg.synth);
    j["out_dir"] = cfg.out_dir;
    j["trim"] = {{"lo", cfg.trim_lo}, {"hi", cfg.trim_hi}};
    j["despike"] = {{"window", cfg.despike_window}, {"z_threshold", cfg.despike_z}};
    j["calibration_offset"] = cfg.calibration_offset;
    j["average_locations"] = cfg.average_locations;
    j["split_fraction"] = cfg.split_fraction;
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"seed", cfg.train.seed},
                  {"kl_weight", cfg.train.kl_weight}};
    j["top_k"] = cfg.top_k;
    j["include_test_in_medians"] = cfg.include_test_in_medians;
    if (!cfg.annotations.empty()) {
        j["annotations"] = nlohmann::json::object();
        for (const auto& [wn, name] : cfg.annotations)
            j["annotations"][detail::fmt_double(wn)] = name;
        j["annotation_tolerance"] = cfg.annotation_tolerance;
    }
    if (cfg.noise_floor_area) j["noise_floor_area"] = *cfg.noise_floor_area;
    return j;
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    cfg.input_csv = j.value("input_csv", std::string{});
    if (j.contains("synth")) cfg.synth = synth_config_from_json(j["synth"]);
    cfg.out_dir = j.value("out_dir", std::string{"out"});
    if (j.contains("trim")) {
        cfg.trim_lo = j["trim"].value("lo", 600.0);
        cfg.trim_hi = j["trim"].value("hi", 1750.0);
    }
    if (j.contains("despike")) {
        cfg.despike_window = j["despike"].value("window", 5);
        cfg.despike_z = j["despike"].value("z_threshold", 8.0);
    }
    cfg.calibration_offset = j.value("calibration_offset", 0.0);
    cfg.average_locations = j.value("average_locations", false);
    cfg.split_fraction = j.value("split_fraction", 0.9);
    if (j.contains("train")) {
        const auto& jt = j["train"];
        cfg.train.epochs = jt.value("epochs", 3000);
        cfg.train.batch_size = jt.value("batch_size", 40);
        cfg.train.learning_rate = jt.value("learning_rate", 1e-3);
        cfg.train.seed = jt.value("seed", 0ll);
        cfg.train.kl_weight = jt.value("kl_weight", 1.0);
    }
    if (j.contains("synth_preset")) {
        const auto name = j["synth_preset"].get<std::string>();
        if (name != "light-stress") throw DataError("unknown synth preset '" + name + "'");
        cfg.synth = default_light_stress_config(cfg.train.seed);
    }
    cfg.top_k = j.value("top_k", std::size_t{5});
    cfg.include_test_in_medians = j.value("include_test_in_medians", false);
    if (j.contains("annotations")) {
        for (const auto& [key, val] : j["annotations"].items())
            cfg.annotations[std::stod(key)] = val.get<std::string>();
        cfg.annotation_tolerance = j.value("annotation_tolerance", 5.0);
    }
    if (j.contains("noise_floor_area")) cfg.noise_floor_area = j["noise_floor_area"].get<double>();
    return cfg;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return pipeline_config_from_json(j);
}

namespace detail {

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const TrainingDiverged&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(std::string("[") + name + "] " + e.what());
    }
}

// Average all spectra sharing (condition, location) into one profile,
// mirroring the per-replicate averaging used for noisy acquisitions.
inline std::vector<Spectrum> average_locations(const std::vector<Spectrum>& ds) {
    std::vector<Spectrum> out;
    std::vector<int> counts;
    for (const auto& s : ds) {
        auto it = std::find_if(out.begin(), out.end(), [&](const Spectrum& a) {
            return a.meta.condition == s.meta.condition && a.meta.location_id == s.meta.location_id;
        });
        if (it == out.end()) {
            Spectrum acc = s;
            acc.meta.replicate_id = 0;
            out.push_back(std::move(acc));
            counts.push_back(1);
        } else {
            for (std::size_t i = 0; i < it->intensities.size(); ++i)
                it->intensities[i] += s.intensities[i];
            ++counts[static_cast<std::size_t>(it - out.begin())];
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k)
        for (double& v : out[k].intensities) v /= counts[k];
    return out;
}

}  // namespace detail

struct PipelineResult {
    PeakReport report;
    VaeModel model;
    TrainReport train_report;
    LatentEmbedding train_embedding;
    LatentEmbedding test_embedding;
    std::vector<ClusterSummary> clusters;
    std::vector<CharacteristicSpectrum> characteristic;
};

// The full workflow: load/generate -> trim -> despike -> calibrate ->
// normalize -> differentiate -> split -> train -> embed -> cluster medians
// -> decode -> peak detection -> report + plots. Seed-deterministic.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;

    std::vector<Spectrum> raw = detail::stage("load", [&] {
        if (cfg.synth) return gen_dataset(*cfg.synth);
        if (cfg.input_csv.empty()) throw DataError("no input: set input_csv or synth");
        return load_csv(cfg.input_csv);
    });

    std::vector<Spectrum> prepared = detail::stage("preprocess", [&] {
        std::vector<Spectrum> work;
        work.reserve(raw.size());
        for (const auto& s : raw) {
            Spectrum t = trim(s, cfg.trim_lo, cfg.trim_hi);
            t = despike(t, cfg.despike_window, cfg.despike_z);
            if (cfg.calibration_offset != 0.0) t = calibrate(t, cfg.calibration_offset);
            work.push_back(std::move(t));
        }
        if (cfg.average_locations) work = detail::average_locations(work);
        return work;
    });

    auto [normalized, scale] = detail::stage("normalize", [&] { return normalize(prepared); });
    (void)scale;

    std::vector<DerivativeSpectrum> derivatives = detail::stage("differentiate", [&] {
        std::vector<DerivativeSpectrum> out;
        out.reserve(normalized.size());
        for (const auto& s : normalized) out.push_back(differentiate(s));
        return out;
    });

    DatasetSplit ds = detail::stage("split", [&] {
        return split(derivatives, cfg.split_fraction, cfg.train.seed);
    });

    auto [model, train_report] = train(ds.train, cfg.train);

    PipelineResult res;
    res.model = std::move(model);
    res.train_report = std::move(train_report);

    detail::stage("analyze", [&] {
        res.train_embedding = embed_dataset(res.model, ds.train);
        res.test_embedding = embed_dataset(res.model, ds.test);

        LatentEmbedding for_medians = res.train_embedding;
        if (cfg.include_test_in_medians)
            for_medians.points.insert(for_medians.points.end(), res.test_embedding.points.begin(),
                                      res.test_embedding.points.end());
        res.clusters = cluster_medians(for_medians);

        const auto& grid = derivatives.front().grid;
        for (const auto& c : res.clusters) {
            res.characteristic.push_back(decode_median(res.model, c, grid));

            const auto peaks = top_k(detect_peaks(res.characteristic.back().derivative), cfg.top_k);
            ConditionReport cr;
            cr.condition = c.condition;
            cr.latent_median = c.median;
            for (const auto& p : peaks) {
                ReportedPeak rp;
                rp.position = p.position;
                rp.rounded_index = p.rounded_index;
                rp.area = p.area;
                for (const auto& [wn, name] : cfg.annotations)
                    if (std::abs(wn - p.position) <= cfg.annotation_tolerance) rp.annotation = name;
                cr.peaks.push_back(std::move(rp));
            }
            res.report.conditions.push_back(std::move(cr));
        }
        char sum[20];
        std::snprintf(sum, sizeof(sum), "%016" PRIx64, model_checksum(res.model));
        res.report.model_checksum = sum;
        res.report.seed = cfg.train.seed;
        res.report.config_echo = pipeline_config_to_json(cfg);
        res.report.noise_floor_area = cfg.noise_floor_area;
        return 0;
    });

    detail::stage("write", [&] {
        fs::create_directories(cfg.out_dir);
        const fs::path out(cfg.out_dir);
        write_report((out / "report.json").string(), res.report);
        write_latent_csv((out / "latent.csv").string(), res.train_embedding, res.test_embedding);
        write_checkpoint((out / "model.ckpt").string(), res.model);
        {
            std::ofstream tr(out / "train_report.csv");
            tr << "epoch,recon,kl,elbo\n";
            for (std::size_t e = 0; e < res.train_report.epochs.size(); ++e) {
                const auto& es = res.train_report.epochs[e];
                tr << e << ',' << detail::fmt_double(es.recon) << ',' << detail::fmt_double(es.kl)
                   << ',' << detail::fmt_double(es.elbo) << '\n';
            }
        }
        LatentEmbedding all = res.train_embedding;
        all.points.insert(all.points.end(), res.test_embedding.points.begin(),
                          res.test_embedding.points.end());
        plot::render_latent_scatter((out / "latent_scatter.svg").string(), all, res.clusters);
        plot::render_characteristic_spectra((out / "characteristic_spectra.svg").string(),
                                            res.characteristic);
        plot::render_peak_chart((out / "peaks.svg").string(), res.report);
        return 0;
    });

    return res;
}

}  // namespace diva
