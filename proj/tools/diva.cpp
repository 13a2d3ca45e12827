// Command-line front end for the spectral stress-analysis workflow.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training divergence.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "diva/diva.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::optional<long long> seed;
    std::optional<std::size_t> top_k;
    std::optional<int> epochs;
    std::optional<std::string> out;
};

diva::PipelineConfig resolve_config(const std::string& config_path, const Overrides& ov) {
    diva::PipelineConfig cfg;
    if (!config_path.empty()) cfg = diva::load_pipeline_config(config_path);
    if (ov.seed) {
        cfg.train.seed = *ov.seed;
        if (cfg.synth) cfg.synth->seed = *ov.seed;
    }
    if (ov.top_k) cfg.top_k = *ov.top_k;
    if (ov.epochs) cfg.train.epochs = *ov.epochs;
    if (ov.out) cfg.out_dir = *ov.out;
    return cfg;
}

int cmd_synth(const std::string& config_path, const std::string& preset, const Overrides& ov,
              const std::string& out_csv, std::string manifest_path) {
    diva::SynthConfig cfg = [&] {
        if (!preset.empty()) {
            if (preset != "light-stress") throw diva::DataError("unknown preset '" + preset + "'");
            return diva::default_light_stress_config(ov.seed.value_or(1));
        }
        if (config_path.empty()) throw diva::DataError("synth needs --config or --preset");
        std::ifstream in(config_path);
        if (!in) throw diva::DataError("cannot open " + config_path);
        nlohmann::json j;
        in >> j;
        auto c = diva::synth_config_from_json(j.contains("synth") ? j["synth"] : j);
        if (ov.seed) c.seed = *ov.seed;
        return c;
    }();

    const auto dataset = diva::gen_dataset(cfg);
    diva::save_csv(out_csv, dataset);
    if (manifest_path.empty()) manifest_path = out_csv + ".manifest.json";
    diva::write_manifest(manifest_path, cfg);
    std::cout << "wrote " << dataset.size() << " spectra to " << out_csv << "\n";
    return 0;
}

int cmd_preprocess(const std::string& config_path, const Overrides& ov, const std::string& in_csv,
                   const std::string& out_csv) {
    const auto cfg = resolve_config(config_path, ov);
    auto raw = diva::load_csv(in_csv);
    std::vector<diva::Spectrum> prepared;
    for (const auto& s : raw) {
        auto t = diva::trim(s, cfg.trim_lo, cfg.trim_hi);
        t = diva::despike(t, cfg.despike_window, cfg.despike_z);
        if (cfg.calibration_offset != 0.0) t = diva::calibrate(t, cfg.calibration_offset);
        prepared.push_back(std::move(t));
    }
    auto [normalized, scale] = diva::normalize(prepared);
    std::vector<diva::DerivativeSpectrum> derivs;
    for (const auto& s : normalized) derivs.push_back(diva::differentiate(s));
    diva::save_csv(out_csv, derivs);
    std::cout << "wrote " << derivs.size() << " derivative spectra to " << out_csv
              << " (normalization factor " << scale.factor << ")\n";
    return 0;
}

std::vector<diva::DerivativeSpectrum> load_derivatives(const std::string& path) {
    std::vector<diva::DerivativeSpectrum> out;
    for (auto& s : diva::load_csv(path))
        out.emplace_back(s.grid, std::move(s.intensities), s.meta);
    return out;
}

int cmd_train(const std::string& config_path, const Overrides& ov, const std::string& in_csv,
              const std::string& out_ckpt) {
    const auto cfg = resolve_config(config_path, ov);
    const auto derivs = load_derivatives(in_csv);
    auto [model, report] = diva::train(derivs, cfg.train);
    diva::write_checkpoint(out_ckpt, model);
    std::printf("trained %d epochs, final elbo %.6g, checksum %016" PRIx64 "\n", cfg.train.epochs,
                report.epochs.back().elbo, report.model_checksum);
    return 0;
}

int cmd_analyze(const std::string& config_path, const Overrides& ov, const std::string& model_path,
                const std::string& in_csv, const std::string& out_dir) {
    const auto cfg = resolve_config(config_path, ov);
    const auto model = diva::read_checkpoint(model_path);
    const auto derivs = load_derivatives(in_csv);
    if (derivs.empty()) throw diva::DataError("no spectra in " + in_csv);

    const auto embedding = diva::embed_dataset(model, derivs);
    const auto clusters = diva::cluster_medians(embedding);
    std::vector<diva::CharacteristicSpectrum> characteristic;
    diva::PeakReport report;
    for (const auto& c : clusters) {
        characteristic.push_back(diva::decode_median(model, c, derivs.front().grid));
        const auto peaks = diva::top_k(diva::detect_peaks(characteristic.back().derivative), cfg.top_k);
        diva::ConditionReport cr;
        cr.condition = c.condition;
        cr.latent_median = c.median;
        for (const auto& p : peaks) {
            diva::ReportedPeak rp{p.position, p.rounded_index, p.area, std::nullopt};
            for (const auto& [wn, name] : cfg.annotations)
                if (std::abs(wn - p.position) <= cfg.annotation_tolerance) rp.annotation = name;
            cr.peaks.push_back(std::move(rp));
        }
        report.conditions.push_back(std::move(cr));
    }
    char sum[20];
    std::snprintf(sum, sizeof(sum), "%016" PRIx64, diva::model_checksum(model));
    report.model_checksum = sum;
    report.seed = cfg.train.seed;
    report.config_echo = diva::pipeline_config_to_json(cfg);
    report.noise_floor_area = cfg.noise_floor_area;

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    diva::write_report((out / "report.json").string(), report);
    diva::write_latent_csv((out / "latent.csv").string(), embedding, {});
    diva::plot::render_latent_scatter((out / "latent_scatter.svg").string(), embedding, clusters);
    diva::plot::render_characteristic_spectra((out / "characteristic_spectra.svg").string(),
                                              characteristic);
    diva::plot::render_peak_chart((out / "peaks.svg").string(), report);
    std::cout << "wrote analysis for " << clusters.size() << " conditions to " << out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& in_path) {
    const auto report = diva::read_report(in_path);
    if (!(diva::report_from_json(diva::to_json(report)) == report))
        throw diva::DataError(in_path + ": report does not round-trip");
    std::printf("seed %lld, model %s\n", report.seed, report.model_checksum.c_str());
    if (report.noise_floor_area)
        std::printf("noise floor area threshold: %.6g\n", *report.noise_floor_area);
    for (const auto& c : report.conditions) {
        std::printf("%s  median (%.4f, %.4f)\n", c.condition.c_str(), c.latent_median[0],
                    c.latent_median[1]);
        for (const auto& p : c.peaks)
            std::printf("  %8.2f 1/cm  idx %4ld  area %.6g%s%s\n", p.position, p.rounded_index,
                        p.area, p.annotation ? "  " : "",
                        p.annotation ? p.annotation->c_str() : "");
    }
    return 0;
}

int cmd_pipeline(const std::string& config_path, const Overrides& ov) {
    if (config_path.empty()) throw diva::DataError("pipeline needs --config");
    const auto cfg = resolve_config(config_path, ov);
    const auto res = diva::run_pipeline(cfg);
    std::cout << "pipeline complete: " << res.report.conditions.size() << " conditions, report in "
              << cfg.out_dir << "/report.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Raman spectral stress analysis: derivative preprocessing, VAE latent clustering, "
                 "and significant-peak detection"};
    app.require_subcommand(1);

    std::string config_path, preset, in_path, out_path, model_path, manifest_path;
    Overrides ov;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "pipeline config JSON");
        sub->add_option("--seed", ov.seed, "override RNG seed");
        sub->add_option("--top-k", ov.top_k, "peaks reported per condition");
        sub->add_option("--epochs", ov.epochs, "override training epochs");
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus CSV + manifest");
    add_common(synth);
    synth->add_option("--preset", preset, "built-in corpus preset (light-stress)");
    synth->add_option("--out", out_path, "output corpus CSV")->required();
    synth->add_option("--manifest", manifest_path, "manifest path (default <out>.manifest.json)");

    auto* pre = app.add_subcommand("preprocess", "trim/despike/normalize/differentiate a corpus");
    add_common(pre);
    pre->add_option("--in", in_path, "input corpus CSV")->required();
    pre->add_option("--out", out_path, "output derivative CSV")->required();

    auto* tr = app.add_subcommand("train", "train the VAE on a derivative CSV");
    add_common(tr);
    tr->add_option("--in", in_path, "derivative CSV")->required();
    tr->add_option("--out", out_path, "output model checkpoint")->required();

    auto* an = app.add_subcommand("analyze", "embed, decode medians, and detect peaks");
    add_common(an);
    an->add_option("--model", model_path, "model checkpoint")->required();
    an->add_option("--in", in_path, "derivative CSV")->required();
    an->add_option("--out", out_path, "output directory")->required();

    auto* rep = app.add_subcommand("report", "pretty-print and validate a report file");
    rep->add_option("--in", in_path, "report JSON")->required();

    auto* pipe = app.add_subcommand("pipeline", "run the whole workflow from a config file");
    add_common(pipe);
    pipe->add_option("--out", ov.out, "output directory override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return cmd_synth(config_path, preset, ov, out_path, manifest_path);
        if (pre->parsed()) return cmd_preprocess(config_path, ov, in_path, out_path);
        if (tr->parsed()) return cmd_train(config_path, ov, in_path, out_path);
        if (an->parsed()) return cmd_analyze(config_path, ov, model_path, in_path, out_path);
        if (rep->parsed()) return cmd_report(in_path);
        if (pipe->parsed()) return cmd_pipeline(config_path, ov);
    } catch (const diva::TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
