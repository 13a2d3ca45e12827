#pragma once

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diva/latent.hpp"
#include "diva/peaks.hpp"
#include "diva/synth.hpp"
#include "diva/vae.hpp"

namespace diva {

namespace detail {

// Shortest-but-lossless double formatting for CSV output.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back;
    if (std::sscanf(buf, "%lf", &back) == 1 && back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[32];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            if (std::sscanf(shorter, "%lf", &back) == 1 && back == v) return shorter;
        }
    }
    return buf;
}

inline std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    double v;
    const char* begin = cell.c_str();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw DataError("non-numeric cell at row " + std::to_string(row) + ", column " +
                        std::to_string(col));
    return v;
}

}  // namespace detail

// Column-per-spectrum CSV with header
//   wavenumber,<condition>:<replicate>:<location>,...
inline std::vector<Spectrum> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");

    const auto header = detail::split_line(line, ',');
    if (header.size() < 2 || header[0] != "wavenumber")
        throw DataError(path + ": header must start with 'wavenumber' and name at least one spectrum");
    std::vector<SpectrumMeta> metas;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const auto parts = detail::split_line(header[c], ':');
        if (parts.size() != 3 || parts[0].empty())
            throw DataError(path + ": bad column header '" + header[c] + "' at column " +
                            std::to_string(c) + " (want condition:replicate:location)");
        for (std::size_t p = 1; p < c; ++p)
            if (header[p] == header[c])
                throw DataError(path + ": duplicate column header '" + header[c] + "' at column " +
                                std::to_string(c));
        SpectrumMeta m;
        m.condition = parts[0];
        try {
            m.replicate_id = std::stoi(parts[1]);
            m.location_id = std::stoi(parts[2]);
        } catch (const std::exception&) {
            throw DataError(path + ": non-integer replicate/location in header column " +
                            std::to_string(c));
        }
        metas.push_back(std::move(m));
    }

    std::vector<double> grid;
    std::vector<std::vector<double>> cols(metas.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = detail::split_line(line, ',');
        if (cells.size() != header.size())
            throw DataError(path + ": ragged row " + std::to_string(row) + " (" +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()) + ")");
        const double w = detail::parse_cell(cells[0], row, 0);
        if (!grid.empty() && w <= grid.back())
            throw DataError(path + ": wavenumbers not strictly increasing at row " +
                            std::to_string(row));
        grid.push_back(w);
        for (std::size_t c = 1; c < cells.size(); ++c)
            cols[c - 1].push_back(detail::parse_cell(cells[c], row, c));
    }
    WavenumberGrid g(std::move(grid));
    std::vector<Spectrum> out;
    out.reserve(metas.size());
    for (std::size_t i = 0; i < metas.size(); ++i)
        out.emplace_back(g, std::move(cols[i]), metas[i]);
    return out;
}

inline const std::vector<double>& values_of(const Spectrum& s) { return s.intensities; }
inline const std::vector<double>& values_of(const DerivativeSpectrum& d) { return d.values; }

template <class SpectrumLike>
inline void save_csv(const std::string& path, const std::vector<SpectrumLike>& ds) {
    if (ds.empty()) throw DataError("save_csv: empty dataset");
    for (const auto& s : ds)
        if (!(s.grid == ds.front().grid)) throw DataError("save_csv: spectra must share one grid");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "wavenumber";
    for (const auto& s : ds)
        out << ',' << s.meta.condition << ':' << s.meta.replicate_id << ':' << s.meta.location_id;
    out << '\n';
    const auto& grid = ds.front().grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << detail::fmt_double(grid[i]);
        for (const auto& s : ds) out << ',' << detail::fmt_double(values_of(s)[i]);
        out << '\n';
    }
}

// ---- model checkpoint ----------------------------------------------------
//
// Versioned text container; tensors are stored row-major as hexadecimal
// IEEE-754 bit patterns so the write/read round trip is bit-exact. The
// trailing checksum is the FNV-1a digest of the parameters.

namespace detail {

inline std::string double_hex(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, bits);
    return buf;
}

inline double hex_double(const std::string& s) {
    std::uint64_t bits = 0;
    if (s.size() != 16 || std::sscanf(s.c_str(), "%" SCNx64, &bits) != 1)
        throw DataError("checkpoint: bad tensor value '" + s + "'");
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

inline void write_tensor(std::ostream& out, const std::vector<double>& t) {
    for (std::size_t i = 0; i < t.size(); ++i) out << (i ? " " : "") << double_hex(t[i]);
    out << '\n';
}

inline std::vector<double> read_tensor(std::istream& in, std::size_t n) {
    std::vector<double> t(n);
    std::string tok;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> tok)) throw DataError("checkpoint: truncated tensor");
        t[i] = hex_double(tok);
    }
    return t;
}

}  // namespace detail

inline void write_checkpoint(const std::string& path, const VaeModel& m) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "diva-vae-checkpoint v1\n";
    out << "dims " << m.input_dim << ' ' << m.latent_dim << '\n';
    out << "alpha " << detail::double_hex(m.leaky_alpha) << '\n';
    for (const auto* l : {&m.enc1, &m.enc2, &m.dec1, &m.dec2}) {
        out << "layer " << l->in_dim << ' ' << l->out_dim << '\n';
        detail::write_tensor(out, l->weights);
        detail::write_tensor(out, l->biases);
    }
    char sum[20];
    std::snprintf(sum, sizeof(sum), "%016" PRIx64, model_checksum(m));
    out << "checksum " << sum << '\n';
}

inline VaeModel read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string magic, version, key;
    in >> magic >> version;
    if (magic != "diva-vae-checkpoint" || version != "v1")
        throw DataError(path + ": not a v1 checkpoint");
    std::size_t input_dim = 0, latent_dim = 0;
    in >> key >> input_dim >> latent_dim;
    if (key != "dims" || latent_dim != 2) throw DataError(path + ": bad dims record");
    std::string alpha_hex;
    in >> key >> alpha_hex;
    if (key != "alpha") throw DataError(path + ": bad alpha record");
    VaeModel m(input_dim, detail::hex_double(alpha_hex));
    for (auto* l : {&m.enc1, &m.enc2, &m.dec1, &m.dec2}) {
        std::size_t in_dim = 0, out_dim = 0;
        in >> key >> in_dim >> out_dim;
        if (key != "layer" || in_dim != l->in_dim || out_dim != l->out_dim)
            throw DataError(path + ": unexpected layer dimensions");
        l->weights = detail::read_tensor(in, in_dim * out_dim);
        l->biases = detail::read_tensor(in, out_dim);
    }
    std::uint64_t stored = 0;
    std::string sum_hex;
    in >> key >> sum_hex;
    if (key != "checksum" || std::sscanf(sum_hex.c_str(), "%" SCNx64, &stored) != 1)
        throw DataError(path + ": missing checksum");
    if (stored != model_checksum(m)) throw DataError(path + ": checksum mismatch");
    return m;
}

// ---- peak report ---------------------------------------------------------

struct ReportedPeak {
    double position = 0.0;
    long rounded_index = 0;
    double area = 0.0;
    std::optional<std::string> annotation;

    bool operator==(const ReportedPeak&) const = default;
};

struct ConditionReport {
    std::string condition;
    std::array<double, 2> latent_median{};
    std::vector<ReportedPeak> peaks;

    bool operator==(const ConditionReport&) const = default;
};

struct PeakReport {
    std::vector<ConditionReport> conditions;
    std::string model_checksum;
    nlohmann::json config_echo;
    long long seed = 0;
    std::optional<double> noise_floor_area;

    bool operator==(const PeakReport&) const = default;
};

inline nlohmann::json to_json(const PeakReport& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["model_checksum"] = r.model_checksum;
    j["config"] = r.config_echo;
    if (r.noise_floor_area) j["noise_floor_area"] = *r.noise_floor_area;
    j["conditions"] = nlohmann::json::array();
    for (const auto& c : r.conditions) {
        nlohmann::json jc;
        jc["condition"] = c.condition;
        jc["latent_median"] = {c.latent_median[0], c.latent_median[1]};
        jc["peaks"] = nlohmann::json::array();
        for (const auto& p : c.peaks) {
            nlohmann::json jp;
            jp["position"] = p.position;
            jp["rounded_index"] = p.rounded_index;
            jp["area"] = p.area;
            if (p.annotation) jp["annotation"] = *p.annotation;
            jc["peaks"].push_back(std::move(jp));
        }
        j["conditions"].push_back(std::move(jc));
    }
    return j;
}

inline PeakReport report_from_json(const nlohmann::json& j) {
    PeakReport r;
    r.seed = j.at("seed").get<long long>();
    r.model_checksum = j.at("model_checksum").get<std::string>();
    r.config_echo = j.at("config");
    if (j.contains("noise_floor_area")) r.noise_floor_area = j["noise_floor_area"].get<double>();
    for (const auto& jc : j.at("conditions")) {
        ConditionReport c;
        c.condition = jc.at("condition").get<std::string>();
        c.latent_median = {jc.at("latent_median")[0].get<double>(),
                           jc.at("latent_median")[1].get<double>()};
        for (const auto& jp : jc.at("peaks")) {
            ReportedPeak p;
            p.position = jp.at("position").get<double>();
            p.rounded_index = jp.at("rounded_index").get<long>();
            p.area = jp.at("area").get<double>();
            if (jp.contains("annotation")) p.annotation = jp["annotation"].get<std::string>();
            c.peaks.push_back(std::move(p));
        }
        r.conditions.push_back(std::move(c));
    }
    return r;
}

inline void write_report(const std::string& path, const PeakReport& r) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << to_json(r).dump(2) << '\n';
}

inline PeakReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return report_from_json(j);
}

// ---- latent coordinates CSV ---------------------------------------------

inline void write_latent_csv(const std::string& path, const LatentEmbedding& train,
                             const LatentEmbedding& test) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "condition,replicate,location,set,mu1,mu2,logvar1,logvar2\n";
    auto emit = [&out](const LatentEmbedding& e, const char* tag) {
        for (const auto& p : e.points) {
            out << p.meta.condition << ',' << p.meta.replicate_id << ',' << p.meta.location_id
                << ',' << tag;
            for (double v : {p.mu[0], p.mu[1], p.logvar[0], p.logvar[1]})
                out << ',' << detail::fmt_double(v);
            out << '\n';
        }
    };
    emit(train, "train");
    emit(test, "test");
}

// ---- synthetic corpus manifest ------------------------------------------

inline nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
    nlohmann::json j;
    j["grid"] = cfg.grid.values();
    j["seed"] = cfg.seed;
    j["noise_sigma"] = cfg.noise_sigma;
    j["spike_probability"] = cfg.spike_probability;
    j["spike_amplitude"] = cfg.spike_amplitude;
    j["replicates_per_condition"] = cfg.replicates_per_condition;
    j["baseline"] = {{"poly_coeffs", cfg.baseline.poly_coeffs}};
    if (cfg.baseline.has_hump)
        j["baseline"]["hump"] = {{"center", cfg.baseline.hump_center},
                                 {"amplitude", cfg.baseline.hump_amplitude},
                                 {"width", cfg.baseline.hump_width}};
    j["conditions"] = nlohmann::json::array();
    for (const auto& c : cfg.conditions) {
        nlohmann::json jc;
        jc["label"] = c.label;
        jc["peaks"] = nlohmann::json::array();
        for (const auto& p : c.peaks)
            jc["peaks"].push_back({{"center", p.center},
                                   {"amplitude", p.amplitude},
                                   {"width", p.width},
                                   {"shape", p.shape == PeakShape::gaussian ? "gaussian" : "lorentzian"}});
        j["conditions"].push_back(std::move(jc));
    }
    return j;
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig cfg{WavenumberGrid(j.at("grid").get<std::vector<double>>()),
                    {}, {}, 0.0, 0.0, 0.0, 1, 0};
    cfg.seed = j.at("seed").get<long long>();
    cfg.noise_sigma = j.value("noise_sigma", 0.0);
    cfg.spike_probability = j.value("spike_probability", 0.0);
    cfg.spike_amplitude = j.value("spike_amplitude", 0.0);
    cfg.replicates_per_condition = j.value("replicates_per_condition", 1);
    if (j.contains("baseline")) {
        const auto& jb = j["baseline"];
        cfg.baseline.poly_coeffs = jb.value("poly_coeffs", std::vector<double>{});
        if (jb.contains("hump")) {
            cfg.baseline.has_hump = true;
            cfg.baseline.hump_center = jb["hump"].at("center").get<double>();
            cfg.baseline.hump_amplitude = jb["hump"].at("amplitude").get<double>();
            cfg.baseline.hump_width = jb["hump"].at("width").get<double>();
        }
    }
    for (const auto& jc : j.at("conditions")) {
        SynthCondition c;
        c.label = jc.at("label").get<std::string>();
        for (const auto& jp : jc.at("peaks")) {
            PeakSpec p;
            p.center = jp.at("center").get<double>();
            p.amplitude = jp.at("amplitude").get<double>();
            p.width = jp.at("width").get<double>();
            p.shape = jp.value("shape", "lorentzian") == std::string("gaussian")
                          ? PeakShape::gaussian
                          : PeakShape::lorentzian;
            c.peaks.push_back(p);
        }
        cfg.conditions.push_back(std::move(c));
    }
    return cfg;
}

// Manifest: full config plus per-spectrum seeds, for exact regeneration.
inline void write_manifest(const std::string& path, const SynthConfig& cfg) {
    nlohmann::json j;
    j["config"] = synth_config_to_json(cfg);
    j["spectrum_seeds"] = nlohmann::json::array();
    for (std::size_t ci = 0; ci < cfg.conditions.size(); ++ci)
        for (int r = 0; r < cfg.replicates_per_condition; ++r)
            j["spectrum_seeds"].push_back({{"condition", cfg.conditions[ci].label},
                                           {"replicate", r},
                                           {"seed", spectrum_seed(cfg.seed, ci, r)}});
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace diva
