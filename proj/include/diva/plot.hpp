#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "diva/io.hpp"
#include "diva/latent.hpp"

namespace diva {
namespace plot {

constexpr int kWidth = 760;
constexpr int kHeight = 520;
constexpr double kMarginL = 60, kMarginR = 20, kMarginT = 30, kMarginB = 45;

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    return colors[i % 8];
}

namespace detail {

struct Axes {
    double x0, x1, y0, y1;  // data range

    double px(double x) const {
        return kMarginL + (x - x0) / (x1 - x0) * (kWidth - kMarginL - kMarginR);
    }
    double py(double y) const {
        return kHeight - kMarginB - (y - y0) / (y1 - y0) * (kHeight - kMarginT - kMarginB);
    }
};

inline void pad_range(double& lo, double& hi) {
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
}

inline void open_svg(std::ofstream& out, const std::string& title) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
}

inline void draw_axes(std::ofstream& out, const std::string& xlabel, const std::string& ylabel) {
    out << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB << "\" x2=\""
        << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
        << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\"" << kMarginL
        << "\" y2=\"" << kHeight - kMarginB << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << (kMarginL + kWidth - kMarginR) / 2 << "\" y=\"" << kHeight - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
        << "</text>\n"
        << "<text x=\"14\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
        << kHeight / 2 << ")\">" << ylabel << "</text>\n";
}

inline void legend(std::ofstream& out, const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = kMarginT + 14.0 + 16.0 * static_cast<double>(i);
        out << "<rect x=\"" << kWidth - kMarginR - 140 << "\" y=\"" << y - 9
            << "\" width=\"10\" height=\"10\" fill=\"" << palette(i) << "\"/>\n"
            << "<text x=\"" << kWidth - kMarginR - 126 << "\" y=\"" << y
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << labels[i] << "</text>\n";
    }
}

}  // namespace detail

// Latent scatter colored by condition, cluster medians as larger diamonds.
inline void render_latent_scatter(const std::string& path, const LatentEmbedding& embedding,
                                  const std::vector<ClusterSummary>& clusters) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    detail::open_svg(out, "Latent space");
    detail::draw_axes(out, "z1", "z2");

    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    if (!embedding.points.empty()) {
        x0 = x1 = embedding.points.front().mu[0];
        y0 = y1 = embedding.points.front().mu[1];
        for (const auto& p : embedding.points) {
            x0 = std::min(x0, p.mu[0]);
            x1 = std::max(x1, p.mu[0]);
            y0 = std::min(y0, p.mu[1]);
            y1 = std::max(y1, p.mu[1]);
        }
    }
    detail::pad_range(x0, x1);
    detail::pad_range(y0, y1);
    const detail::Axes ax{x0, x1, y0, y1};

    std::vector<std::string> labels;
    auto color_index = [&labels](const std::string& cond) {
        auto it = std::find(labels.begin(), labels.end(), cond);
        if (it == labels.end()) {
            labels.push_back(cond);
            return labels.size() - 1;
        }
        return static_cast<std::size_t>(it - labels.begin());
    };

    for (const auto& p : embedding.points) {
        out << "<circle cx=\"" << ax.px(p.mu[0]) << "\" cy=\"" << ax.py(p.mu[1])
            << "\" r=\"3\" fill=\"" << palette(color_index(p.meta.condition))
            << "\" fill-opacity=\"0.6\"/>\n";
    }
    for (const auto& c : clusters) {
        const double cx = ax.px(c.median[0]), cy = ax.py(c.median[1]);
        out << "<path d=\"M " << cx << ' ' << cy - 7 << " L " << cx + 7 << ' ' << cy << " L "
            << cx << ' ' << cy + 7 << " L " << cx - 7 << ' ' << cy << " Z\" fill=\""
            << palette(color_index(c.condition)) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
    detail::legend(out, labels);
    out << "</svg>\n";
}

// Overlaid characteristic derivative spectra, one curve per condition.
inline void render_characteristic_spectra(const std::string& path,
                                          const std::vector<CharacteristicSpectrum>& spectra) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    detail::open_svg(out, "Characteristic derivative spectra");
    detail::draw_axes(out, "wavenumber (1/cm)", "D");

    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!spectra.empty()) {
        x0 = spectra.front().derivative.grid.front();
        x1 = spectra.front().derivative.grid.back();
        y0 = y1 = spectra.front().derivative.values.front();
        for (const auto& cs : spectra)
            for (double v : cs.derivative.values) {
                y0 = std::min(y0, v);
                y1 = std::max(y1, v);
            }
    }
    detail::pad_range(y0, y1);
    const detail::Axes ax{x0, x1, y0, y1};

    std::vector<std::string> labels;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const auto& cs = spectra[i];
        labels.push_back(cs.condition);
        out << "<polyline fill=\"none\" stroke=\"" << palette(i) << "\" stroke-width=\"1\" points=\"";
        for (std::size_t j = 0; j < cs.derivative.values.size(); ++j)
            out << ax.px(cs.derivative.grid[j]) << ',' << ax.py(cs.derivative.values[j]) << ' ';
        out << "\"/>\n";
    }
    detail::legend(out, labels);
    out << "</svg>\n";
}

// Per-condition top-k peaks: bar height is area, with a dotted marker line
// at each peak position.
inline void render_peak_chart(const std::string& path, const PeakReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    detail::open_svg(out, "Significant peaks");
    detail::draw_axes(out, "wavenumber (1/cm)", "A");

    double x0 = 600, x1 = 1750, a_max = 0;
    bool have_range = false;
    for (const auto& c : report.conditions)
        for (const auto& p : c.peaks) {
            if (!have_range) {
                x0 = x1 = p.position;
                have_range = true;
            }
            x0 = std::min(x0, p.position);
            x1 = std::max(x1, p.position);
            a_max = std::max(a_max, p.area);
        }
    detail::pad_range(x0, x1);
    if (a_max == 0) a_max = 1;
    const detail::Axes ax{x0, x1, 0.0, 1.05 * a_max};

    std::vector<std::string> labels;
    for (std::size_t i = 0; i < report.conditions.size(); ++i) {
        const auto& c = report.conditions[i];
        labels.push_back(c.condition);
        const double shift = 2.0 * static_cast<double>(i);
        for (const auto& p : c.peaks) {
            const double bx = ax.px(p.position) + shift;
            out << "<line x1=\"" << bx << "\" y1=\"" << kMarginT << "\" x2=\"" << bx << "\" y2=\""
                << kHeight - kMarginB
                << "\" stroke=\"#bbbbbb\" stroke-width=\"0.5\" stroke-dasharray=\"2,3\"/>\n";
            out << "<rect x=\"" << bx - 1.5 << "\" y=\"" << ax.py(p.area) << "\" width=\"3\" height=\""
                << (kHeight - kMarginB) - ax.py(p.area) << "\" fill=\"" << palette(i) << "\"/>\n";
        }
    }
    detail::legend(out, labels);
    out << "</svg>\n";
}

}  // namespace plot
}  // namespace diva
