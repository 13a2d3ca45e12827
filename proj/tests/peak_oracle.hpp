#pragma once

// Brute-force reference for the zero-crossing peak chain, used by the unit
// and acceptance suites. Kept independent of the production detector.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct OraclePeak {
    double position;
    long rounded_index;
    double area;
};

inline std::vector<OraclePeak> peaks(const std::vector<double>& g, const std::vector<double>& v) {
    struct C {
        double pos;
        double fidx;
        int dir;  // +1 pos->neg, -1 neg->pos
    };
    std::vector<C> cs;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double a = v[i], b = v[i + 1];
        if (a > 0.0 && b < 0.0) {
            const double t = a / (a - b);
            cs.push_back({g[i] + t * (g[i + 1] - g[i]), static_cast<double>(i) + t, +1});
        } else if (a < 0.0 && b > 0.0) {
            const double t = a / (a - b);
            cs.push_back({g[i] + t * (g[i + 1] - g[i]), static_cast<double>(i) + t, -1});
        } else if (a == 0.0 && i > 0 && v[i - 1] != 0.0 && b != 0.0 &&
                   (v[i - 1] > 0.0) != (b > 0.0)) {
            cs.push_back({g[i], static_cast<double>(i), v[i - 1] > 0.0 ? +1 : -1});
        }
    }
    std::vector<OraclePeak> out;
    for (std::size_t k = 0; k < cs.size(); ++k) {
        if (cs[k].dir != +1) continue;
        if (k == 0 || k + 1 == cs.size()) continue;  // boundary discard
        double area = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (g[j] > cs[k - 1].pos && g[j] < cs[k + 1].pos) area += std::abs(v[j]);
        out.push_back({cs[k].pos, std::lround(cs[k].fidx), area});
    }
    std::stable_sort(out.begin(), out.end(), [](const OraclePeak& a, const OraclePeak& b) {
        if (a.area != b.area) return a.area > b.area;
        return a.position < b.position;
    });
    return out;
}

}  // namespace oracle
