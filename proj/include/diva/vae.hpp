#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "diva/spectrum.hpp"

namespace diva {

// Dense layer parameters, weights stored row-major (out_dim x in_dim).
struct LayerParams {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;
    std::vector<double> biases;

    LayerParams() = default;
    LayerParams(std::size_t in, std::size_t out)
        : in_dim(in), out_dim(out), weights(in * out, 0.0), biases(out, 0.0) {}

    double& w(std::size_t row, std::size_t col) { return weights[row * in_dim + col]; }
    double w(std::size_t row, std::size_t col) const { return weights[row * in_dim + col]; }

    bool operator==(const LayerParams&) const = default;
};

namespace detail {

// y = W x + b
inline void affine(const LayerParams& l, const std::vector<double>& x, std::vector<double>& y) {
    y.assign(l.out_dim, 0.0);
    for (std::size_t r = 0; r < l.out_dim; ++r) {
        double acc = l.biases[r];
        const double* wr = l.weights.data() + r * l.in_dim;
        for (std::size_t c = 0; c < l.in_dim; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

// g_x += W^T g_y; accumulates weight/bias gradients for input x.
inline void affine_backward(const LayerParams& l, const std::vector<double>& x,
                            const std::vector<double>& g_y, LayerParams& grad,
                            std::vector<double>& g_x) {
    g_x.assign(l.in_dim, 0.0);
    for (std::size_t r = 0; r < l.out_dim; ++r) {
        const double g = g_y[r];
        grad.biases[r] += g;
        double* gw = grad.weights.data() + r * l.in_dim;
        const double* wr = l.weights.data() + r * l.in_dim;
        for (std::size_t c = 0; c < l.in_dim; ++c) {
            gw[c] += g * x[c];
            g_x[c] += wr[c] * g;
        }
    }
}

}  // namespace detail

struct LatentStats {
    std::array<double, 2> mu{};
    std::array<double, 2> logvar{};
};

// Encoder input -> 64 -> 4 (mu, logvar concatenated), decoder 2 -> 64 -> input.
// The decoder's hidden activation is LeakyReLU with alpha defaulting to 1,
// i.e. an identity activation.
struct VaeModel {
    std::size_t input_dim = 0;
    std::size_t latent_dim = 2;
    double leaky_alpha = 1.0;
    LayerParams enc1, enc2, dec1, dec2;

    static constexpr std::size_t kHidden = 64;

    VaeModel() = default;
    VaeModel(std::size_t input, double alpha = 1.0)
        : input_dim(input), leaky_alpha(alpha),
          enc1(input, kHidden), enc2(kHidden, 2 * latent_dim),
          dec1(latent_dim, kHidden), dec2(kHidden, input) {
        if (input < 4) throw DataError("VAE input dimension must be at least 4");
    }

    bool operator==(const VaeModel&) const = default;
};

// Glorot-uniform weights, zero biases, deterministic per seed.
inline VaeModel init_model(std::size_t input_dim, long long seed) {
    VaeModel m(input_dim);
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    auto fill = [&rng](LayerParams& l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in_dim + l.out_dim));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& w : l.weights) w = dist(rng);
    };
    fill(m.enc1);
    fill(m.enc2);
    fill(m.dec1);
    fill(m.dec2);
    return m;
}

inline LatentStats encode(const VaeModel& m, const std::vector<double>& x) {
    if (x.size() != m.input_dim) throw DataError("encode: input length mismatch");
    std::vector<double> h, y;
    detail::affine(m.enc1, x, h);
    for (double& v : h) v = std::max(v, 0.0);
    detail::affine(m.enc2, h, y);
    LatentStats st;
    st.mu = {y[0], y[1]};
    st.logvar = {y[2], y[3]};
    return st;
}

// Reparameterized draw z = mu + exp(logvar/2) * eps, eps ~ N(0, 1).
template <class Rng>
inline std::array<double, 2> sample(const LatentStats& st, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::array<double, 2> z;
    for (std::size_t i = 0; i < 2; ++i)
        z[i] = st.mu[i] + std::exp(0.5 * st.logvar[i]) * normal(rng);
    return z;
}

inline std::vector<double> decode(const VaeModel& m, const std::array<double, 2>& z) {
    std::vector<double> zin(z.begin(), z.end()), h, out;
    detail::affine(m.dec1, zin, h);
    for (double& v : h) v = v > 0.0 ? v : m.leaky_alpha * v;
    detail::affine(m.dec2, h, out);
    return out;
}

// Mean absolute error (reconstruction loss).
inline double recon_loss(const std::vector<double>& x, const std::vector<double>& xhat) {
    if (x.size() != xhat.size() || x.empty()) throw DataError("recon_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - xhat[i]);
    return acc / static_cast<double>(x.size());
}

// KL divergence of N(mu, sigma^2) from the standard normal, summed over
// latent components.
inline double kl_loss(const LatentStats& st) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        acc += 1.0 + st.logvar[i] - st.mu[i] * st.mu[i] - std::exp(st.logvar[i]);
    return -0.5 * acc;
}

// Everything backward() needs from one forward pass.
struct ElboCache {
    std::vector<double> x;
    std::vector<double> enc_pre;   // enc1 pre-activation
    std::vector<double> enc_h;     // ReLU output
    LatentStats stats;
    std::array<double, 2> eps{};
    std::array<double, 2> z{};
    std::vector<double> dec_pre;   // dec1 pre-activation
    std::vector<double> dec_h;     // LeakyReLU output
    std::vector<double> xhat;
    double kl_weight = 1.0;
};

struct ElboResult {
    double total = 0.0;
    double recon = 0.0;
    double kl = 0.0;
    ElboCache cache;
};

// Forward pass with an externally supplied reparameterization noise pair.
inline ElboResult elbo_loss_with_eps(const VaeModel& m, const std::vector<double>& x,
                                     const std::array<double, 2>& eps, double kl_weight = 1.0) {
    if (x.size() != m.input_dim) throw DataError("elbo: input length mismatch");
    ElboResult r;
    ElboCache& c = r.cache;
    c.x = x;
    c.eps = eps;
    c.kl_weight = kl_weight;

    detail::affine(m.enc1, x, c.enc_pre);
    c.enc_h = c.enc_pre;
    for (double& v : c.enc_h) v = std::max(v, 0.0);
    std::vector<double> y;
    detail::affine(m.enc2, c.enc_h, y);
    c.stats.mu = {y[0], y[1]};
    c.stats.logvar = {y[2], y[3]};

    for (std::size_t i = 0; i < 2; ++i)
        c.z[i] = c.stats.mu[i] + std::exp(0.5 * c.stats.logvar[i]) * eps[i];

    std::vector<double> zin(c.z.begin(), c.z.end());
    detail::affine(m.dec1, zin, c.dec_pre);
    c.dec_h = c.dec_pre;
    for (double& v : c.dec_h) v = v > 0.0 ? v : m.leaky_alpha * v;
    detail::affine(m.dec2, c.dec_h, c.xhat);

    r.recon = recon_loss(x, c.xhat);
    r.kl = kl_loss(c.stats);
    r.total = r.recon + kl_weight * r.kl;
    return r;
}

template <class Rng>
inline ElboResult elbo_loss(const VaeModel& m, const std::vector<double>& x, Rng& rng,
                            double kl_weight = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::array<double, 2> eps{normal(rng), normal(rng)};
    return elbo_loss_with_eps(m, x, eps, kl_weight);
}

struct VaeGradients {
    LayerParams enc1, enc2, dec1, dec2;

    explicit VaeGradients(const VaeModel& m)
        : enc1(m.enc1.in_dim, m.enc1.out_dim), enc2(m.enc2.in_dim, m.enc2.out_dim),
          dec1(m.dec1.in_dim, m.dec1.out_dim), dec2(m.dec2.in_dim, m.dec2.out_dim) {}

    void scale(double s) {
        for (auto* l : {&enc1, &enc2, &dec1, &dec2}) {
            for (double& w : l->weights) w *= s;
            for (double& b : l->biases) b *= s;
        }
    }
};

// Analytic gradients of the single-sample ELBO. The MAE subgradient at a
// zero residual is taken as 0. Accumulates into `grad`.
inline void backward(const VaeModel& m, const ElboCache& c, VaeGradients& grad) {
    const std::size_t n = c.x.size();

    std::vector<double> g_xhat(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = c.xhat[i] - c.x[i];
        g_xhat[i] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) / static_cast<double>(n);
    }

    std::vector<double> g_dech;
    detail::affine_backward(m.dec2, c.dec_h, g_xhat, grad.dec2, g_dech);
    for (std::size_t i = 0; i < g_dech.size(); ++i)
        if (c.dec_pre[i] <= 0.0) g_dech[i] *= m.leaky_alpha;

    std::vector<double> zin(c.z.begin(), c.z.end());
    std::vector<double> g_z;
    detail::affine_backward(m.dec1, zin, g_dech, grad.dec1, g_z);

    // Through the reparameterization plus the KL term.
    std::vector<double> g_y(4);
    for (std::size_t i = 0; i < 2; ++i) {
        const double sigma = std::exp(0.5 * c.stats.logvar[i]);
        g_y[i] = g_z[i] + c.kl_weight * c.stats.mu[i];
        g_y[i + 2] = g_z[i] * 0.5 * sigma * c.eps[i]
                   - c.kl_weight * 0.5 * (1.0 - std::exp(c.stats.logvar[i]));
    }

    std::vector<double> g_ench;
    detail::affine_backward(m.enc2, c.enc_h, g_y, grad.enc2, g_ench);
    for (std::size_t i = 0; i < g_ench.size(); ++i)
        if (c.enc_pre[i] <= 0.0) g_ench[i] = 0.0;

    std::vector<double> g_x;
    detail::affine_backward(m.enc1, c.x, g_ench, grad.enc1, g_x);
}

struct TrainConfig {
    int epochs = 3000;
    int batch_size = 40;
    double learning_rate = 1e-3;
    long long seed = 0;
    double kl_weight = 1.0;
};

struct EpochStats {
    double recon = 0.0;
    double kl = 0.0;
    double elbo = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::uint64_t model_checksum = 0;
};

namespace detail {

struct AdamState {
    std::vector<double> m_w, v_w, m_b, v_b;
    explicit AdamState(const LayerParams& l)
        : m_w(l.weights.size(), 0.0), v_w(l.weights.size(), 0.0),
          m_b(l.biases.size(), 0.0), v_b(l.biases.size(), 0.0) {}
};

inline void adam_update(LayerParams& p, const LayerParams& g, AdamState& st, double lr, long t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    auto step = [&](std::vector<double>& theta, const std::vector<double>& grad,
                    std::vector<double>& m1, std::vector<double>& m2) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
            m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
            theta[i] -= lr * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + eps);
        }
    };
    step(p.weights, g.weights, st.m_w, st.v_w);
    step(p.biases, g.biases, st.m_b, st.v_b);
}

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

inline std::uint64_t model_checksum(const VaeModel& m) {
    std::uint64_t h = detail::fnv1a(&m.input_dim, sizeof(m.input_dim));
    h = detail::fnv1a(&m.latent_dim, sizeof(m.latent_dim), h);
    h = detail::fnv1a(&m.leaky_alpha, sizeof(m.leaky_alpha), h);
    for (const auto* l : {&m.enc1, &m.enc2, &m.dec1, &m.dec2}) {
        h = detail::fnv1a(l->weights.data(), l->weights.size() * sizeof(double), h);
        h = detail::fnv1a(l->biases.data(), l->biases.size() * sizeof(double), h);
    }
    return h;
}

// Adam training over seeded per-epoch shuffles with per-step noise from a
// dedicated seeded stream. Deterministic per (data, cfg); the final partial
// batch is included with gradients averaged over its actual size.
inline std::pair<VaeModel, TrainReport> train(const std::vector<DerivativeSpectrum>& data,
                                              const TrainConfig& cfg) {
    if (data.empty()) throw DataError("train: empty dataset");
    if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
        throw DataError("train: invalid config");
    const std::size_t dim = data.front().values.size();
    for (const auto& d : data)
        if (d.values.size() != dim) throw DataError("train: inconsistent spectrum lengths");

    VaeModel model = init_model(dim, cfg.seed);
    detail::AdamState s1(model.enc1), s2(model.enc2), s3(model.dec1), s4(model.dec2);
    std::mt19937_64 shuffle_rng(static_cast<std::uint64_t>(cfg.seed) ^ 0x5deece66dull);
    std::mt19937_64 noise_rng(static_cast<std::uint64_t>(cfg.seed) ^ 0x9e3779b97f4a7c15ull);

    TrainReport report;
    report.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    long step_count = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        EpochStats es;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            VaeGradients grad(model);
            for (std::size_t k = start; k < end; ++k) {
                auto r = elbo_loss(model, data[order[k]].values, noise_rng, cfg.kl_weight);
                if (!std::isfinite(r.total)) throw TrainingDiverged(epoch);
                backward(model, r.cache, grad);
                es.recon += r.recon;
                es.kl += r.kl;
                es.elbo += r.total;
            }
            grad.scale(1.0 / static_cast<double>(end - start));
            ++step_count;
            detail::adam_update(model.enc1, grad.enc1, s1, cfg.learning_rate, step_count);
            detail::adam_update(model.enc2, grad.enc2, s2, cfg.learning_rate, step_count);
            detail::adam_update(model.dec1, grad.dec1, s3, cfg.learning_rate, step_count);
            detail::adam_update(model.dec2, grad.dec2, s4, cfg.learning_rate, step_count);
        }
        const double inv_n = 1.0 / static_cast<double>(data.size());
        es.recon *= inv_n;
        es.kl *= inv_n;
        es.elbo *= inv_n;
        report.epochs.push_back(es);
    }
    report.model_checksum = model_checksum(model);
    return {std::move(model), std::move(report)};
}

}  // namespace diva
