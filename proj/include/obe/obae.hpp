#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "obe/code.hpp"
#include "obe/detail/rng.hpp"
#include "obe/errors.hpp"
#include "obe/linalg.hpp"
#include "obe/transforms.hpp"  // save_json / load_json

namespace obe {

enum class ObaeMode { ordered_dense, ordered_binary };
enum class Optimizer { sgd, adam };

struct TrainConfig {
    int latent_dim = 256;
    int epochs = 100;
    int batch_size = 256;
    double learning_rate = 1e-3;
    double temperature = 0.1;
    std::uint64_t seed = 1;
    Optimizer optimizer = Optimizer::adam;
    bool tied_weights = false;  // tied implies zero biases throughout training
};

/// Linear encoder/decoder pair. Encoder and decoder parameters are
/// independent unless trained with tied_weights, in which case dec_w is
/// materialized as enc_w^T and biases stay zero.
struct ObaeModel {
    ObaeMode mode = ObaeMode::ordered_dense;
    Mat enc_w;  // latent_dim x input_dim
    Vec enc_b;  // latent_dim
    Mat dec_w;  // input_dim x latent_dim
    Vec dec_b;  // input_dim

    TrainConfig config;
    std::vector<double> loss_history;
    double final_loss = 0.0;

    std::size_t input_dim() const { return enc_w.cols; }
    std::size_t latent_dim() const { return enc_w.rows; }
};

inline double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    double e = std::exp(t);
    return e / (1.0 + e);
}

inline double logit(double u) { return std::log(u) - std::log1p(-u); }

inline Vec encode(const ObaeModel& m, const Vec& x) {
    if (x.size() != m.input_dim()) throw DimError("encode: input dim mismatch");
    Vec z = matvec(m.enc_w, x);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += m.enc_b[i];
    return z;
}

inline Vec decode(const ObaeModel& m, const Vec& h) {
    if (h.size() != m.latent_dim()) throw DimError("decode: latent dim mismatch");
    Vec x = matvec(m.dec_w, h);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += m.dec_b[i];
    return x;
}

/// Keep the leading `keep` dimensions, zero the rest. `keep` counts kept
/// dimensions, 1 <= keep <= z.size().
inline Vec nested_dropout(const Vec& z, int keep) {
    if (keep < 1 || static_cast<std::size_t>(keep) > z.size())
        throw IndexError("nested_dropout: keep index out of range");
    Vec out(z.size(), 0.0);
    std::copy(z.begin(), z.begin() + keep, out.begin());
    return out;
}

/// Relaxed Bernoulli draw: z_s = sigmoid((logit(u) + ztilde) / T).
/// Uses the identity logit(sigmoid(ztilde)) == ztilde.
inline Vec sample_relaxed(const Vec& ztilde, double T, const Vec& u) {
    if (!(T > 0.0)) throw ConfigError("sample_relaxed: T must be > 0");
    if (u.size() != ztilde.size()) throw DimError("sample_relaxed: noise dim mismatch");
    Vec out(ztilde.size());
    for (std::size_t i = 0; i < ztilde.size(); ++i) {
        if (!(u[i] > 0.0 && u[i] < 1.0))
            throw DomainError("sample_relaxed: u must lie strictly inside (0,1)");
        out[i] = sigmoid((logit(u[i]) + ztilde[i]) / T);
    }
    return out;
}

/// Exact Bernoulli draw via the inverse-CDF comparison: bit = 1 iff u <= sigmoid(ztilde).
inline Vec hard_sample(const Vec& ztilde, const Vec& u) {
    if (u.size() != ztilde.size()) throw DimError("hard_sample: noise dim mismatch");
    Vec out(ztilde.size());
    for (std::size_t i = 0; i < ztilde.size(); ++i) {
        if (!(u[i] > 0.0 && u[i] < 1.0))
            throw DomainError("hard_sample: u must lie strictly inside (0,1)");
        out[i] = (u[i] <= sigmoid(ztilde[i])) ? 1.0 : 0.0;
    }
    return out;
}

/// Inference-time hash: bit_i = 1 iff z_i >= 0 (zero maps to 1).
inline ObCode binarize(const Vec& z) {
    ObCode c = ObCode::zeros(static_cast<std::uint32_t>(z.size()));
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] >= 0.0) c.set_bit(static_cast<std::uint32_t>(i), true);
    return c;
}

/// Deterministic code extraction: binarize(encode(m, x)), no masking or sampling.
inline ObCode encode_code(const ObaeModel& m, const Vec& x) { return binarize(encode(m, x)); }

// ---------------------------------------------------------------------------
// Training internals. A batch is a row matrix X (B x d); noise carries the
// per-example dropout index (count of kept dims) and, in binary mode, the
// uniform draws. Exposed so gradients can be verified against finite
// differences with frozen noise.
// ---------------------------------------------------------------------------

struct BatchNoise {
    std::vector<int> keep;  // one entry per example, in [1, latent_dim]
    Mat uniform;            // B x latent_dim, strictly inside (0,1); unused in dense mode
};

struct ModelGrads {
    Mat enc_w;
    Vec enc_b;
    Mat dec_w;
    Vec dec_b;
};

namespace detail {

inline void mask_rows(Mat& m, const std::vector<int>& keep) {
    for (std::size_t b = 0; b < m.rows; ++b) {
        double* r = m.row(b);
        for (std::size_t j = static_cast<std::size_t>(keep[b]); j < m.cols; ++j) r[j] = 0.0;
    }
}

inline Vec col_sums(const Mat& m) {
    Vec s(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols; ++j) s[j] += r[j];
    }
    return s;
}

}  // namespace detail

/// Loss (mean over the batch of the squared reconstruction error) and, when
/// `grads` is non-null, its gradients. With tied weights the decoder is
/// enc_w^T: the total gradient lands in grads->enc_w and dec fields stay zero.
inline double batch_loss_grad(const ObaeModel& m, const Mat& X, const BatchNoise& noise,
                              bool tied, ModelGrads* grads) {
    const std::size_t B = X.rows;
    const std::size_t d = m.input_dim();
    const std::size_t L = m.latent_dim();
    if (X.cols != d) throw DimError("batch_loss_grad: input dim mismatch");
    if (noise.keep.size() != B) throw DimError("batch_loss_grad: noise size mismatch");
    const bool binary = m.mode == ObaeMode::ordered_binary;
    if (binary && (noise.uniform.rows != B || noise.uniform.cols != L))
        throw DimError("batch_loss_grad: uniform noise shape mismatch");
    for (int k : noise.keep)
        if (k < 1 || static_cast<std::size_t>(k) > L)
            throw IndexError("batch_loss_grad: keep index out of range");

    const double T = m.config.temperature;

    // Forward.
    Mat Z = matmul_nt(X, m.enc_w);  // B x L
    if (!tied)
        for (std::size_t b = 0; b < B; ++b) {
            double* r = Z.row(b);
            for (std::size_t j = 0; j < L; ++j) r[j] += m.enc_b[j];
        }
    Mat Ztilde = Z;
    detail::mask_rows(Ztilde, noise.keep);

    Mat H;       // decoder input: Ztilde (dense) or masked relaxed sample (binary)
    Mat Zs;      // relaxed samples, kept for the backward pass
    if (binary) {
        Zs = Mat(B, L);
        for (std::size_t b = 0; b < B; ++b) {
            const double* zt = Ztilde.row(b);
            const double* u = noise.uniform.row(b);
            double* zs = Zs.row(b);
            for (std::size_t j = 0; j < L; ++j) {
                if (!(u[j] > 0.0 && u[j] < 1.0))
                    throw DomainError("batch_loss_grad: u must lie strictly inside (0,1)");
                zs[j] = sigmoid((logit(u[j]) + zt[j]) / T);
            }
        }
        H = Zs;
        detail::mask_rows(H, noise.keep);
    } else {
        H = Ztilde;
    }

    Mat Xp = tied ? matmul(H, m.enc_w) : matmul_nt(H, m.dec_w);  // B x d
    if (!tied)
        for (std::size_t b = 0; b < B; ++b) {
            double* r = Xp.row(b);
            for (std::size_t j = 0; j < d; ++j) r[j] += m.dec_b[j];
        }

    double loss = 0.0;
    Mat dXp(B, d);
    const double scale = 2.0 / static_cast<double>(B);
    for (std::size_t i = 0; i < B * d; ++i) {
        double diff = Xp.data[i] - X.data[i];
        loss += diff * diff;
        dXp.data[i] = scale * diff;
    }
    loss /= static_cast<double>(B);

    if (!grads) return loss;

    // Backward.
    Mat dH = tied ? matmul_nt(dXp, m.enc_w) : matmul(dXp, m.dec_w);  // B x L
    detail::mask_rows(dH, noise.keep);
    Mat& dZ = dH;
    if (binary) {
        for (std::size_t b = 0; b < B; ++b) {
            const double* zs = Zs.row(b);
            double* r = dZ.row(b);
            for (std::size_t j = 0; j < L; ++j) r[j] *= zs[j] * (1.0 - zs[j]) / T;
        }
    }
    // dZ is already zero on masked dims; gradients stay blocked there.

    if (tied) {
        grads->enc_w = matmul_tn(dZ, X);  // L x d
        Mat dec_part = matmul_tn(H, dXp);
        for (std::size_t i = 0; i < grads->enc_w.data.size(); ++i)
            grads->enc_w.data[i] += dec_part.data[i];
        grads->enc_b.assign(L, 0.0);
        grads->dec_w = Mat(d, L);
        grads->dec_b.assign(d, 0.0);
    } else {
        grads->enc_w = matmul_tn(dZ, X);
        grads->enc_b = detail::col_sums(dZ);
        grads->dec_w = matmul_tn(dXp, H);  // d x L
        grads->dec_b = detail::col_sums(dXp);
    }
    return loss;
}

namespace detail {

struct AdamState {
    std::vector<double> m, v;
    void init(std::size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
    }
    void step(double* param, const double* grad, std::size_t n, double lr, int t) {
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, t);
        const double c2 = 1.0 - std::pow(b2, t);
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
            param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

}  // namespace detail

inline ObaeModel train(const std::vector<Vec>& data, const TrainConfig& cfg, ObaeMode mode) {
    if (data.empty()) throw ConfigError("train: data is empty");
    if (cfg.latent_dim < 1) throw ConfigError("train: latent_dim must be >= 1");
    if (!(cfg.temperature > 0.0)) throw ConfigError("train: temperature must be > 0");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (cfg.epochs < 0) throw ConfigError("train: epochs must be >= 0");
    const std::size_t d = data[0].size();
    for (const Vec& x : data)
        if (x.size() != d) throw DimError("train: inconsistent input dims");
    const std::size_t L = static_cast<std::size_t>(cfg.latent_dim);
    const std::size_t N = data.size();

    ObaeModel m;
    m.mode = mode;
    m.config = cfg;
    m.enc_w = Mat(L, d);
    m.enc_b.assign(L, 0.0);
    m.dec_w = Mat(d, L);
    m.dec_b.assign(d, 0.0);

    std::mt19937_64 init_rng = detail::make_rng(cfg.seed, 0x696e6974ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& w : m.enc_w.data) w = gauss(init_rng);
    const double dec_scale = 1.0 / std::sqrt(static_cast<double>(L));
    for (double& w : m.dec_w.data) w = dec_scale * gauss(init_rng);
    if (cfg.tied_weights) m.dec_w = transpose(m.enc_w);

    std::mt19937_64 order_rng = detail::make_rng(cfg.seed, 0x736875666cull);
    std::mt19937_64 noise_rng = detail::make_rng(cfg.seed, 0x6e6f697365ull);
    std::uniform_int_distribution<int> keep_dist(1, cfg.latent_dim);

    detail::AdamState adam_enc_w, adam_enc_b, adam_dec_w, adam_dec_b;
    adam_enc_w.init(m.enc_w.data.size());
    adam_enc_b.init(L);
    adam_dec_w.init(m.dec_w.data.size());
    adam_dec_b.init(d);
    int adam_t = 0;

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);

    ModelGrads g;
    const bool binary = mode == ObaeMode::ordered_binary;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), order_rng);
        double epoch_sq = 0.0;
        for (std::size_t start = 0; start < N; start += cfg.batch_size) {
            std::size_t B = std::min<std::size_t>(cfg.batch_size, N - start);
            Mat X(B, d);
            for (std::size_t b = 0; b < B; ++b) {
                const Vec& x = data[order[start + b]];
                std::copy(x.begin(), x.end(), X.row(b));
            }
            BatchNoise noise;
            noise.keep.resize(B);
            for (std::size_t b = 0; b < B; ++b) noise.keep[b] = keep_dist(noise_rng);
            if (binary) {
                noise.uniform = Mat(B, L);
                for (double& u : noise.uniform.data) u = detail::open_unit_uniform(noise_rng);
            }

            double loss = batch_loss_grad(m, X, noise, cfg.tied_weights, &g);
            if (!std::isfinite(loss))
                throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch),
                                      epoch);
            epoch_sq += loss * static_cast<double>(B);

            if (cfg.optimizer == Optimizer::adam) {
                ++adam_t;
                adam_enc_w.step(m.enc_w.data.data(), g.enc_w.data.data(), m.enc_w.data.size(),
                                cfg.learning_rate, adam_t);
                if (!cfg.tied_weights) {
                    adam_enc_b.step(m.enc_b.data(), g.enc_b.data(), L, cfg.learning_rate, adam_t);
                    adam_dec_w.step(m.dec_w.data.data(), g.dec_w.data.data(), m.dec_w.data.size(),
                                    cfg.learning_rate, adam_t);
                    adam_dec_b.step(m.dec_b.data(), g.dec_b.data(), d, cfg.learning_rate, adam_t);
                }
            } else {
                for (std::size_t i = 0; i < m.enc_w.data.size(); ++i)
                    m.enc_w.data[i] -= cfg.learning_rate * g.enc_w.data[i];
                if (!cfg.tied_weights) {
                    for (std::size_t i = 0; i < L; ++i)
                        m.enc_b[i] -= cfg.learning_rate * g.enc_b[i];
                    for (std::size_t i = 0; i < m.dec_w.data.size(); ++i)
                        m.dec_w.data[i] -= cfg.learning_rate * g.dec_w.data[i];
                    for (std::size_t i = 0; i < d; ++i)
                        m.dec_b[i] -= cfg.learning_rate * g.dec_b[i];
                }
            }
        }
        m.loss_history.push_back(epoch_sq / static_cast<double>(N));
    }

    if (cfg.tied_weights) m.dec_w = transpose(m.enc_w);
    m.final_loss = m.loss_history.empty() ? 0.0 : m.loss_history.back();
    return m;
}

/// Mean squared reconstruction error of the deterministic path x -> dec(enc(x)).
inline double reconstruction_mse(const ObaeModel& m, const std::vector<Vec>& data) {
    double total = 0.0;
    for (const Vec& x : data) {
        Vec xp = decode(m, encode(m, x));
        double sq = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            double diff = xp[j] - x[j];
            sq += diff * diff;
        }
        total += sq;
    }
    return total / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// JSON persistence.
// ---------------------------------------------------------------------------

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {{"latent_dim", c.latent_dim},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"temperature", c.temperature},
            {"seed", c.seed},
            {"optimizer", c.optimizer == Optimizer::adam ? "adam" : "sgd"},
            {"tied_weights", c.tied_weights}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.latent_dim = j.at("latent_dim").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.temperature = j.at("temperature").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    std::string opt = j.at("optimizer").get<std::string>();
    if (opt == "adam")
        c.optimizer = Optimizer::adam;
    else if (opt == "sgd")
        c.optimizer = Optimizer::sgd;
    else
        throw FormatError("model json: unknown optimizer " + opt);
    c.tied_weights = j.at("tied_weights").get<bool>();
    return c;
}

inline nlohmann::json obae_to_json(const ObaeModel& m) {
    return {{"kind", "obae_model"},
            {"mode", m.mode == ObaeMode::ordered_binary ? "ordered_binary" : "ordered_dense"},
            {"input_dim", m.input_dim()},
            {"latent_dim", m.latent_dim()},
            {"enc_w", m.enc_w.data},
            {"enc_b", m.enc_b},
            {"dec_w", m.dec_w.data},
            {"dec_b", m.dec_b},
            {"config", train_config_to_json(m.config)},
            {"loss_history", m.loss_history},
            {"final_loss", m.final_loss}};
}

inline ObaeModel obae_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "obae_model") throw FormatError("model json: kind is not obae_model");
    ObaeModel m;
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "ordered_dense")
        m.mode = ObaeMode::ordered_dense;
    else if (mode == "ordered_binary")
        m.mode = ObaeMode::ordered_binary;
    else
        throw FormatError("model json: unknown mode " + mode);
    std::size_t d = j.at("input_dim").get<std::size_t>();
    std::size_t L = j.at("latent_dim").get<std::size_t>();
    m.enc_w = Mat(L, d);
    m.enc_w.data = j.at("enc_w").get<std::vector<double>>();
    m.enc_b = j.at("enc_b").get<Vec>();
    m.dec_w = Mat(d, L);
    m.dec_w.data = j.at("dec_w").get<std::vector<double>>();
    m.dec_b = j.at("dec_b").get<Vec>();
    if (m.enc_w.data.size() != L * d || m.enc_b.size() != L || m.dec_w.data.size() != L * d ||
        m.dec_b.size() != d)
        throw FormatError("model json: inconsistent shapes");
    if (!all_finite(m.enc_w.data.data(), m.enc_w.data.size()) ||
        !all_finite(m.dec_w.data.data(), m.dec_w.data.size()))
        throw FormatError("model json: non-finite weights");
    m.config = train_config_from_json(j.at("config"));
    m.loss_history = j.at("loss_history").get<std::vector<double>>();
    m.final_loss = j.at("final_loss").get<double>();
    return m;
}

}  // namespace obe
