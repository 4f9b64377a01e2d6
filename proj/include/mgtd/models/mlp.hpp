#pragma once

// One-hidden-layer perceptron: ReLU hidden units, sigmoid output, binary
// cross-entropy, plain mini-batch gradient descent.

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/models/common.hpp"
#include "mgtd/rng.hpp"

namespace mgtd {

struct MlpConfig {
    std::size_t hidden = 128;
    int epochs = 10;
    std::size_t batch_size = 32;
    double lr = 0.5;
    std::uint64_t seed = 42;

    nlohmann::json to_json() const {
        return {{"hidden", hidden}, {"epochs", epochs}, {"batch_size", batch_size}, {"lr", lr}, {"seed", seed}};
    }
};

struct MlpParams {
    std::size_t dim = 0;
    std::size_t hidden = 0;
    std::vector<double> W1;  // dim x hidden, row j holds feature j's outgoing weights
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    std::span<const double> row(std::size_t j) const { return {W1.data() + j * hidden, hidden}; }

    /// Pre-activations of the hidden layer.
    void hidden_input(const SparseVector& x, std::vector<double>& a) const {
        a.assign(b1.begin(), b1.end());
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
            const double v = x.values[k];
            const double* r = W1.data() + static_cast<std::size_t>(x.indices[k]) * hidden;
            for (std::size_t h = 0; h < hidden; ++h) a[h] += v * r[h];
        }
    }

    double logit(const SparseVector& x) const {
        std::vector<double> a;
        hidden_input(x, a);
        double z = b2;
        for (std::size_t h = 0; h < hidden; ++h) z += w2[h] * (a[h] > 0.0 ? a[h] : 0.0);
        return z;
    }

    Prediction predict(const SparseVector& x) const { return from_probability(sigmoid(logit(x))); }
};

/// Gradient of the mean loss over a batch. W1 rows appear only for features
/// present in the batch.
struct MlpGradient {
    double loss = 0.0;
    std::map<std::uint32_t, std::vector<double>> dW1;
    std::vector<double> db1;
    std::vector<double> dw2;
    double db2 = 0.0;
};

inline MlpGradient mlp_loss_and_gradient(const MlpParams& p, const std::vector<SparseVector>& X,
                                         const std::vector<int>& y, std::span<const std::size_t> batch) {
    MlpGradient g;
    g.db1.assign(p.hidden, 0.0);
    g.dw2.assign(p.hidden, 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    std::vector<double> a, da(p.hidden);
    for (auto i : batch) {
        const auto& x = X[i];
        p.hidden_input(x, a);
        double z = p.b2;
        for (std::size_t h = 0; h < p.hidden; ++h) z += p.w2[h] * (a[h] > 0.0 ? a[h] : 0.0);
        g.loss += inv * (softplus(z) - y[i] * z);
        const double dz = inv * (sigmoid(z) - y[i]);
        g.db2 += dz;
        for (std::size_t h = 0; h < p.hidden; ++h) {
            const bool on = a[h] > 0.0;
            g.dw2[h] += dz * (on ? a[h] : 0.0);
            da[h] = on ? dz * p.w2[h] : 0.0;
            g.db1[h] += da[h];
        }
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
            auto& row = g.dW1[x.indices[k]];
            if (row.empty()) row.assign(p.hidden, 0.0);
            const double v = x.values[k];
            for (std::size_t h = 0; h < p.hidden; ++h) row[h] += v * da[h];
        }
    }
    return g;
}

inline MlpParams init_mlp(std::size_t dim, std::size_t hidden, std::uint64_t seed) {
    MlpParams p;
    p.dim = dim;
    p.hidden = hidden;
    Engine eng(derive_seed(seed, "mlp-init"));
    const double l1 = std::sqrt(6.0 / static_cast<double>(dim + hidden));
    const double l2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    p.W1.resize(dim * hidden);
    for (double& w : p.W1) w = (2.0 * uniform01(eng) - 1.0) * l1;
    p.b1.assign(hidden, 0.0);
    p.w2.resize(hidden);
    for (double& w : p.w2) w = (2.0 * uniform01(eng) - 1.0) * l2;
    return p;
}

inline MlpParams fit_mlp(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                         const MlpConfig& cfg) {
    detail::check_training_data(X, y, dim);
    if (cfg.hidden == 0 || cfg.batch_size == 0 || cfg.lr <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "invalid MLP hyperparameters");
    MlpParams p = init_mlp(dim, cfg.hidden, cfg.seed);
    Engine eng(derive_seed(cfg.seed, "mlp-order"));
    std::vector<std::size_t> order(X.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), eng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const auto g = mlp_loss_and_gradient(p, X, y, std::span<const std::size_t>(order).subspan(start, end - start));
            for (const auto& [j, row] : g.dW1) {
                double* w = p.W1.data() + static_cast<std::size_t>(j) * p.hidden;
                for (std::size_t h = 0; h < p.hidden; ++h) w[h] -= cfg.lr * row[h];
            }
            for (std::size_t h = 0; h < p.hidden; ++h) {
                p.b1[h] -= cfg.lr * g.db1[h];
                p.w2[h] -= cfg.lr * g.dw2[h];
            }
            p.b2 -= cfg.lr * g.db2;
        }
    }
    return p;
}

} // namespace mgtd
