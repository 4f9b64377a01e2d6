#pragma once

// Logistic regression, SGD classifier and Pegasos linear SVM.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/models/common.hpp"
#include "mgtd/rng.hpp"

namespace mgtd {

struct LinearParams {
    std::vector<double> w;
    double b = 0.0;
    bool probabilistic = true;  // sigmoid score, else raw margin

    double margin(const SparseVector& x) const { return x.dot(w) + b; }

    Prediction predict(const SparseVector& x) const {
        const double m = margin(x);
        return probabilistic ? from_probability(sigmoid(m)) : from_margin(m);
    }
};

enum class LrSchedule { Constant, InvScaling };

struct LogRegConfig {
    double l2 = 1e-4;
    int epochs = 20;
    std::size_t batch_size = 32;
    double lr = 1.0;
    LrSchedule schedule = LrSchedule::Constant;
    std::uint64_t seed = 42;

    nlohmann::json to_json() const {
        return {{"l2", l2},
                {"epochs", epochs},
                {"batch_size", batch_size},
                {"lr", lr},
                {"lr_schedule", schedule == LrSchedule::Constant ? "constant" : "invscaling"},
                {"seed", seed}};
    }
};

enum class SgdLoss { Hinge, Log };

struct SgdConfig {
    SgdLoss loss = SgdLoss::Hinge;
    double l2 = 1e-4;
    int epochs = 20;
    double eta0 = 0.1;
    double power_t = 0.25;
    std::uint64_t seed = 42;

    nlohmann::json to_json() const {
        return {{"loss", loss == SgdLoss::Hinge ? "hinge" : "log"},
                {"l2", l2},
                {"epochs", epochs},
                {"eta0", eta0},
                {"power_t", power_t},
                {"seed", seed}};
    }
};

struct SvmConfig {
    double lambda = 1e-4;
    int epochs = 20;
    std::uint64_t seed = 42;

    nlohmann::json to_json() const { return {{"lambda", lambda}, {"epochs", epochs}, {"seed", seed}}; }
};

namespace detail {
inline std::vector<std::size_t> iota_order(std::size_t n) {
    std::vector<std::size_t> o(n);
    std::iota(o.begin(), o.end(), std::size_t{0});
    return o;
}
} // namespace detail

/// Mini-batch gradient descent on mean logistic loss + (l2/2)|w|^2. The
/// bias is not regularized.
inline LinearParams fit_logreg(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                               const LogRegConfig& cfg) {
    detail::check_training_data(X, y, dim);
    if (cfg.batch_size == 0 || cfg.lr <= 0.0 || cfg.l2 < 0.0)
        throw Error(ErrorCode::InvalidArgument, "invalid logistic regression hyperparameters");
    Engine eng(derive_seed(cfg.seed, "logreg"));
    detail::ScaledWeights w(dim);
    double b = 0.0;
    auto order = detail::iota_order(X.size());
    std::vector<double> resid;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), eng);
        const double lr = cfg.schedule == LrSchedule::Constant ? cfg.lr : cfg.lr / std::sqrt(1.0 + epoch);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const double inv = 1.0 / static_cast<double>(end - start);
            resid.assign(end - start, 0.0);
            double gb = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto i = order[k];
                resid[k - start] = sigmoid(w.dot(X[i]) + b) - y[i];
                gb += resid[k - start];
            }
            w.decay(1.0 - lr * cfg.l2);
            for (std::size_t k = start; k < end; ++k) w.add(X[order[k]], -lr * inv * resid[k - start]);
            b -= lr * inv * gb;
        }
    }
    return {w.weights(), b, true};
}

/// Per-sample updates with eta_t = eta0 / t^power_t.
inline LinearParams fit_sgd(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                            const SgdConfig& cfg) {
    detail::check_training_data(X, y, dim);
    if (cfg.eta0 <= 0.0 || cfg.l2 < 0.0) throw Error(ErrorCode::InvalidArgument, "invalid SGD hyperparameters");
    Engine eng(derive_seed(cfg.seed, "sgd"));
    detail::ScaledWeights w(dim);
    double b = 0.0;
    auto order = detail::iota_order(X.size());
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), eng);
        for (auto i : order) {
            ++t;
            const double eta = cfg.eta0 / std::pow(static_cast<double>(t), cfg.power_t);
            const double m = w.dot(X[i]) + b;
            w.decay(1.0 - eta * cfg.l2);
            if (cfg.loss == SgdLoss::Hinge) {
                const double ys = y[i] ? 1.0 : -1.0;
                if (ys * m < 1.0) {
                    w.add(X[i], eta * ys);
                    b += eta * ys;
                }
            } else {
                const double g = sigmoid(m) - y[i];
                w.add(X[i], -eta * g);
                b -= eta * g;
            }
        }
    }
    return {w.weights(), b, cfg.loss == SgdLoss::Log};
}

/// Pegasos primal hinge minimization. The bias is an extra feature fixed
/// at 1 and is regularized with the weights.
inline LinearParams fit_svm(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                            const SvmConfig& cfg) {
    detail::check_training_data(X, y, dim);
    if (cfg.lambda <= 0.0) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    Engine eng(derive_seed(cfg.seed, "svm"));
    std::vector<double> v(dim, 0.0);
    double bv = 0.0, scale = 1.0;
    auto order = detail::iota_order(X.size());
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), eng);
        for (auto i : order) {
            ++t;
            const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
            const double ys = y[i] ? 1.0 : -1.0;
            const double m = scale * (X[i].dot(v) + bv);
            const double factor = 1.0 - eta * cfg.lambda;
            if (factor <= 0.0) {
                std::fill(v.begin(), v.end(), 0.0);
                bv = 0.0;
                scale = 1.0;
            } else {
                scale *= factor;
            }
            if (ys * m < 1.0) {
                const double c = eta * ys / scale;
                for (std::size_t k = 0; k < X[i].indices.size(); ++k) v[X[i].indices[k]] += c * X[i].values[k];
                bv += c;
            }
            if (scale < 1e-9) {
                for (double& x : v) x *= scale;
                bv *= scale;
                scale = 1.0;
            }
        }
    }
    for (double& x : v) x *= scale;
    return {std::move(v), bv * scale, false};
}

} // namespace mgtd
