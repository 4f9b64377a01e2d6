#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/models/common.hpp"

namespace mgtd {

struct MnbConfig {
    double alpha = 1.0;

    nlohmann::json to_json() const { return {{"alpha", alpha}}; }
};

struct MnbParams {
    std::array<double, 2> log_prior{};
    std::array<std::vector<double>, 2> feature_log_prob;

    double log_joint(const SparseVector& x, int c) const { return log_prior[c] + x.dot(feature_log_prob[c]); }

    Prediction predict(const SparseVector& x) const {
        for (double v : x.values)
            if (v < 0.0) throw Error(ErrorCode::NegativeFeature, "multinomial NB needs non-negative features");
        return from_probability(sigmoid(log_joint(x, 1) - log_joint(x, 0)));
    }
};

/// Class priors and alpha-smoothed per-class term log-likelihoods. Feature
/// values are counts, or fractional counts such as TF-IDF weights.
inline MnbParams fit_mnb(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                         const MnbConfig& cfg) {
    detail::check_training_data(X, y, dim);
    if (!(cfg.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    std::array<std::vector<double>, 2> counts{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    std::array<double, 2> n_docs{0.0, 0.0};
    for (std::size_t i = 0; i < X.size(); ++i) {
        n_docs[y[i]] += 1.0;
        for (std::size_t k = 0; k < X[i].indices.size(); ++k) {
            const double v = X[i].values[k];
            if (v < 0.0) throw Error(ErrorCode::NegativeFeature, "multinomial NB needs non-negative features");
            counts[y[i]][X[i].indices[k]] += v;
        }
    }
    MnbParams p;
    const double n = n_docs[0] + n_docs[1];
    for (int c = 0; c < 2; ++c) {
        p.log_prior[c] = std::log(n_docs[c] / n);
        double total = 0.0;
        for (double v : counts[c]) total += v;
        const double denom = std::log(total + cfg.alpha * static_cast<double>(dim));
        p.feature_log_prob[c].resize(dim);
        for (std::size_t j = 0; j < dim; ++j) p.feature_log_prob[c][j] = std::log(counts[c][j] + cfg.alpha) - denom;
    }
    return p;
}

} // namespace mgtd
