#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgtd/error.hpp"
#include "mgtd/sparse.hpp"

namespace mgtd {

enum class ModelKind { LR, DT, RF, MNB, SGD, SVM, VC, MLP };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::LR,  ModelKind::DT,  ModelKind::RF, ModelKind::MNB,
                                               ModelKind::SGD, ModelKind::SVM, ModelKind::VC, ModelKind::MLP};

inline std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::LR: return "lr";
        case ModelKind::DT: return "dt";
        case ModelKind::RF: return "rf";
        case ModelKind::MNB: return "mnb";
        case ModelKind::SGD: return "sgd";
        case ModelKind::SVM: return "svm";
        case ModelKind::VC: return "vc";
        case ModelKind::MLP: return "mlp";
    }
    return "unknown";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
    for (auto k : kAllModelKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct Prediction {
    int label = 0;
    double score = 0.0;

    bool operator==(const Prediction&) const = default;
};

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// Probability outputs: label 1 iff score >= 0.5.
inline Prediction from_probability(double p) { return {p >= 0.5 ? 1 : 0, p}; }

/// Margin outputs: label 1 iff margin >= 0.
inline Prediction from_margin(double m) { return {m >= 0.0 ? 1 : 0, m}; }

namespace detail {

inline void check_vector_dim(const SparseVector& x, std::size_t dim) {
    if (x.max_index_plus_one() > dim)
        throw Error(ErrorCode::DimensionMismatch, "feature index " + std::to_string(x.indices.back()) +
                                                      " outside model dimension " + std::to_string(dim));
}

/// Common trainer preconditions.
inline void check_training_data(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim) {
    if (X.size() != y.size())
        throw Error(ErrorCode::DimensionMismatch,
                    "X has " + std::to_string(X.size()) + " rows but y has " + std::to_string(y.size()));
    if (X.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
    bool seen[2] = {false, false};
    for (int v : y) {
        if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
        seen[v] = true;
    }
    if (!seen[0] || !seen[1]) throw Error(ErrorCode::SingleClassTraining, "training data contains one class only");
    for (const auto& x : X) check_vector_dim(x, dim);
}

/// Dense weights held as scale * v so that a multiplicative decay of the
/// whole vector is O(1).
struct ScaledWeights {
    std::vector<double> v;
    double scale = 1.0;

    explicit ScaledWeights(std::size_t dim) : v(dim, 0.0) {}

    double dot(const SparseVector& x) const { return scale * x.dot(v); }

    void decay(double factor) {
        if (factor <= 0.0) {
            std::fill(v.begin(), v.end(), 0.0);
            scale = 1.0;
            return;
        }
        scale *= factor;
        if (scale < 1e-9) materialize();
    }

    void add(const SparseVector& x, double coef) {
        const double c = coef / scale;
        for (std::size_t k = 0; k < x.indices.size(); ++k) v[x.indices[k]] += c * x.values[k];
    }

    void materialize() {
        for (double& w : v) w *= scale;
        scale = 1.0;
    }

    std::vector<double> weights() const {
        std::vector<double> w(v);
        for (double& x : w) x *= scale;
        return w;
    }
};

} // namespace detail

} // namespace mgtd
