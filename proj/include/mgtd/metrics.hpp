#pragma once

// Confusion matrices and accuracy / precision / recall / F1. Machine (1) is
// the positive class.

#include <cstdint>
#include <span>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mgtd/error.hpp"

namespace mgtd {

struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }

    nlohmann::ordered_json to_json() const { return {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}}; }
};

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size())
        throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
    if (y_true.empty()) throw Error(ErrorCode::LengthMismatch, "label vectors are empty");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool t = y_true[i] != 0, p = y_pred[i] != 0;
        if (t && p) ++cm.tp;
        else if (!t && p) ++cm.fp;
        else if (t) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

enum class Averaging { Positive, Weighted };

inline std::string_view to_string(Averaging a) { return a == Averaging::Positive ? "positive" : "weighted"; }

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const Metrics&) const = default;

    nlohmann::ordered_json to_json() const {
        return {{"accuracy", accuracy}, {"precision", precision}, {"recall", recall}, {"f1", f1}};
    }
};

namespace detail {
inline double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
inline double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }
} // namespace detail

/// 0/0 precision, recall and F1 are 0. Weighted mode averages the per-class
/// scores by class support.
inline Metrics metrics(const ConfusionMatrix& cm, Averaging mode) {
    const double n = static_cast<double>(cm.total());
    if (n == 0.0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
    const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
    Metrics m;
    m.accuracy = (tp + tn) / n;
    const double p1 = detail::ratio(tp, tp + fp), r1 = detail::ratio(tp, tp + fn);
    const double f1 = detail::harmonic(p1, r1);
    if (mode == Averaging::Positive) {
        m.precision = p1;
        m.recall = r1;
        m.f1 = f1;
        return m;
    }
    const double p0 = detail::ratio(tn, tn + fn), r0 = detail::ratio(tn, tn + fp);
    const double f0 = detail::harmonic(p0, r0);
    const double w1 = (tp + fn) / n, w0 = (tn + fp) / n;
    m.precision = w1 * p1 + w0 * p0;
    m.recall = w1 * r1 + w0 * r0;
    m.f1 = w1 * f1 + w0 * f0;
    return m;
}

} // namespace mgtd
