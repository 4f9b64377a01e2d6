#pragma once

// Descriptive statistics and Welch's unequal-variance t-test.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <nlohmann/json.hpp>

#include "mgtd/error.hpp"

namespace mgtd {

inline double mean(std::span<const double> x) {
    if (x.empty()) throw Error(ErrorCode::TooFewSamples, "mean of empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Unbiased (n - 1) variance.
inline double sample_variance(std::span<const double> x) {
    if (x.size() < 2) throw Error(ErrorCode::TooFewSamples, "variance needs at least two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz.
inline double beta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0)
        throw Error(ErrorCode::InvalidArgument, "incomplete_beta: invalid arguments");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `dof`
/// degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
    if (std::isinf(t)) return 0.0;
    const double x = dof / (dof + t * t);
    return std::clamp(incomplete_beta(dof / 2.0, 0.5, x), 0.0, 1.0);
}

struct TTestResult {
    double t_statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    bool significant_at_005 = false;

    nlohmann::ordered_json to_json() const {
        return {{"t", t_statistic}, {"dof", dof}, {"p", p_value}, {"significant_at_005", significant_at_005}};
    }
};

/// When both samples are constant, dof falls back to na + nb - 2 and the
/// result is t = 0, p = 1 for equal means, otherwise t = +-inf, p = 0.
inline TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::TooFewSamples, "t-test needs at least two values per group");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a) / na, vb = sample_variance(b) / nb;
    TTestResult r;
    if (va + vb == 0.0) {
        r.dof = na + nb - 2.0;
        if (ma == mb) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_statistic = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        }
    } else {
        r.t_statistic = (ma - mb) / std::sqrt(va + vb);
        r.dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
        r.p_value = student_t_two_sided_p(r.t_statistic, r.dof);
    }
    r.significant_at_005 = r.p_value < 0.05;
    return r;
}

} // namespace mgtd
