#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace mgtd {

/// Indices strictly increasing; values non-zero.
struct SparseVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;

    std::size_t nnz() const { return indices.size(); }
    bool empty() const { return indices.empty(); }

    double dot(std::span<const double> w) const {
        double s = 0.0;
        for (std::size_t k = 0; k < indices.size(); ++k) s += values[k] * w[indices[k]];
        return s;
    }

    double norm2() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }

    std::uint32_t max_index_plus_one() const { return indices.empty() ? 0 : indices.back() + 1; }

    std::vector<double> to_dense(std::size_t dim) const {
        std::vector<double> d(dim, 0.0);
        for (std::size_t k = 0; k < indices.size(); ++k) d[indices[k]] = values[k];
        return d;
    }

    static SparseVector from_dense(std::span<const double> d) {
        SparseVector v;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i] != 0.0) {
                v.indices.push_back(static_cast<std::uint32_t>(i));
                v.values.push_back(d[i]);
            }
        }
        return v;
    }

    bool operator==(const SparseVector&) const = default;
};

} // namespace mgtd
