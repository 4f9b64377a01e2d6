#pragma once

// CART with Gini impurity on sparse rows, and a bagged random forest.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/models/common.hpp"
#include "mgtd/parallel.hpp"
#include "mgtd/rng.hpp"

namespace mgtd {

struct TreeConfig {
    int max_depth = 32;  // negative: unlimited
    std::size_t min_samples_split = 2;
    std::size_t max_features = 0;  // features tried per split; 0 = all
    std::uint64_t seed = 42;

    nlohmann::json to_json() const {
        return {{"max_depth", max_depth},
                {"min_samples_split", min_samples_split},
                {"max_features", max_features},
                {"seed", seed}};
    }
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // go left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    double n0 = 0.0;
    double n1 = 0.0;

    bool operator==(const TreeNode&) const = default;
};

inline double feature_value(const SparseVector& x, std::uint32_t j) {
    auto it = std::lower_bound(x.indices.begin(), x.indices.end(), j);
    if (it == x.indices.end() || *it != j) return 0.0;
    return x.values[static_cast<std::size_t>(it - x.indices.begin())];
}

struct TreeParams {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(const SparseVector& x) const {
        std::size_t i = 0;
        while (nodes[i].feature >= 0) {
            const auto& n = nodes[i];
            i = static_cast<std::size_t>(feature_value(x, static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left
                                                                                                               : n.right);
        }
        return nodes[i];
    }

    /// Majority label of the reached leaf (ties go to 0); score is the
    /// leaf's class-1 fraction.
    Prediction predict(const SparseVector& x) const {
        const auto& leaf = leaf_for(x);
        return {leaf.n1 > leaf.n0 ? 1 : 0, leaf.n1 / (leaf.n0 + leaf.n1)};
    }

    std::size_t depth() const {
        std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
        std::size_t best = 0;
        while (!stack.empty()) {
            auto [i, d] = stack.back();
            stack.pop_back();
            best = std::max(best, d);
            if (nodes[i].feature >= 0) {
                stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
                stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
            }
        }
        return best;
    }
};

namespace detail {

class TreeBuilder {
public:
    TreeBuilder(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim, const TreeConfig& cfg,
                Engine& eng)
        : X_(X), y_(y), cfg_(cfg), eng_(eng), slot_(dim, kNone) {}

    TreeParams build(std::vector<std::uint32_t> samples) {
        TreeParams t;
        struct Task {
            std::vector<std::uint32_t> samples;
            std::size_t node;
            int depth;
        };
        t.nodes.emplace_back();
        std::vector<Task> stack;
        stack.push_back({std::move(samples), 0, 0});
        while (!stack.empty()) {
            Task task = std::move(stack.back());
            stack.pop_back();
            double c0 = 0, c1 = 0;
            for (auto s : task.samples) (y_[s] ? c1 : c0) += 1.0;
            t.nodes[task.node].n0 = c0;
            t.nodes[task.node].n1 = c1;
            const bool depth_ok = cfg_.max_depth < 0 || task.depth < cfg_.max_depth;
            if (!depth_ok || task.samples.size() < cfg_.min_samples_split || c0 == 0 || c1 == 0) continue;

            const auto split = best_split(task.samples, c0, c1);
            if (split.feature < 0) continue;

            std::vector<std::uint32_t> left, right;
            for (auto s : task.samples)
                (feature_value(X_[s], static_cast<std::uint32_t>(split.feature)) <= split.threshold ? left : right)
                    .push_back(s);
            const auto li = t.nodes.size();
            t.nodes.emplace_back();
            t.nodes.emplace_back();
            auto& node = t.nodes[task.node];
            node.feature = split.feature;
            node.threshold = split.threshold;
            node.left = static_cast<std::int32_t>(li);
            node.right = static_cast<std::int32_t>(li + 1);
            task.samples.clear();
            task.samples.shrink_to_fit();
            stack.push_back({std::move(right), li + 1, task.depth + 1});
            stack.push_back({std::move(left), li, task.depth + 1});
        }
        return t;
    }

private:
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    struct Split {
        std::int32_t feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    struct Entry {
        double value;
        int label;
    };

    // n * gini, i.e. n - (a^2 + b^2) / n
    static double weighted_gini(double a, double b) {
        const double n = a + b;
        return n > 0 ? n - (a * a + b * b) / n : 0.0;
    }

    Split best_split(const std::vector<std::uint32_t>& samples, double c0, double c1) {
        // Gather the node's non-zero values per feature.
        std::vector<std::uint32_t> features;
        for (auto s : samples) {
            const auto& x = X_[s];
            for (std::size_t k = 0; k < x.indices.size(); ++k) {
                const auto j = x.indices[k];
                if (slot_[j] == kNone) {
                    slot_[j] = static_cast<std::uint32_t>(features.size());
                    features.push_back(j);
                    if (buckets_.size() < features.size()) buckets_.emplace_back();
                    buckets_[slot_[j]].clear();
                }
                buckets_[slot_[j]].push_back({x.values[k], y_[s]});
            }
        }
        const double n = static_cast<double>(samples.size());
        std::vector<std::uint32_t> candidates;
        for (auto j : features) {
            const auto& b = buckets_[slot_[j]];
            bool varies = b.size() < samples.size();
            for (std::size_t k = 1; !varies && k < b.size(); ++k) varies = b[k].value != b[0].value;
            if (varies) candidates.push_back(j);
        }
        std::sort(candidates.begin(), candidates.end());
        if (cfg_.max_features > 0 && candidates.size() > cfg_.max_features) {
            for (std::size_t k = 0; k < cfg_.max_features; ++k) {
                const auto r = k + static_cast<std::size_t>(uniform_index(eng_, candidates.size() - k));
                std::swap(candidates[k], candidates[r]);
            }
            candidates.resize(cfg_.max_features);
            std::sort(candidates.begin(), candidates.end());
        }

        const double parent = weighted_gini(c0, c1);
        Split best;
        for (auto j : candidates) {
            auto& b = buckets_[slot_[j]];
            std::sort(b.begin(), b.end(), [](const Entry& a, const Entry& e) {
                if (a.value != e.value) return a.value < e.value;
                return a.label < e.label;
            });
            double nz0 = 0, nz1 = 0;
            for (const auto& e : b) (e.label ? nz1 : nz0) += 1.0;
            const double z0 = c0 - nz0, z1 = c1 - nz1;
            const bool has_zero = z0 + z1 > 0;

            // Sweep the sorted values with the implicit zero block merged in.
            double l0 = 0, l1 = 0;
            double prev = 0.0;
            bool have_prev = false;
            bool zero_done = !has_zero;
            std::size_t k = 0;
            auto consider = [&](double next) {
                if (!have_prev || next == prev) return;
                const double r0 = c0 - l0, r1 = c1 - l1;
                const double gain = parent - weighted_gini(l0, l1) - weighted_gini(r0, r1);
                if (gain > best.gain + 1e-12 * n) {
                    best.gain = gain;
                    best.feature = static_cast<std::int32_t>(j);
                    best.threshold = prev + (next - prev) / 2.0;
                }
            };
            while (k < b.size() || !zero_done) {
                double v;
                if (!zero_done && (k >= b.size() || b[k].value > 0.0)) {
                    v = 0.0;
                    consider(v);
                    l0 += z0;
                    l1 += z1;
                    zero_done = true;
                } else {
                    v = b[k].value;
                    consider(v);
                    (b[k].label ? l1 : l0) += 1.0;
                    ++k;
                }
                prev = v;
                have_prev = true;
            }
        }
        for (auto j : features) slot_[j] = kNone;
        return best;
    }

    const std::vector<SparseVector>& X_;
    const std::vector<int>& y_;
    const TreeConfig& cfg_;
    Engine& eng_;
    std::vector<std::uint32_t> slot_;
    std::vector<std::vector<Entry>> buckets_;
};

inline TreeParams build_tree(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                             const TreeConfig& cfg, Engine& eng, std::vector<std::uint32_t> samples) {
    detail::TreeBuilder builder(X, y, dim, cfg, eng);
    return builder.build(std::move(samples));
}

} // namespace detail

/// Ties between candidate splits go to the lower feature index, then the
/// lower threshold.
inline TreeParams fit_dtree(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                            const TreeConfig& cfg) {
    detail::check_training_data(X, y, dim);
    if (cfg.min_samples_split < 2) throw Error(ErrorCode::InvalidArgument, "min_samples_split must be >= 2");
    Engine eng(derive_seed(cfg.seed, "dtree"));
    std::vector<std::uint32_t> samples(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) samples[i] = static_cast<std::uint32_t>(i);
    return detail::build_tree(X, y, dim, cfg, eng, std::move(samples));
}

struct ForestConfig {
    std::size_t n_trees = 100;
    bool sqrt_features = true;  // false: every feature is a candidate
    bool bootstrap = true;
    int max_depth = -1;
    std::size_t min_samples_split = 2;
    std::uint64_t seed = 42;

    nlohmann::json to_json() const {
        return {{"n_trees", n_trees},
                {"max_features", sqrt_features ? "sqrt" : "all"},
                {"bootstrap", bootstrap},
                {"max_depth", max_depth},
                {"min_samples_split", min_samples_split},
                {"seed", seed}};
    }
};

struct ForestParams {
    std::vector<TreeParams> trees;

    /// Score is the fraction of trees voting 1.
    Prediction predict(const SparseVector& x) const {
        std::size_t votes = 0;
        for (const auto& t : trees) votes += static_cast<std::size_t>(t.predict(x).label);
        return from_probability(static_cast<double>(votes) / static_cast<double>(trees.size()));
    }
};

/// Tree i draws from Engine(derive_seed(seed, i)), so the result does not
/// depend on thread scheduling.
inline ForestParams fit_rforest(const std::vector<SparseVector>& X, const std::vector<int>& y, std::size_t dim,
                                const ForestConfig& cfg) {
    detail::check_training_data(X, y, dim);
    if (cfg.n_trees == 0) throw Error(ErrorCode::InvalidArgument, "n_trees must be positive");
    TreeConfig tc;
    tc.max_depth = cfg.max_depth;
    tc.min_samples_split = cfg.min_samples_split;
    tc.max_features = cfg.sqrt_features ? std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(dim)))) : 0;
    ForestParams f;
    f.trees.resize(cfg.n_trees);
    parallel_for(cfg.n_trees, [&](std::size_t t) {
        Engine eng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::uint32_t> samples(X.size());
        for (std::size_t i = 0; i < X.size(); ++i)
            samples[i] = cfg.bootstrap ? static_cast<std::uint32_t>(uniform_index(eng, X.size()))
                                       : static_cast<std::uint32_t>(i);
        f.trees[t] = detail::build_tree(X, y, dim, tc, eng, std::move(samples));
    });
    return f;
}

} // namespace mgtd
