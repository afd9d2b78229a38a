#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hpm/dataset.hpp"
#include "hpm/errors.hpp"
#include "hpm/knn.hpp"
#include "hpm/rng.hpp"

namespace hpm {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0; // leaf mean
    int left = -1;
    int right = -1;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const double* x) const {
        int i = 0;
        while (!nodes[size_t(i)].is_leaf())
            i = x[size_t(nodes[size_t(i)].feature)] < nodes[size_t(i)].threshold ? nodes[size_t(i)].left
                                                                                  : nodes[size_t(i)].right;
        return nodes[size_t(i)].value;
    }

    int leaf_count() const {
        int c = 0;
        for (const auto& n : nodes) c += n.is_leaf() ? 1 : 0;
        return c;
    }
};

// Bagged CART regression trees: each bag draws n rows with replacement, grows
// an unpruned tree by greedy variance reduction (midpoint thresholds, both
// children >= min_node rows), and the ensemble prediction is the unweighted
// mean over bags. Fully deterministic under a fixed seed.
struct TreeBagModel {
    int n_bags = 25;
    int min_node = 5;
    uint64_t seed = 0;
    std::vector<std::string> feature_names;
    std::vector<Tree> trees;
    // Summed SSE reduction credited to each feature over all splits and bags;
    // feeds the tree-based importance report.
    std::vector<double> split_gain;

    double predict(const double* x) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict(x);
        return s / double(trees.size());
    }

    std::vector<double> predict_rows(const CountryDataset& d) const {
        std::vector<double> out(d.rows());
        for (size_t i = 0; i < d.rows(); ++i) out[i] = predict(d.row(i));
        return out;
    }
};

namespace detail {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Greedy exhaustive scan: every feature, every admissible boundary between
// distinct adjacent sorted values. Ties keep the first candidate in
// (feature, threshold) order, so tree growth is reproducible.
inline SplitChoice best_split(const std::vector<double>& x, const std::vector<double>& y, size_t p,
                              const std::vector<size_t>& rows, int min_node) {
    SplitChoice best;
    size_t n = rows.size();
    double sum = 0.0, sumsq = 0.0;
    for (size_t r : rows) {
        sum += y[r];
        sumsq += y[r] * y[r];
    }
    double parent_sse = sumsq - sum * sum / double(n);
    if (parent_sse <= 0.0) return best;

    std::vector<size_t> order(rows);
    std::vector<double> ys(n);
    for (size_t j = 0; j < p; ++j) {
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            double va = x[a * p + j], vb = x[b * p + j];
            if (va != vb) return va < vb;
            return a < b;
        });
        for (size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
        double left_sum = 0.0, left_sumsq = 0.0;
        for (size_t s = 1; s < n; ++s) {
            left_sum += ys[s - 1];
            left_sumsq += ys[s - 1] * ys[s - 1];
            if (s < size_t(min_node) || n - s < size_t(min_node)) continue;
            double lo = x[order[s - 1] * p + j], hi = x[order[s] * p + j];
            if (lo == hi) continue;
            double right_sum = sum - left_sum;
            double right_sumsq = sumsq - left_sumsq;
            double sse = (left_sumsq - left_sum * left_sum / double(s)) +
                         (right_sumsq - right_sum * right_sum / double(n - s));
            double gain = parent_sse - sse;
            if (gain > best.gain) {
                best.found = true;
                best.feature = int(j);
                best.threshold = (lo + hi) / 2.0;
                best.gain = gain;
            }
        }
    }
    return best;
}

inline int grow_tree(Tree& tree, const std::vector<double>& x, const std::vector<double>& y, size_t p,
                     std::vector<size_t> rows, int min_node, std::vector<double>& gain_acc) {
    int id = int(tree.nodes.size());
    tree.nodes.emplace_back();
    double mean = 0.0;
    for (size_t r : rows) mean += y[r];
    mean /= double(rows.size());
    tree.nodes[size_t(id)].value = mean;

    if (rows.size() < size_t(2 * min_node)) return id;
    SplitChoice s = best_split(x, y, p, rows, min_node);
    if (!s.found) return id;

    std::vector<size_t> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (size_t r : rows)
        (x[r * p + size_t(s.feature)] < s.threshold ? left : right).push_back(r);
    gain_acc[size_t(s.feature)] += s.gain;

    tree.nodes[size_t(id)].feature = s.feature;
    tree.nodes[size_t(id)].threshold = s.threshold;
    int l = grow_tree(tree, x, y, p, std::move(left), min_node, gain_acc);
    int r = grow_tree(tree, x, y, p, std::move(right), min_node, gain_acc);
    tree.nodes[size_t(id)].left = l;
    tree.nodes[size_t(id)].right = r;
    return id;
}

} // namespace detail

inline TreeBagModel train_treebag(const CountryDataset& d, int n_bags = 25, int min_node = 5,
                                  uint64_t seed = 0, size_t min_rows = kMinPanelRows) {
    size_t n = d.rows(), p = d.cols();
    if (n < min_rows)
        throw DataError(d.country + "/" + d.spec_name + ": panel has " + std::to_string(n) +
                        " rows, need at least " + std::to_string(min_rows));
    if (n_bags < 1) throw ConfigError("n_bags must be >= 1");
    if (min_node < 1) throw ConfigError("min_node must be >= 1");

    TreeBagModel m;
    m.n_bags = n_bags;
    m.min_node = min_node;
    m.seed = seed;
    m.feature_names = d.feature_names;
    m.split_gain.assign(p, 0.0);
    m.trees.reserve(size_t(n_bags));

    Rng rng(seed);
    std::vector<double> by(n);
    std::vector<double> bx(n * p);
    for (int b = 0; b < n_bags; ++b) {
        auto idx = rng.bootstrap_indices(n);
        for (size_t i = 0; i < n; ++i) {
            by[i] = d.y[idx[i]];
            const double* src = d.row(idx[i]);
            std::copy(src, src + p, bx.begin() + ptrdiff_t(i * p));
        }
        Tree t;
        std::vector<size_t> rows(n);
        std::iota(rows.begin(), rows.end(), size_t(0));
        detail::grow_tree(t, bx, by, p, std::move(rows), min_node, m.split_gain);
        m.trees.push_back(std::move(t));
    }
    return m;
}

} // namespace hpm
