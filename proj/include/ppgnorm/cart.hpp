#pragma once

// CART classification tree grown best-first on the Gini index. Split scores
// are compared as exact rationals over integer class counts, so the
// documented tie-breaks (lowest feature, then lowest threshold, then lowest
// node id) never depend on floating-point rounding.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/util.hpp"

namespace ppgnorm {

struct CartParams {
    int max_splits = 100;
    int min_leaf = 1;
};

struct CartNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int prediction = 0;
    std::vector<std::pair<int, std::size_t>> class_counts;  // sorted by label

    bool is_leaf() const noexcept { return feature < 0; }
};

struct CartModel {
    std::vector<CartNode> nodes;  // nodes[0] is the root
    std::size_t dimension = 0;
    int split_count = 0;
};

__extension__ typedef __int128 wide_int;

// Exact fraction (positive denominator) for impurity comparisons.
struct Fraction {
    wide_int num = 0;
    wide_int den = 1;

    friend bool operator<(const Fraction& a, const Fraction& b) { return a.num * b.den < b.num * a.den; }
    friend bool operator>(const Fraction& a, const Fraction& b) { return b < a; }
    bool positive() const noexcept { return num > 0; }
    double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

using ClassCounts = std::map<int, std::size_t>;

inline std::int64_t sum_of_squares(const ClassCounts& c) {
    std::int64_t s = 0;
    for (const auto& [label, count] : c) s += static_cast<std::int64_t>(count) * static_cast<std::int64_t>(count);
    return s;
}

inline double gini(const ClassCounts& c) {
    std::size_t n = 0;
    for (const auto& [label, count] : c) n += count;
    if (n == 0) return 0.0;
    double s = 1.0;
    for (const auto& [label, count] : c) {
        const double p = static_cast<double>(count) / static_cast<double>(n);
        s -= p * p;
    }
    return s;
}

// Decrease of size-weighted Gini impurity (n * gini) when a node with class
// counts `parent` splits into `left` and `right`:
//   S_L / n_L + S_R / n_R - S_P / n_P,  S = sum of squared counts.
inline Fraction gini_decrease(const ClassCounts& left, std::size_t n_left, const ClassCounts& right,
                              std::size_t n_right, std::int64_t parent_sq, std::size_t n_parent) {
    const wide_int nl = static_cast<wide_int>(n_left);
    const wide_int nr = static_cast<wide_int>(n_right);
    const wide_int np = static_cast<wide_int>(n_parent);
    Fraction f;
    f.num = (static_cast<wide_int>(sum_of_squares(left)) * nr + static_cast<wide_int>(sum_of_squares(right)) * nl) * np -
            static_cast<wide_int>(parent_sq) * nl * nr;
    f.den = nl * nr * np;
    return f;
}

inline int majority_label(const ClassCounts& c) {
    int best = 0;
    std::size_t best_count = 0;
    bool first = true;
    for (const auto& [label, count] : c) {  // ascending label, so ties keep the lower label
        if (first || count > best_count) {
            best = label;
            best_count = count;
            first = false;
        }
    }
    return best;
}

struct CandidateSplit {
    int feature = -1;
    double threshold = 0.0;
    Fraction decrease;
};

namespace detail {

inline std::optional<CandidateSplit> best_split(std::span<const std::vector<double>> x, std::span<const int> y,
                                                std::span<const std::size_t> rows, int min_leaf) {
    ClassCounts total;
    for (auto r : rows) ++total[y[r]];
    const std::int64_t parent_sq = sum_of_squares(total);
    const std::size_t n = rows.size();
    const std::size_t dim = x[rows.front()].size();
    const auto min_side = static_cast<std::size_t>(std::max(1, min_leaf));

    std::optional<CandidateSplit> best;
    std::vector<std::size_t> sorted(rows.begin(), rows.end());
    for (std::size_t f = 0; f < dim; ++f) {
        std::stable_sort(sorted.begin(), sorted.end(),
                         [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
        ClassCounts left;
        ClassCounts right = total;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const int label = y[sorted[k]];
            ++left[label];
            if (--right[label] == 0) right.erase(label);
            const double lo = x[sorted[k]][f];
            const double hi = x[sorted[k + 1]][f];
            if (!(lo < hi)) continue;
            const std::size_t n_left = k + 1;
            if (n_left < min_side || n - n_left < min_side) continue;
            const Fraction dec = gini_decrease(left, n_left, right, n - n_left, parent_sq, n);
            if (!dec.positive()) continue;
            if (!best || dec > best->decrease) {
                double mid = lo + (hi - lo) / 2.0;
                if (!(mid < hi)) mid = lo;
                best = CandidateSplit{static_cast<int>(f), mid, dec};
            }
        }
    }
    return best;
}

inline CartNode make_leaf(std::span<const int> y, std::span<const std::size_t> rows) {
    ClassCounts counts;
    for (auto r : rows) ++counts[y[r]];
    CartNode node;
    node.prediction = majority_label(counts);
    node.class_counts.assign(counts.begin(), counts.end());
    return node;
}

}  // namespace detail

// Best impurity-decreasing split of the full training set, or nothing if no
// split decreases impurity.
inline std::optional<CandidateSplit> best_root_split(std::span<const std::vector<double>> x,
                                                     std::span<const int> y, int min_leaf = 1) {
    if (x.empty()) throw Error(ErrorCode::EmptyInput, "best_root_split: empty training set");
    std::vector<std::size_t> rows(x.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return detail::best_split(x, y, rows, min_leaf);
}

inline CartModel train_cart(std::span<const std::vector<double>> x, std::span<const int> y,
                            const CartParams& params = {}) {
    if (x.empty()) throw Error(ErrorCode::EmptyInput, "train_cart: empty training set");
    if (y.size() != x.size()) throw Error(ErrorCode::DimensionMismatch, "train_cart: label count differs");
    const std::size_t dim = x.front().size();
    for (const auto& row : x) {
        if (row.size() != dim) throw Error(ErrorCode::DimensionMismatch, "train_cart: ragged rows");
    }

    struct OpenLeaf {
        int node;
        std::vector<std::size_t> rows;
        std::optional<CandidateSplit> split;
    };

    CartModel model;
    model.dimension = dim;
    std::vector<std::size_t> all(x.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    model.nodes.push_back(detail::make_leaf(y, all));

    std::vector<OpenLeaf> open;
    open.push_back({0, all, detail::best_split(x, y, all, params.min_leaf)});

    while (model.split_count < params.max_splits) {
        // Largest decrease wins; ties go to the lowest node id.
        std::size_t pick = open.size();
        for (std::size_t k = 0; k < open.size(); ++k) {
            if (!open[k].split) continue;
            if (pick == open.size() || open[k].split->decrease > open[pick].split->decrease ||
                (!(open[pick].split->decrease > open[k].split->decrease) && open[k].node < open[pick].node)) {
                pick = k;
            }
        }
        if (pick == open.size()) break;

        OpenLeaf leaf = std::move(open[pick]);
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
        const auto& split = *leaf.split;

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (auto r : leaf.rows) {
            (x[r][static_cast<std::size_t>(split.feature)] <= split.threshold ? left_rows : right_rows).push_back(r);
        }
        const int left_id = static_cast<int>(model.nodes.size());
        model.nodes.push_back(detail::make_leaf(y, left_rows));
        const int right_id = static_cast<int>(model.nodes.size());
        model.nodes.push_back(detail::make_leaf(y, right_rows));

        auto& parent = model.nodes[static_cast<std::size_t>(leaf.node)];
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = left_id;
        parent.right = right_id;
        ++model.split_count;

        auto left_split = detail::best_split(x, y, left_rows, params.min_leaf);
        auto right_split = detail::best_split(x, y, right_rows, params.min_leaf);
        open.push_back({left_id, std::move(left_rows), std::move(left_split)});
        open.push_back({right_id, std::move(right_rows), std::move(right_split)});
    }
    return model;
}

// Descends with value <= threshold going left.
inline int predict_cart(const CartModel& model, std::span<const double> x) {
    if (x.size() != model.dimension) {
        throw Error(ErrorCode::DimensionMismatch, "predict_cart: expected " + std::to_string(model.dimension) +
                                                      " features, got " + std::to_string(x.size()));
    }
    std::size_t id = 0;
    while (!model.nodes[id].is_leaf()) {
        const auto& node = model.nodes[id];
        id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                  : node.right);
    }
    return model.nodes[id].prediction;
}

inline std::string to_text(const CartModel& m) {
    std::ostringstream os;
    os << "cart_model 1\n";
    os << "dimension " << m.dimension << '\n';
    os << "split_count " << m.split_count << '\n';
    os << "nodes " << m.nodes.size() << '\n';
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        const auto& n = m.nodes[i];
        os << i << ' ' << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
           << n.prediction << ' ' << n.class_counts.size();
        for (const auto& [label, count] : n.class_counts) os << ' ' << label << ':' << count;
        os << '\n';
    }
    return os.str();
}

inline CartModel cart_from_text(std::string_view text) {
    std::istringstream is{std::string(text)};
    auto fail = [](const std::string& what) -> CartModel {
        throw Error(ErrorCode::MalformedRow, "cart model text: " + what);
    };
    std::string key;
    int version = 0;
    std::size_t count = 0;
    CartModel m;
    if (!(is >> key >> version) || key != "cart_model" || version != 1) return fail("bad header");
    if (!(is >> key >> m.dimension) || key != "dimension") return fail("dimension");
    if (!(is >> key >> m.split_count) || key != "split_count") return fail("split_count");
    if (!(is >> key >> count) || key != "nodes") return fail("nodes");
    m.nodes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t id = 0;
        std::size_t classes = 0;
        auto& n = m.nodes[i];
        if (!(is >> id >> n.feature >> n.threshold >> n.left >> n.right >> n.prediction >> classes) || id != i) {
            return fail("node " + std::to_string(i));
        }
        for (std::size_t k = 0; k < classes; ++k) {
            std::string pair;
            if (!(is >> pair)) return fail("class counts of node " + std::to_string(i));
            const auto colon = pair.find(':');
            const auto label = parse_int(std::string_view(pair).substr(0, colon));
            const auto cnt = colon == std::string::npos ? std::nullopt
                                                        : parse_int(std::string_view(pair).substr(colon + 1));
            if (!label || !cnt) return fail("class counts of node " + std::to_string(i));
            n.class_counts.emplace_back(static_cast<int>(*label), static_cast<std::size_t>(*cnt));
        }
    }
    return m;
}

}  // namespace ppgnorm
