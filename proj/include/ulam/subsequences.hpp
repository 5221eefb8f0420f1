#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ulam/types.hpp"

namespace ulam {

namespace detail {

// Patience sorting over a sequence of row values. Strict uses lower_bound
// (equal values cannot extend a chain), weak uses upper_bound.
template <class T>
std::size_t patience_length(std::span<const T> seq, Order order) {
    std::vector<T> tails;
    tails.reserve(64);
    for (const T& v : seq) {
        auto it = order == Order::strict ? std::lower_bound(tails.begin(), tails.end(), v)
                                         : std::upper_bound(tails.begin(), tails.end(), v);
        if (it == tails.end())
            tails.push_back(v);
        else
            *it = v;
    }
    return tails.size();
}

// Points by x ascending, ties by row descending: equal-x points can never chain.
inline std::vector<Point> sorted_for_chains(const PlanarPointSet& points) {
    auto pts = points.points();
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.row > b.row);
    });
    return pts;
}

inline std::vector<Row> rows_in_chain_order(const PlanarPointSet& points) {
    const auto pts = sorted_for_chains(points);
    std::vector<Row> rows(pts.size());
    std::transform(pts.begin(), pts.end(), rows.begin(), [](const Point& p) { return p.row; });
    return rows;
}

// Fenwick tree of prefix maxima over rows 1..size.
class PrefixMax {
public:
    explicit PrefixMax(std::size_t size) : tree_(size + 1, 0) {}

    void raise(std::size_t i, std::uint64_t v) {
        for (; i < tree_.size(); i += i & (~i + 1)) tree_[i] = std::max(tree_[i], v);
    }

    std::uint64_t query(std::size_t i) const {
        std::uint64_t best = 0;
        for (i = std::min(i, tree_.size() - 1); i > 0; i -= i & (~i + 1)) best = std::max(best, tree_[i]);
        return best;
    }

private:
    std::vector<std::uint64_t> tree_;
};

}  // namespace detail

// Longest strictly increasing subsequence of a word (position = x, letter = row).
inline std::size_t lis_strict(std::span<const Letter> word) { return detail::patience_length(word, Order::strict); }
inline std::size_t lnds_weak(std::span<const Letter> word) { return detail::patience_length(word, Order::weak); }
inline std::size_t lis_strict(const MultisetWord& w) { return lis_strict(w.letters()); }
inline std::size_t lnds_weak(const MultisetWord& w) { return lnds_weak(w.letters()); }

inline std::size_t lis_strict(const PlanarPointSet& points) {
    const auto rows = detail::rows_in_chain_order(points);
    return detail::patience_length(std::span<const Row>(rows), Order::strict);
}

inline std::size_t lnds_weak(const PlanarPointSet& points) {
    const auto rows = detail::rows_in_chain_order(points);
    return detail::patience_length(std::span<const Row>(rows), Order::weak);
}

inline std::size_t longest_chain(const PlanarPointSet& points, Order order) {
    return order == Order::strict ? lis_strict(points) : lnds_weak(points);
}

inline std::size_t longest_chain(std::span<const Letter> word, Order order) {
    return order == Order::strict ? lis_strict(word) : lnds_weak(word);
}

/**
 * Longest chain through interior points, sources on row 0 and sinks on x = 0.
 *
 * A chain entering the interior from the boundary uses either all sources left
 * of its first interior point or all sink units below it (never both), so each
 * interior point gets a boundary-derived starting value and the interior part
 * is a weighted longest chain, solved with a prefix-max tree over rows.
 * O(m log m).
 */
inline std::uint64_t longest_chain_with_boundary(const PlanarPointSet& points, const BoundarySample& boundary,
                                                 Order order) {
    boundary.validate(order, points.x_max(), points.t_max());
    const auto t = static_cast<std::size_t>(points.t_max());

    // sinks_upto[r] = sink units in rows 1..r
    std::vector<std::uint64_t> sinks_upto(t + 1, 0);
    for (std::size_t r = 1; r <= t; ++r) sinks_upto[r] = sinks_upto[r - 1] + boundary.sinks_at(static_cast<Row>(r));

    const auto& src = boundary.sources;
    std::uint64_t best = std::max<std::uint64_t>(src.size(), sinks_upto[t]);

    detail::PrefixMax chain_end(t);
    for (const Point& p : detail::sorted_for_chains(points)) {
        const auto r = static_cast<std::size_t>(p.row);
        const std::size_t below = order == Order::strict ? r - 1 : r;
        const auto sources_left =
            static_cast<std::uint64_t>(std::lower_bound(src.begin(), src.end(), p.x) - src.begin());
        const std::uint64_t start = std::max({chain_end.query(below), sources_left, sinks_upto[below]});
        chain_end.raise(r, start + 1);
        best = std::max(best, start + 1);
    }
    return best;
}

enum class ChainElementKind { interior, source, sink };

struct ChainElement {
    double x;
    Row y;
    ChainElementKind kind;
    std::uint32_t unit = 0;  // index of a sink unit within its row
};

/// Precedence straight from the coordinate definition, with sources at (s, 0) and sinks at (0, i).
inline bool chain_precedes(const ChainElement& a, const ChainElement& b, Order order) {
    if (order == Order::strict) {
        if (a.x < b.x && a.y < b.y) return true;
        if (a.x == 0.0 && b.x == 0.0 && a.y < b.y) return true;
        return a.x < b.x && a.y == 0 && b.y == 0;
    }
    if (a.x < b.x && a.y <= b.y) return true;
    if (a.x == 0.0 && b.x == 0.0 && (a.y < b.y || (a.y == b.y && a.unit < b.unit))) return true;
    return a.x < b.x && a.y == 0 && b.y == 0;
}

inline std::vector<ChainElement> chain_elements(const PlanarPointSet& points, const BoundarySample* boundary) {
    std::vector<ChainElement> els;
    for (const Point& p : points.points()) els.push_back({p.x, p.row, ChainElementKind::interior});
    if (boundary) {
        for (double s : boundary->sources) els.push_back({s, 0, ChainElementKind::source});
        for (std::size_t i = 0; i < boundary->sinks.size(); ++i)
            for (std::uint32_t u = 0; u < boundary->sinks[i]; ++u)
                els.push_back({0.0, static_cast<Row>(i + 1), ChainElementKind::sink, u});
    }
    return els;
}

inline constexpr std::size_t brute_force_cap = 2000;

/**
 * Quadratic oracle: memoised longest path over the pairwise precedence relation,
 * with no sorting and no reductions. At most 2000 elements (sink units counted
 * individually).
 */
inline std::uint64_t brute_force_longest_chain(const PlanarPointSet& points, const BoundarySample* boundary,
                                               Order order) {
    const auto els = chain_elements(points, boundary);
    if (els.size() > brute_force_cap) throw std::length_error("brute_force_longest_chain: more than 2000 elements");
    const std::size_t m = els.size();
    std::vector<std::uint64_t> ending(m, 0);  // 0 = not yet computed

    // Iterative DFS: ending[v] = 1 + max over predecessors u of ending[u].
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t root = 0; root < m; ++root) {
        if (ending[root]) continue;
        stack.push_back({root, 0});
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            bool descended = false;
            while (next < m) {
                const std::size_t u = next++;
                if (u != v && !ending[u] && chain_precedes(els[u], els[v], order)) {
                    stack.push_back({u, 0});
                    descended = true;
                    break;
                }
            }
            if (descended) continue;
            std::uint64_t best = 0;
            for (std::size_t u = 0; u < m; ++u)
                if (u != v && chain_precedes(els[u], els[v], order)) best = std::max(best, ending[u]);
            ending[v] = best + 1;
            stack.pop_back();
        }
    }
    return m == 0 ? 0 : *std::max_element(ending.begin(), ending.end());
}

inline std::uint64_t brute_force_longest_chain(const PlanarPointSet& points, Order order) {
    return brute_force_longest_chain(points, nullptr, order);
}

inline std::uint64_t brute_force_longest_chain(const PlanarPointSet& points, const BoundarySample& boundary,
                                               Order order) {
    return brute_force_longest_chain(points, &boundary, order);
}

/// A word as a point set: position i (1-based) is x, the letter is the row.
inline PlanarPointSet word_as_points(std::span<const Letter> word) {
    Row t = 1;
    std::vector<Point> pts;
    pts.reserve(word.size());
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (word[i] < 1) throw std::invalid_argument("word_as_points: letters must be >= 1");
        pts.push_back({static_cast<double>(i + 1), word[i]});
        t = std::max<Row>(t, word[i]);
    }
    return PlanarPointSet(static_cast<double>(std::max<std::size_t>(word.size(), 1)), t, pts);
}

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t n, std::int64_t d) {
        const auto g = std::gcd(n, d);
        return g ? Rational{n / g, d / g} : Rational{0, 1};
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
    friend bool operator<=(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den <= static_cast<__int128>(b.num) * a.den;
    }
    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(a.num * b.den - b.num * a.den, a.den * b.den);
    }
};

inline constexpr std::int64_t exact_e_cap = 9;

/**
 * Exact E[L_<] for row_counts[l] uniform points on row l+1. The relative x-order
 * of the points is uniform, so every arrangement of the multiset of row labels
 * is equally likely; all of them are enumerated.
 */
inline Rational exact_e(std::span<const std::int64_t> row_counts) {
    std::vector<Letter> word;
    for (std::size_t r = 0; r < row_counts.size(); ++r) {
        if (row_counts[r] < 0) throw std::invalid_argument("exact_e: negative row count");
        for (std::int64_t i = 0; i < row_counts[r]; ++i) word.push_back(static_cast<Letter>(r + 1));
        if (static_cast<std::int64_t>(word.size()) > exact_e_cap)
            throw std::length_error("exact_e: total point count exceeds 9");
    }
    if (word.empty()) return {0, 1};
    std::int64_t total = 0, count = 0;
    do {
        total += static_cast<std::int64_t>(lis_strict(std::span<const Letter>(word)));
        ++count;
    } while (std::next_permutation(word.begin(), word.end()));
    return Rational::make(total, count);
}

/// exact_e memoised on the row-count tuple (trailing zero rows dropped).
class ExactECache {
public:
    Rational operator()(std::vector<std::int64_t> counts) {
        while (!counts.empty() && counts.back() == 0) counts.pop_back();
        auto it = memo_.find(counts);
        if (it != memo_.end()) return it->second;
        const Rational v = exact_e(counts);
        memo_.emplace(std::move(counts), v);
        return v;
    }

private:
    std::map<std::vector<std::int64_t>, Rational> memo_;
};

}  // namespace ulam
