#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ulam/report.hpp"
#include "ulam/rng.hpp"
#include "ulam/sampling.hpp"
#include "ulam/subsequences.hpp"
#include "ulam/types.hpp"

namespace ulam {

enum class CouplingKind { projection, poissonized_upper, poissonized_lower, grouping };

/**
 * Objects built on one probability space.
 *
 * projection:        first = sigma (a permutation of kn), second = its projection S
 * poissonized_upper: cloud = Pi, second = S from the k leftmost points per row
 * poissonized_lower: cloud = Pi, second = S from Pi completed to k points per row
 * grouping:          first = S (k-multiset of size n), second = grouped word
 *
 * When the event flag is false the coupled word is an independent uniform draw.
 */
struct CoupledSample {
    CouplingKind kind;
    std::optional<PlanarPointSet> cloud;
    std::optional<MultisetWord> first;
    MultisetWord second;
    bool event_flag = true;
    std::int64_t group = 1;  // A, for grouping
};

/// S(i) = ceil(sigma(i) / k).
inline MultisetWord project_permutation_to_multiset(const MultisetWord& sigma, std::int64_t k) {
    if (k < 1) throw std::invalid_argument("project_permutation_to_multiset: k must be >= 1");
    if (sigma.k() != 1) throw std::invalid_argument("project_permutation_to_multiset: sigma must be a permutation");
    if (sigma.size() % static_cast<std::size_t>(k) != 0)
        throw std::invalid_argument("project_permutation_to_multiset: length not divisible by k");
    std::vector<Letter> out(sigma.size());
    std::transform(sigma.letters().begin(), sigma.letters().end(), out.begin(),
                   [k](Letter v) { return static_cast<Letter>((v + k - 1) / k); });
    return MultisetWord(static_cast<std::int64_t>(sigma.size()) / k, k, std::move(out));
}

inline CoupledSample sample_projection_coupling(std::int64_t n, std::int64_t k, RngStream& rng) {
    MultisetWord sigma = sample_uniform_permutation(n * k, rng);
    MultisetWord s = project_permutation_to_multiset(sigma, k);
    return {CouplingKind::projection, std::nullopt, std::move(sigma), std::move(s), true, 1};
}

namespace detail {

// Reads the rows of `points` in increasing x order.
inline MultisetWord relative_order_word(std::int64_t n, std::int64_t k, std::vector<Point> points) {
    std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.row > b.row);
    });
    std::vector<Letter> letters(points.size());
    std::transform(points.begin(), points.end(), letters.begin(), [](const Point& p) { return static_cast<Letter>(p.row); });
    return MultisetWord(n, k, std::move(letters));
}

}  // namespace detail

/// Which k points of a row feed the upper coupling's word.
enum class RowSelection { uniform_subset, leftmost };

/**
 * Pi^(lambda) on (0, nk] x {1..n}; on E (every row has >= k points) S is the
 * relative order of k points kept per row. A uniform k-subset leaves k i.i.d.
 * uniform points per row, so S is uniform. Keeping the k leftmost points also
 * gives a subset of Pi, but rows with more points then sit further left and S
 * is not uniform (for n = k = 2, 1122 comes out about twice as often as 1212).
 */
inline CoupledSample poissonized_coupling_upper(std::int64_t n, std::int64_t k, double lambda, RngStream& rng,
                                                RowSelection selection = RowSelection::uniform_subset) {
    if (n < 1 || k < 1) throw std::invalid_argument("poissonized_coupling_upper: n, k must be >= 1");
    PlanarPointSet cloud = sample_poissonized_cloud(static_cast<double>(n * k), n, lambda, rng);
    bool event = true;
    for (Row r = 1; r <= n; ++r)
        if (static_cast<std::int64_t>(cloud.row(r).size()) < k) event = false;
    if (!event)
        return {CouplingKind::poissonized_upper, std::move(cloud), std::nullopt,
                sample_uniform_multiset_permutation(n, k, rng), false, 1};
    std::vector<Point> kept;
    std::vector<double> xs;
    for (Row r = 1; r <= n; ++r) {
        const auto row = cloud.row(r);
        xs.assign(row.begin(), row.end());
        if (selection == RowSelection::uniform_subset) {
            // partial Fisher-Yates: the first k entries become a uniform k-subset
            for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
                const auto j = i + static_cast<std::size_t>(rng.below(xs.size() - i));
                std::swap(xs[i], xs[j]);
            }
        }
        for (std::int64_t i = 0; i < k; ++i) kept.push_back({xs[static_cast<std::size_t>(i)], r});
    }
    MultisetWord s = detail::relative_order_word(n, k, std::move(kept));
    return {CouplingKind::poissonized_upper, std::move(cloud), std::nullopt, std::move(s), true, 1};
}

/// On F (every row has <= k points) each row is completed with fresh uniform points up to k.
inline CoupledSample poissonized_coupling_lower(std::int64_t n, std::int64_t k, double lambda, RngStream& rng) {
    if (n < 1 || k < 1) throw std::invalid_argument("poissonized_coupling_lower: n, k must be >= 1");
    const double x = static_cast<double>(n * k);
    PlanarPointSet cloud = sample_poissonized_cloud(x, n, lambda, rng);
    bool event = true;
    for (Row r = 1; r <= n; ++r)
        if (static_cast<std::int64_t>(cloud.row(r).size()) > k) event = false;
    if (!event)
        return {CouplingKind::poissonized_lower, std::move(cloud), std::nullopt,
                sample_uniform_multiset_permutation(n, k, rng), false, 1};
    std::vector<Point> completed;
    for (Row r = 1; r <= n; ++r) {
        const auto row = cloud.row(r);
        std::vector<double> xs(row.begin(), row.end());
        while (static_cast<std::int64_t>(xs.size()) < k) {
            const double v = x * rng.uniform();
            if (std::find(xs.begin(), xs.end(), v) == xs.end()) xs.push_back(v);
        }
        for (double v : xs) completed.push_back({v, r});
    }
    MultisetWord s = detail::relative_order_word(n, k, std::move(completed));
    return {CouplingKind::poissonized_lower, std::move(cloud), std::nullopt, std::move(s), true, 1};
}

/// Keeps letters <= A*floor(n/A) and maps v to ceil(v/A): a (floor(n/A), kA) multiset word.
inline MultisetWord group_heights(const MultisetWord& word, std::int64_t A) {
    if (A < 1) throw std::invalid_argument("group_heights: A must be >= 1");
    if (A > word.n()) throw std::invalid_argument("group_heights: A must not exceed n");
    const std::int64_t groups = word.n() / A;
    const std::int64_t top = A * groups;
    std::vector<Letter> out;
    out.reserve(static_cast<std::size_t>(top * word.k()));
    for (Letter v : word.letters())
        if (v <= top) out.push_back(static_cast<Letter>((v + A - 1) / A));
    return MultisetWord(groups, word.k() * A, std::move(out));
}

inline CoupledSample sample_grouping_coupling(std::int64_t n, std::int64_t k, std::int64_t A, RngStream& rng) {
    MultisetWord s = sample_uniform_multiset_permutation(n, k, rng);
    MultisetWord grouped = group_heights(s, A);
    return {CouplingKind::grouping, std::nullopt, std::move(s), std::move(grouped), true, A};
}

/**
 * The deterministic inequality carried by each coupling:
 *   projection         L_<(S) <= L_<(sigma) = L_<=(sigma) <= L_<=(S)
 *   poissonized_upper  L_<=(S) <= L_<=(Pi) + nk (1 - 1_E)
 *   poissonized_lower  L_<=(S) >= L_<=(Pi) 1_F
 *   grouping           L_<=(S) <= L_<=(S~) + kA
 */
inline bool coupling_inequality_holds(const CoupledSample& c) {
    switch (c.kind) {
        case CouplingKind::projection: {
            const auto& sigma = *c.first;
            return lis_strict(c.second) <= lis_strict(sigma) && lis_strict(sigma) == lnds_weak(sigma) &&
                   lnds_weak(sigma) <= lnds_weak(c.second);
        }
        case CouplingKind::poissonized_upper: {
            const auto slack = c.event_flag ? 0 : static_cast<std::size_t>(c.second.n() * c.second.k());
            return lnds_weak(c.second) <= lnds_weak(*c.cloud) + slack;
        }
        case CouplingKind::poissonized_lower:
            return lnds_weak(c.second) >= (c.event_flag ? lnds_weak(*c.cloud) : 0);
        case CouplingKind::grouping:
            return lnds_weak(*c.first) <= lnds_weak(c.second) + static_cast<std::size_t>(c.first->k() * c.group);
    }
    return false;
}

/// Monte Carlo estimate of E[L_<] with row_counts[l] i.i.d. uniform points on row l+1.
inline EstimateReport estimate_e(std::span<const std::int64_t> row_counts, std::uint64_t reps, RngStream& rng) {
    if (reps < 1) throw std::invalid_argument("estimate_e: reps must be >= 1");
    Row t = std::max<Row>(1, static_cast<Row>(row_counts.size()));
    std::vector<double> values(reps);
    for (auto& v : values) {
        PlanarPointSet cloud(1.0, t);
        for (std::size_t r = 0; r < row_counts.size(); ++r) {
            if (row_counts[r] < 0) throw std::invalid_argument("estimate_e: negative row count");
            cloud.set_row(static_cast<Row>(r + 1), sample_sorted_uniform(static_cast<std::size_t>(row_counts[r]), 1.0, rng));
        }
        v = static_cast<double>(lis_strict(cloud));
    }
    const auto st = sample_stats(values);
    EstimateReport rep;
    rep.command = "estimate_e";
    rep.params["row_counts"] = std::vector<std::int64_t>(row_counts.begin(), row_counts.end());
    rep.seed = rng.seed();
    rep.mean = st.mean;
    rep.std_error = st.std_error;
    rep.reps = reps;
    return rep;
}

}  // namespace ulam
