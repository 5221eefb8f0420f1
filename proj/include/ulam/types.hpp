#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ulam {

/// Streams a double in its shortest round-trip form (CSV output).
struct Shortest {
    double v;
    friend std::ostream& operator<<(std::ostream& os, Shortest s) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, s.v);
        return os.write(buf, res.ptr - buf);
    }
};

/// Which partial order a chain uses: strict is x<x' and y<y', weak is x<x' and y<=y'.
enum class Order { strict, weak };

inline std::string_view to_string(Order o) { return o == Order::strict ? "strict" : "weak"; }

inline Order parse_order(std::string_view s) {
    if (s == "strict") return Order::strict;
    if (s == "weak") return Order::weak;
    throw std::invalid_argument("order must be 'strict' or 'weak', got '" + std::string(s) + "'");
}

using Letter = std::int32_t;

/// A word of length k*n over {1..n} in which every letter occurs exactly k times.
class MultisetWord {
public:
    MultisetWord() = default;

    MultisetWord(std::int64_t n, std::int64_t k, std::vector<Letter> letters)
        : n_(n), k_(k), letters_(std::move(letters)) {
        if (n < 1 || k < 1) throw std::invalid_argument("MultisetWord: n and k must be >= 1");
        if (static_cast<std::int64_t>(letters_.size()) != n * k)
            throw std::invalid_argument("MultisetWord: length must equal n*k");
        std::vector<std::int64_t> seen(static_cast<std::size_t>(n) + 1, 0);
        for (Letter v : letters_) {
            if (v < 1 || v > n) throw std::invalid_argument("MultisetWord: letter out of range");
            ++seen[static_cast<std::size_t>(v)];
        }
        for (std::int64_t v = 1; v <= n; ++v)
            if (seen[static_cast<std::size_t>(v)] != k)
                throw std::invalid_argument("MultisetWord: letter " + std::to_string(v) +
                                            " does not occur exactly k times");
    }

    /// Infers (n, k) from the letters; throws if they do not form a multiset permutation.
    static MultisetWord from_letters(std::vector<Letter> letters) {
        if (letters.empty()) throw std::invalid_argument("MultisetWord: empty word");
        const Letter n = *std::max_element(letters.begin(), letters.end());
        if (n < 1 || letters.size() % static_cast<std::size_t>(n) != 0)
            throw std::invalid_argument("MultisetWord: length not a multiple of the alphabet size");
        const auto k = static_cast<std::int64_t>(letters.size()) / n;
        return MultisetWord(n, k, std::move(letters));
    }

    /// The sorted word 1^k 2^k ... n^k.
    static MultisetWord sorted(std::int64_t n, std::int64_t k) {
        if (n < 1 || k < 1) throw std::invalid_argument("MultisetWord: n and k must be >= 1");
        std::vector<Letter> w;
        w.reserve(static_cast<std::size_t>(n * k));
        for (std::int64_t v = 1; v <= n; ++v)
            for (std::int64_t r = 0; r < k; ++r) w.push_back(static_cast<Letter>(v));
        MultisetWord out;
        out.n_ = n;
        out.k_ = k;
        out.letters_ = std::move(w);
        return out;
    }

    std::int64_t n() const noexcept { return n_; }
    std::int64_t k() const noexcept { return k_; }
    std::size_t size() const noexcept { return letters_.size(); }
    std::span<const Letter> letters() const noexcept { return letters_; }
    Letter operator[](std::size_t i) const { return letters_[i]; }

    // Only for in-place shuffles by the samplers; the multiset is preserved.
    std::vector<Letter>& mutable_letters() noexcept { return letters_; }

    friend bool operator==(const MultisetWord&, const MultisetWord&) = default;

private:
    std::int64_t n_ = 0;
    std::int64_t k_ = 0;
    std::vector<Letter> letters_;
};

using Row = std::int64_t;

struct Point {
    double x;
    Row row;
    friend bool operator==(const Point&, const Point&) = default;
};

/**
 * Finite point set in (0, x_max] x {1..t_max}, stored row by row with x sorted
 * ascending inside each row. Duplicate (x,row) pairs are rejected.
 */
class PlanarPointSet {
public:
    PlanarPointSet() = default;

    PlanarPointSet(double x_max, Row t_max) : x_max_(x_max), rows_(check_t(t_max)) {
        if (!(x_max > 0.0)) throw std::invalid_argument("PlanarPointSet: x_max must be > 0");
    }

    PlanarPointSet(double x_max, Row t_max, std::span<const Point> points)
        : PlanarPointSet(x_max, t_max) {
        for (const Point& p : points) {
            check_point(p);
            rows_[static_cast<std::size_t>(p.row - 1)].push_back(p.x);
        }
        for (auto& r : rows_) {
            std::sort(r.begin(), r.end());
            if (std::adjacent_find(r.begin(), r.end()) != r.end())
                throw std::invalid_argument("PlanarPointSet: duplicate point");
        }
    }

    /// Replaces row `row` (1-based) with already-sorted, distinct positions.
    void set_row(Row row, std::vector<double> xs) {
        if (row < 1 || row > t_max()) throw std::out_of_range("PlanarPointSet: row out of range");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            check_point({xs[i], row});
            if (i > 0 && !(xs[i - 1] < xs[i]))
                throw std::invalid_argument("PlanarPointSet: row positions must be strictly increasing");
        }
        rows_[static_cast<std::size_t>(row - 1)] = std::move(xs);
    }

    double x_max() const noexcept { return x_max_; }
    Row t_max() const noexcept { return static_cast<Row>(rows_.size()); }

    std::span<const double> row(Row r) const { return rows_.at(static_cast<std::size_t>(r - 1)); }

    std::size_t size() const noexcept {
        std::size_t s = 0;
        for (const auto& r : rows_) s += r.size();
        return s;
    }

    std::vector<Point> points() const {
        std::vector<Point> out;
        out.reserve(size());
        for (std::size_t i = 0; i < rows_.size(); ++i)
            for (double x : rows_[i]) out.push_back({x, static_cast<Row>(i + 1)});
        return out;
    }

    /// The sub-cloud made of rows 1..t.
    PlanarPointSet first_rows(Row t) const {
        PlanarPointSet out(x_max_, std::max<Row>(t, 1));
        for (Row r = 1; r <= std::min(t, t_max()); ++r) out.rows_[static_cast<std::size_t>(r - 1)] = rows_[static_cast<std::size_t>(r - 1)];
        return out;
    }

    friend bool operator==(const PlanarPointSet&, const PlanarPointSet&) = default;

private:
    static std::size_t check_t(Row t) {
        if (t < 1) throw std::invalid_argument("PlanarPointSet: t_max must be >= 1");
        return static_cast<std::size_t>(t);
    }

    void check_point(const Point& p) const {
        if (!(p.x > 0.0 && p.x <= x_max_))
            throw std::invalid_argument("PlanarPointSet: x outside (0, x_max]");
        if (p.row < 1 || p.row > t_max())
            throw std::invalid_argument("PlanarPointSet: row outside {1..t_max}");
    }

    double x_max_ = 1.0;
    std::vector<std::vector<double>> rows_;
};

/// Sources on the bottom edge (row 0) and sink multiplicities on the left edge (x = 0).
struct BoundarySample {
    std::vector<double> sources;        // strictly increasing, in (0, x_max]
    std::vector<std::uint32_t> sinks;   // sinks[i] = multiplicity at row i+1

    std::uint64_t total_sinks() const noexcept {
        return std::accumulate(sinks.begin(), sinks.end(), std::uint64_t{0});
    }

    /// Throws std::invalid_argument when the invariants fail. `order` strict demands 0/1 sinks.
    void validate(Order order, double x_max, Row t_max) const {
        for (std::size_t i = 0; i < sources.size(); ++i) {
            if (!(sources[i] > 0.0 && sources[i] <= x_max))
                throw std::invalid_argument("BoundarySample: source outside (0, x_max]");
            if (i > 0 && !(sources[i - 1] < sources[i]))
                throw std::invalid_argument("BoundarySample: sources must be strictly increasing");
        }
        if (static_cast<Row>(sinks.size()) > t_max)
            throw std::invalid_argument("BoundarySample: more sink rows than t_max");
        if (order == Order::strict)
            for (auto m : sinks)
                if (m > 1) throw std::invalid_argument("BoundarySample: strict sinks must be 0 or 1");
    }

    std::uint32_t sinks_at(Row row) const noexcept {
        const auto i = static_cast<std::size_t>(row - 1);
        return row >= 1 && i < sinks.size() ? sinks[i] : 0;
    }

    friend bool operator==(const BoundarySample&, const BoundarySample&) = default;
};

}  // namespace ulam
