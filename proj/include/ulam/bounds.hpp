#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ulam/types.hpp"

namespace ulam {

/**
 * Source/sink intensities of a boundary-driven Hammersley process.
 *
 * strict: sources PPP(alpha), sinks Bernoulli(p), with lambda/(lambda+alpha) = p.
 * weak:   sources PPP(beta),  sinks Geometric_{>=0}(1-beta*), with beta*.beta = lambda, beta > lambda.
 */
struct BoundaryRates {
    Order variant = Order::strict;
    double source_rate = 0.0;  // alpha or beta
    double sink_param = 0.0;   // p or beta*
    double lambda = 0.0;

    static BoundaryRates strict_from_source(double lambda, double alpha) {
        BoundaryRates r{Order::strict, alpha, lambda / (lambda + alpha), lambda};
        r.validate();
        return r;
    }

    static BoundaryRates weak_from_source(double lambda, double beta) {
        BoundaryRates r{Order::weak, beta, lambda / beta, lambda};
        r.validate();
        return r;
    }

    /// Stationarity constraint residual, relative.
    double residual() const {
        if (variant == Order::strict) return std::fabs(lambda / (lambda + source_rate) - sink_param) / sink_param;
        return std::fabs(sink_param * source_rate - lambda) / lambda;
    }

    void validate() const {
        if (!(lambda > 0.0)) throw std::invalid_argument("BoundaryRates: lambda must be > 0");
        if (variant == Order::strict) {
            if (!(source_rate >= 0.0)) throw std::invalid_argument("BoundaryRates: alpha must be >= 0");
            if (!(sink_param > 0.0 && sink_param <= 1.0))
                throw std::invalid_argument("BoundaryRates: p must lie in (0,1]");
        } else {
            if (!(source_rate > lambda))
                throw std::invalid_argument("BoundaryRates: beta > lambda violated");
            if (!(sink_param > 0.0 && sink_param < 1.0))
                throw std::invalid_argument("BoundaryRates: beta* must lie in (0,1)");
        }
        if (!(residual() <= 1e-12))
            throw std::invalid_argument(variant == Order::strict
                                            ? "BoundaryRates: lambda/(lambda+alpha) = p violated"
                                            : "BoundaryRates: beta*.beta = lambda violated");
    }

    /// Expected number of sinks in a single row.
    double sink_mean() const {
        return variant == Order::strict ? sink_param : sink_param / (1.0 - sink_param);
    }
};

struct OptimalRates {
    BoundaryRates rates;
    double objective;  // x*alpha + t*p  or  x*beta + t*beta*/(1-beta*)
};

/// Minimiser of x*alpha + t*p under lambda/(lambda+alpha) = p. Requires t > x*lambda.
inline OptimalRates optimal_rates_strict(double x, double t, double lambda) {
    if (!(x > 0.0 && t > 0.0 && lambda > 0.0))
        throw std::domain_error("optimal_rates_strict: x, t, lambda must be > 0");
    if (!(t > x * lambda)) throw std::domain_error("optimal_rates_strict: requires t > x*lambda");
    const double alpha = std::sqrt(t * lambda / x) - lambda;
    const double p = std::sqrt(x * lambda / t);
    BoundaryRates r{Order::strict, alpha, p, lambda};
    r.validate();
    return {r, x * alpha + t * p};
}

inline OptimalRates optimal_rates_weak(double x, double t, double lambda) {
    if (!(x > 0.0 && t > 0.0 && lambda > 0.0))
        throw std::domain_error("optimal_rates_weak: x, t, lambda must be > 0");
    const double beta = std::sqrt(t * lambda / x) + lambda;
    const double beta_star = 1.0 / (1.0 + std::sqrt(t / (x * lambda)));
    BoundaryRates r{Order::weak, beta, beta_star, lambda};
    r.validate();
    return {r, x * beta + t * beta_star / (1.0 - beta_star)};
}

/// First-order mean of the longest chain in a uniform k-multiset permutation of size n.
inline double predicted_mean(std::int64_t n, std::int64_t k, Order order) {
    if (n < 1 || k < 1) throw std::invalid_argument("predicted_mean: n, k must be >= 1");
    const double root = 2.0 * std::sqrt(static_cast<double>(n) * static_cast<double>(k));
    return order == Order::strict ? root - static_cast<double>(k) : root + static_cast<double>(k);
}

struct MeanBound {
    double x, t, lambda;
    double strict_mean;  // 2 sqrt(x t lambda) - x lambda
    double weak_mean;    // 2 sqrt(x t lambda) + x lambda

    double for_order(Order o) const { return o == Order::strict ? strict_mean : weak_mean; }
};

inline MeanBound mean_bound(double x, double t, double lambda) {
    if (!(x > 0.0 && t > 0.0 && lambda > 0.0))
        throw std::domain_error("mean_bound: x, t, lambda must be > 0");
    const double root = 2.0 * std::sqrt(x * t * lambda);
    return {x, t, lambda, root - x * lambda, root + x * lambda};
}

inline double delta_eps(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::domain_error("delta_eps: eps must lie in [0,1]");
    return 2.0 - eps - 2.0 * std::sqrt(1.0 - eps);
}

/// Explicit rate in the concentration bound for the boundary-augmented strict statistic.
inline double g1(double eps) { return eps * eps / 12.0; }

// ---------------------------------------------------------------------------
// Tail inequalities and their exact certificates

enum class TailKind {
    poisson_lower,   // P(Poisson(l) <= l - A)        <= exp(-A^2/(4l))
    poisson_upper,   // P(Poisson(l) >= l + A)        <= exp(-A^2/(4l))
    binomial_upper,  // P(Bin(n,p) >= (1+e)np)        <= exp(-e^2 np/3)
    binomial_lower,  // P(Bin(n,p) <= (1-e)np)        <= exp(-e^2 np/2)
    geomsum_upper,   // P(G_1+..+G_k >= (1+e)k a/(1-a)) <= exp(-e^2 k a/(1-a)/4)
    geomsum_lower,   // P(G_1+..+G_k <= (1-e)k a/(1-a)) <= exp(-e^2 k a/(1-a)/4)
};

inline std::string_view to_string(TailKind k) {
    switch (k) {
        case TailKind::poisson_lower: return "poisson_lower";
        case TailKind::poisson_upper: return "poisson_upper";
        case TailKind::binomial_upper: return "binomial_upper";
        case TailKind::binomial_lower: return "binomial_lower";
        case TailKind::geomsum_upper: return "geomsum_upper";
        case TailKind::geomsum_lower: return "geomsum_lower";
    }
    return "?";
}

inline TailKind parse_tail_kind(std::string_view s) {
    for (auto k : {TailKind::poisson_lower, TailKind::poisson_upper, TailKind::binomial_upper,
                   TailKind::binomial_lower, TailKind::geomsum_upper, TailKind::geomsum_lower})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown tail kind '" + std::string(s) + "'");
}

/// Parameters of one tail query; fields unused by a kind stay zero.
struct TailParams {
    double lambda = 0.0;  // Poisson mean
    double A = 0.0;       // Poisson deviation
    std::int64_t n = 0;   // Binomial trials
    double p = 0.0;       // Binomial success probability
    std::int64_t k = 0;   // number of geometric summands
    double alpha = 0.0;   // geometric parameter
    double eps = 0.0;     // relative deviation (Binomial, geometric sum)
};

namespace detail {

inline bool is_poisson(TailKind k) { return k == TailKind::poisson_lower || k == TailKind::poisson_upper; }
inline bool is_binomial(TailKind k) { return k == TailKind::binomial_lower || k == TailKind::binomial_upper; }

inline void check_tail_params(TailKind kind, const TailParams& q) {
    if (is_poisson(kind)) {
        if (!(q.lambda > 0.0 && q.A > 0.0)) throw std::domain_error("poisson tail: need lambda > 0, A > 0");
        return;
    }
    if (!(q.eps > 0.0 && q.eps < 1.0)) throw std::domain_error("tail bound: eps must lie in (0,1)");
    if (is_binomial(kind)) {
        if (!(q.n >= 1 && q.p > 0.0 && q.p < 1.0)) throw std::domain_error("binomial tail: need n >= 1, 0 < p < 1");
    } else if (!(q.k >= 1 && q.alpha > 0.0 && q.alpha < 1.0)) {
        throw std::domain_error("geometric-sum tail: need k >= 1, 0 < alpha < 1");
    }
}

// Integer part of a real threshold; values within 1e-9 of an integer snap to it so
// that e.g. 1.2 * 50 is treated as exactly 60.
inline double snap(double v) {
    const double r = std::round(v);
    return std::fabs(v - r) <= 1e-9 * std::max(1.0, std::fabs(v)) ? r : v;
}

inline double log_sum_exp(const std::vector<double>& logs) {
    if (logs.empty()) return -INFINITY;
    const double m = *std::max_element(logs.begin(), logs.end());
    if (m == -INFINITY) return -INFINITY;
    double s = 0.0;
    for (double l : logs) s += std::exp(l - m);
    return m + std::log(s);
}

// Sums exp(log_pmf(j)) for j = first, first+1, ... (up to last) in log space. Once past the
// mode, stops when a term drops below 1e-18 of the running total.
template <class LogPmf>
double tail_sum_up(LogPmf log_pmf, double first, double last, double mode) {
    std::vector<double> logs;
    double best = -INFINITY;
    for (double j = std::max(first, 0.0); j <= last; j += 1.0) {
        const double l = log_pmf(j);
        logs.push_back(l);
        best = std::max(best, l);
        if (j > mode && l < best + std::log(1e-18)) break;
    }
    return std::exp(log_sum_exp(logs));
}

template <class LogPmf>
double tail_sum_down(LogPmf log_pmf, double last) {
    std::vector<double> logs;
    double best = -INFINITY;
    for (double j = last; j >= 0.0; j -= 1.0) {
        const double l = log_pmf(j);
        logs.push_back(l);
        best = std::max(best, l);
        if (l < best + std::log(1e-18) && j < last) break;
    }
    return std::exp(log_sum_exp(logs));
}

}  // namespace detail

/// Closed-form right-hand side of the tail inequality.
inline double tail_bound(TailKind kind, const TailParams& q) {
    detail::check_tail_params(kind, q);
    switch (kind) {
        case TailKind::poisson_lower:
        case TailKind::poisson_upper: return std::exp(-q.A * q.A / (4.0 * q.lambda));
        case TailKind::binomial_upper: return std::exp(-q.eps * q.eps * static_cast<double>(q.n) * q.p / 3.0);
        case TailKind::binomial_lower: return std::exp(-q.eps * q.eps * static_cast<double>(q.n) * q.p / 2.0);
        case TailKind::geomsum_upper:
        case TailKind::geomsum_lower: {
            const double mu = static_cast<double>(q.k) * q.alpha / (1.0 - q.alpha);
            return std::exp(-0.25 * q.eps * q.eps * mu);
        }
    }
    return 1.0;
}

/// Exact left-hand side, by log-space summation of pmf terms.
inline double exact_tail_probability(TailKind kind, const TailParams& q) {
    detail::check_tail_params(kind, q);
    using detail::snap;
    switch (kind) {
        case TailKind::poisson_lower:
        case TailKind::poisson_upper: {
            const double l = q.lambda;
            auto log_pmf = [l](double j) { return -l + j * std::log(l) - std::lgamma(j + 1.0); };
            if (kind == TailKind::poisson_lower) {
                const double last = std::floor(snap(l - q.A));
                return last < 0.0 ? 0.0 : detail::tail_sum_down(log_pmf, last);
            }
            const double first = std::ceil(snap(l + q.A));
            return detail::tail_sum_up(log_pmf, first, INFINITY, std::floor(l));
        }
        case TailKind::binomial_upper:
        case TailKind::binomial_lower: {
            const double n = static_cast<double>(q.n);
            const double lp = std::log(q.p), lq = std::log1p(-q.p);
            const double lgn = std::lgamma(n + 1.0);
            auto log_pmf = [=](double j) {
                return lgn - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) + j * lp + (n - j) * lq;
            };
            const double mean = n * q.p;
            if (kind == TailKind::binomial_upper) {
                const double first = std::ceil(snap((1.0 + q.eps) * mean));
                return first > n ? 0.0 : detail::tail_sum_up(log_pmf, first, n, std::floor((n + 1.0) * q.p));
            }
            const double last = std::floor(snap((1.0 - q.eps) * mean));
            return last < 0.0 ? 0.0 : detail::tail_sum_down(log_pmf, last);
        }
        case TailKind::geomsum_upper:
        case TailKind::geomsum_lower: {
            // Sum of k i.i.d. Geometric_{>=0}(1-a) is negative binomial:
            // P(S = j) = C(j+k-1, j) (1-a)^k a^j.
            const double k = static_cast<double>(q.k);
            const double la = std::log(q.alpha), l1a = std::log1p(-q.alpha);
            const double lgk = std::lgamma(k);
            auto log_pmf = [=](double j) {
                return std::lgamma(j + k) - std::lgamma(j + 1.0) - lgk + k * l1a + j * la;
            };
            const double mean = k * q.alpha / (1.0 - q.alpha);
            const double mode = k > 1.0 ? std::floor((k - 1.0) * q.alpha / (1.0 - q.alpha)) : 0.0;
            if (kind == TailKind::geomsum_upper) {
                const double first = std::ceil(snap((1.0 + q.eps) * mean));
                return detail::tail_sum_up(log_pmf, first, INFINITY, mode);
            }
            const double last = std::floor(snap((1.0 - q.eps) * mean));
            return last < 0.0 ? 0.0 : detail::tail_sum_down(log_pmf, last);
        }
    }
    return 0.0;
}

struct TailCertificateRow {
    TailKind kind;
    TailParams params;
    double exact;
    double bound;
    bool pass;
};

struct TailCertificate {
    std::vector<TailCertificateRow> rows;

    bool all_pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
    }
    std::size_t failures() const {
        return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.pass; }));
    }

    /// CSV: kind,lambda,A,n,p,k,alpha,eps,exact,bound,pass
    void write_csv(std::ostream& os) const {
        os << "kind,lambda,A,n,p,k,alpha,eps,exact,bound,pass\n";
        for (const auto& r : rows) {
            const auto& q = r.params;
            os << to_string(r.kind) << ',' << Shortest{q.lambda} << ',' << Shortest{q.A} << ',' << q.n << ','
               << Shortest{q.p} << ',' << q.k << ',' << Shortest{q.alpha} << ',' << Shortest{q.eps} << ','
               << Shortest{r.exact} << ',' << Shortest{r.bound} << ','
               << (r.pass ? 1 : 0) << '\n';
        }
    }
};

/// Exact probability against the closed-form bound on every grid point. No tolerance.
inline TailCertificate verify_tail_inequality(TailKind kind, const std::vector<TailParams>& grid) {
    TailCertificate cert;
    cert.rows.reserve(grid.size());
    for (const auto& q : grid) {
        const double exact = exact_tail_probability(kind, q);
        const double bound = tail_bound(kind, q);
        cert.rows.push_back({kind, q, exact, bound, exact <= bound});
    }
    return cert;
}

/// Default grids: lambda in {1,2,...,128} x 17 values of A evenly spaced from sqrt(lambda) to 4 lambda;
/// n in {10..1000} x p, eps in {0.1..0.9}; k in {1..200} x alpha, eps in {0.1..0.9}.
inline std::vector<TailParams> default_tail_grid(TailKind kind) {
    std::vector<TailParams> grid;
    const double tenths[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    if (detail::is_poisson(kind)) {
        for (double l = 1.0; l <= 128.0; l *= 2.0) {
            const double lo = std::sqrt(l), hi = 4.0 * l;
            for (int i = 0; i <= 16; ++i) grid.push_back({.lambda = l, .A = lo + (hi - lo) * i / 16.0});
        }
    } else if (detail::is_binomial(kind)) {
        for (std::int64_t n : {10, 20, 50, 100, 200, 500, 1000})
            for (double p : tenths)
                for (double e : tenths) grid.push_back({.n = n, .p = p, .eps = e});
    } else {
        for (std::int64_t k : {1, 2, 5, 10, 20, 50, 100, 200})
            for (double a : tenths)
                for (double e : tenths) grid.push_back({.k = k, .alpha = a, .eps = e});
    }
    return grid;
}

struct RegimeDiagnostics {
    double log_small_ratio;  // log(k^2 k! / sqrt(n))
    double log_large_ratio;  // log(n^2 k exp(-k^a) / sqrt(n k))
    double small_ratio() const { return std::exp(log_small_ratio); }
    double large_ratio() const { return std::exp(log_large_ratio); }
};

/// Finite-n values of the small/large growth conditions on k. Reporting only.
inline RegimeDiagnostics regime_diagnostics(std::int64_t n, std::int64_t k, double exponent = 0.5) {
    if (n < 1 || k < 1) throw std::invalid_argument("regime_diagnostics: n, k must be >= 1");
    const double ln = std::log(static_cast<double>(n));
    const double lk = std::log(static_cast<double>(k));
    const double kd = static_cast<double>(k);
    return {2.0 * lk + std::lgamma(kd + 1.0) - 0.5 * ln,
            2.0 * ln + lk - std::pow(kd, exponent) - 0.5 * (ln + lk)};
}

}  // namespace ulam
