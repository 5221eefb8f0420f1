#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ulam/bounds.hpp"
#include "ulam/hammersley.hpp"
#include "ulam/report.hpp"
#include "ulam/rng.hpp"
#include "ulam/sampling.hpp"
#include "ulam/subsequences.hpp"

namespace ulam {

/**
 * Runs `fn(rng, rep)` for rep = 0..reps-1 with rng = make_rng(seed, rep), on
 * `parallelism` threads. Results come back indexed by replica, so anything
 * aggregated from them is independent of the thread count.
 */
template <class T, class Fn>
std::vector<T> run_replicas(std::uint64_t reps, std::uint64_t seed, unsigned parallelism, Fn fn) {
    std::vector<T> out(reps);
    const unsigned workers = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(std::max<std::uint64_t>(reps, 1))));
    auto work = [&](unsigned w, std::exception_ptr& err) {
        try {
            for (std::uint64_t rep = w; rep < reps; rep += workers) {
                RngStream rng = make_rng(seed, rep);
                out[rep] = fn(rng, rep);
            }
        } catch (...) {
            err = std::current_exception();
        }
    };
    std::vector<std::exception_ptr> errors(workers);
    if (workers == 1) {
        work(0, errors[0]);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, std::ref(errors[w]));
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline std::vector<double> subsequence_replicates(std::int64_t n, std::int64_t k, Order order, std::uint64_t reps,
                                                  std::uint64_t seed, unsigned parallelism) {
    if (n < 1 || k < 1) throw std::invalid_argument("subsequence_replicates: n, k must be >= 1");
    return run_replicas<double>(reps, seed, parallelism, [=](RngStream& rng, std::uint64_t) {
        const MultisetWord w = sample_uniform_multiset_permutation(n, k, rng);
        return static_cast<double>(longest_chain(w.letters(), order));
    });
}

inline EstimateReport make_report(std::string command, std::uint64_t seed, std::span<const double> values) {
    const auto st = sample_stats(values);
    EstimateReport r;
    r.command = std::move(command);
    r.seed = seed;
    r.mean = st.mean;
    r.std_error = st.std_error;
    r.reps = values.size();
    return r;
}

/// Mean longest chain of uniform k-multiset permutations of size n, against 2 sqrt(nk) -/+ k.
inline EstimateReport estimate_mean_subsequence(std::int64_t n, std::int64_t k, Order order, std::uint64_t reps,
                                                std::uint64_t seed, unsigned parallelism = 1) {
    if (reps < 2) throw std::invalid_argument("estimate_mean_subsequence: reps must be >= 2");
    const auto values = subsequence_replicates(n, k, order, reps, seed, parallelism);
    EstimateReport r = make_report("estimate", seed, values);
    r.params["n"] = n;
    r.params["k"] = k;
    r.params["order"] = std::string(to_string(order));
    r.set_predicted(predicted_mean(n, k, order));
    return r;
}

inline std::vector<double> poissonized_replicates(double x, std::int64_t t, double lambda, Order order,
                                                  std::uint64_t reps, std::uint64_t seed, unsigned parallelism) {
    return run_replicas<double>(reps, seed, parallelism, [=](RngStream& rng, std::uint64_t) {
        const PlanarPointSet cloud = sample_poissonized_cloud(x, t, lambda, rng);
        return static_cast<double>(longest_chain(cloud, order));
    });
}

struct PoissonizedEstimate {
    EstimateReport report;  // predicted = the mean bound
    double bound = 0.0;
    bool within_bound = false;  // mean <= bound + 4 stderr
};

/// E[L(Pi)] against 2 sqrt(x t lambda) -/+ x lambda. The strict comparison needs t >= x lambda.
inline PoissonizedEstimate estimate_poissonized(double x, std::int64_t t, double lambda, Order order,
                                                std::uint64_t reps, std::uint64_t seed, unsigned parallelism = 1) {
    if (reps < 2) throw std::invalid_argument("estimate_poissonized: reps must be >= 2");
    const MeanBound mb = mean_bound(x, static_cast<double>(t), lambda);
    if (order == Order::strict && static_cast<double>(t) < x * lambda)
        throw std::domain_error("estimate_poissonized: strict comparison requires t >= x*lambda");
    const auto values = poissonized_replicates(x, t, lambda, order, reps, seed, parallelism);
    PoissonizedEstimate out;
    out.report = make_report("estimate_poissonized", seed, values);
    out.report.params["x"] = x;
    out.report.params["t"] = t;
    out.report.params["lambda"] = lambda;
    out.report.params["order"] = std::string(to_string(order));
    out.bound = mb.for_order(order);
    out.report.set_predicted(out.bound);
    out.within_bound = out.report.mean <= out.bound + 4.0 * out.report.std_error;
    return out;
}

/// Two-sided normal p-value.
inline double normal_p_value(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
};

/// Pearson goodness of fit against Poisson(mean); adjacent cells merged until each expects >= 5.
inline ChiSquareResult chi_square_poisson(std::span<const std::uint64_t> sample, double mean) {
    ChiSquareResult res;
    const double n = static_cast<double>(sample.size());
    if (sample.empty()) return res;
    const std::uint64_t top = *std::max_element(sample.begin(), sample.end());
    std::vector<double> observed(top + 1, 0.0);
    for (auto v : sample) observed[v] += 1.0;

    // Cells [lo, hi]; the last cell absorbs the right tail.
    struct Cell { double obs = 0.0, expected = 0.0; };
    std::vector<Cell> cells;
    Cell cur;
    double cdf = 0.0;
    const std::uint64_t last = std::max<std::uint64_t>(top, static_cast<std::uint64_t>(mean + 12.0 * std::sqrt(mean) + 20.0));
    for (std::uint64_t j = 0; j <= last; ++j) {
        const double pmf = mean > 0.0 ? std::exp(-mean + static_cast<double>(j) * std::log(mean) - std::lgamma(static_cast<double>(j) + 1.0))
                                      : (j == 0 ? 1.0 : 0.0);
        cdf += pmf;
        cur.expected += n * pmf;
        cur.obs += j <= top ? observed[j] : 0.0;
        if (cur.expected >= 5.0 && n * (1.0 - cdf) >= 5.0) {
            cells.push_back(cur);
            cur = Cell{};
        }
    }
    cur.expected += n * std::max(0.0, 1.0 - cdf);
    if (!cells.empty() && cur.expected < 5.0) {
        cells.back().obs += cur.obs;
        cells.back().expected += cur.expected;
    } else {
        cells.push_back(cur);
    }
    for (const auto& c : cells) res.statistic += (c.obs - c.expected) * (c.obs - c.expected) / c.expected;
    res.dof = cells.size() > 1 ? cells.size() - 1 : 0;
    res.p_value = res.dof ? boost::math::gamma_q(0.5 * static_cast<double>(res.dof), 0.5 * res.statistic) : 1.0;
    return res;
}

struct StationarityReport {
    Order variant = Order::strict;
    double x = 0.0, lambda = 0.0, source_rate = 0.0, sink_param = 0.0;
    std::int64_t t = 0;
    std::uint64_t reps = 0, seed = 0;
    double target_mean = 0.0;  // x * source_rate
    SampleStats stats;
    double z_mean = 0.0, p_mean = 1.0;
    double z_variance = 0.0, p_variance = 1.0;
    ChiSquareResult chi_square;
    std::vector<std::uint64_t> counts;

    bool mean_within(double sigmas) const {
        return std::fabs(stats.mean - target_mean) <= sigmas * std::sqrt(target_mean / static_cast<double>(reps));
    }

    nlohmann::ordered_json to_json() const {
        return {{"command", "stationarity"}, {"variant", std::string(to_string(variant))},
                {"x", x}, {"lambda", lambda}, {"source_rate", source_rate}, {"sink_param", sink_param},
                {"t", t}, {"reps", reps}, {"seed", seed}, {"target_mean", target_mean},
                {"mean", stats.mean}, {"variance", stats.variance}, {"stderr", stats.std_error},
                {"z_mean", z_mean}, {"p_mean", p_mean}, {"z_variance", z_variance}, {"p_variance", p_variance},
                {"chi_square", chi_square.statistic}, {"dof", chi_square.dof}, {"p_chi_square", chi_square.p_value}};
    }
};

/**
 * Particle count of the boundary-driven process at time t across replicas,
 * compared with the Poisson(x * source_rate) law of the initial configuration.
 */
inline StationarityReport stationarity_test(double x, double lambda, double source_rate, Order variant,
                                            std::int64_t t, std::uint64_t reps, std::uint64_t seed,
                                            unsigned parallelism = 1) {
    if (!(x > 0.0)) throw std::invalid_argument("stationarity_test: x must be > 0");
    if (t < 0) throw std::invalid_argument("stationarity_test: t must be >= 0");
    if (reps < 2) throw std::invalid_argument("stationarity_test: reps must be >= 2");
    const BoundaryRates rates = variant == Order::strict ? BoundaryRates::strict_from_source(lambda, source_rate)
                                                         : BoundaryRates::weak_from_source(lambda, source_rate);
    StationarityReport rep;
    rep.variant = variant;
    rep.x = x;
    rep.lambda = lambda;
    rep.source_rate = source_rate;
    rep.sink_param = rates.sink_param;
    rep.t = t;
    rep.reps = reps;
    rep.seed = seed;
    rep.target_mean = x * source_rate;
    rep.counts = run_replicas<std::uint64_t>(reps, seed, parallelism, [&](RngStream& rng, std::uint64_t) {
        if (t == 0) return static_cast<std::uint64_t>(sample_ppp_line(x, source_rate, rng).size());
        const ProcessRun run = run_process(x, t, lambda, variant, rates, rng, {.record_trajectory = false, .keep_cloud = false});
        return static_cast<std::uint64_t>(run.final_state.count());
    });
    std::vector<double> as_double(rep.counts.begin(), rep.counts.end());
    rep.stats = sample_stats(as_double);
    const double mu = rep.target_mean;
    const double n = static_cast<double>(reps);
    rep.z_mean = (rep.stats.mean - mu) / std::sqrt(mu / n);
    rep.p_mean = normal_p_value(rep.z_mean);
    // Var(s^2) ~ (mu4 - sigma^4)/n with mu4 = mu + 3 mu^2 for a Poisson law
    rep.z_variance = (rep.stats.variance - mu) / std::sqrt((mu + 2.0 * mu * mu) / n);
    rep.p_variance = normal_p_value(rep.z_variance);
    rep.chi_square = chi_square_poisson(rep.counts, mu);
    return rep;
}

/**
 * Exceedance frequencies around the first-order centre c = 2 sqrt(x t lambda) -/+ x lambda:
 * upper = P(L > (1+eps) c), lower = P(L < (1-eps) c). For the strict order the
 * same frequencies are also reported for the boundary-augmented statistic with
 * optimal rates, next to 2 exp(-g1(eps) (sqrt(x t lambda) - x lambda)).
 */
struct DeviationProfile {
    Order order = Order::strict;
    double x = 0.0, t = 0.0, lambda = 0.0, center = 0.0;
    std::uint64_t reps = 0, seed = 0;
    std::vector<double> eps_grid;
    std::vector<double> upper_freq, lower_freq;
    std::vector<double> augmented_upper_freq, augmented_lower_freq;  // strict only
    std::vector<double> bound_upper;

    nlohmann::ordered_json to_json() const {
        return {{"command", "deviation"}, {"order", std::string(to_string(order))},
                {"x", x}, {"t", t}, {"lambda", lambda}, {"center", center}, {"reps", reps}, {"seed", seed},
                {"eps", eps_grid}, {"upper_freq", upper_freq}, {"lower_freq", lower_freq},
                {"augmented_upper_freq", augmented_upper_freq}, {"augmented_lower_freq", augmented_lower_freq},
                {"bound_upper", bound_upper}};
    }

    /// CSV: eps,upper_freq,lower_freq,augmented_upper_freq,augmented_lower_freq,bound_upper
    void write_csv(std::ostream& os) const {
        os << "eps,upper_freq,lower_freq,augmented_upper_freq,augmented_lower_freq,bound_upper\n";
        for (std::size_t i = 0; i < eps_grid.size(); ++i) {
            os << Shortest{eps_grid[i]} << ',' << Shortest{upper_freq[i]} << ',' << Shortest{lower_freq[i]} << ',';
            if (!augmented_upper_freq.empty()) os << Shortest{augmented_upper_freq[i]};
            os << ',';
            if (!augmented_lower_freq.empty()) os << Shortest{augmented_lower_freq[i]};
            os << ',' << Shortest{bound_upper[i]} << '\n';
        }
    }
};

inline DeviationProfile deviation_profile(double x, std::int64_t t, double lambda, Order order,
                                          std::vector<double> eps_grid, std::uint64_t reps, std::uint64_t seed,
                                          unsigned parallelism = 1) {
    const double td = static_cast<double>(t);
    if (!(x > 0.0 && t >= 1 && lambda > 0.0)) throw std::domain_error("deviation_profile: x, t, lambda must be > 0");
    if (td < x * lambda) throw std::domain_error("deviation_profile: requires t >= x*lambda");
    if (reps < 1) throw std::invalid_argument("deviation_profile: reps must be >= 1");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0 && eps_grid[i] < 1.0)) throw std::domain_error("deviation_profile: eps must lie in (0,1)");
        if (i > 0 && !(eps_grid[i - 1] < eps_grid[i]))
            throw std::invalid_argument("deviation_profile: eps grid must be strictly increasing");
    }
    DeviationProfile prof;
    prof.order = order;
    prof.x = x;
    prof.t = td;
    prof.lambda = lambda;
    prof.reps = reps;
    prof.seed = seed;
    prof.center = mean_bound(x, td, lambda).for_order(order);
    prof.eps_grid = eps_grid;

    // Augmented statistic needs optimal rates, which exist only for t > x lambda.
    const bool augmented = order == Order::strict && td > x * lambda;
    std::optional<BoundaryRates> rates;
    if (augmented) rates = optimal_rates_strict(x, td, lambda).rates;

    struct Pair { double plain = 0.0, boundary = 0.0; };
    const auto values = run_replicas<Pair>(reps, seed, parallelism, [&](RngStream& rng, std::uint64_t) {
        Pair p;
        const ProcessRun run = run_process(x, t, lambda, order, std::nullopt, rng, {.record_trajectory = false, .keep_cloud = false});
        p.plain = static_cast<double>(run.final_state.count());
        if (augmented) {
            const ProcessRun b = run_process(x, t, lambda, order, rates, rng, {.record_trajectory = false, .keep_cloud = false});
            p.boundary = static_cast<double>(b.final_state.count() + b.total_sinks);
        }
        return p;
    });

    const double n = static_cast<double>(reps);
    const double scale = std::sqrt(x * td * lambda) - x * lambda;
    for (double e : eps_grid) {
        const double hi = (1.0 + e) * prof.center, lo = (1.0 - e) * prof.center;
        auto freq = [&](auto pick, auto pred) {
            double c = 0.0;
            for (const auto& v : values) c += pred(pick(v)) ? 1.0 : 0.0;
            return c / n;
        };
        auto plain = [](const Pair& v) { return v.plain; };
        auto boundary = [](const Pair& v) { return v.boundary; };
        auto above = [hi](double v) { return v > hi; };
        auto below = [lo](double v) { return v < lo; };
        prof.upper_freq.push_back(freq(plain, above));
        prof.lower_freq.push_back(freq(plain, below));
        if (augmented) {
            prof.augmented_upper_freq.push_back(freq(boundary, above));
            prof.augmented_lower_freq.push_back(freq(boundary, below));
        }
        prof.bound_upper.push_back(2.0 * std::exp(-g1(e) * scale));
    }
    return prof;
}

struct IdentityInstance {
    std::uint64_t index = 0;
    Order variant = Order::strict;
    bool boundary = false;
    double x = 0.0, lambda = 0.0, source_rate = 0.0;
    std::int64_t t = 0;
    std::uint64_t particles = 0, sinks = 0, chain_length = 0;
    bool witness_ok = true;
};

struct IdentitySuiteReport {
    std::uint64_t clouds = 0, boundary_instances = 0, seed = 0;
    double max_x = 0.0, max_lambda = 0.0;
    std::int64_t max_t = 0;
    std::uint64_t checks = 0, failures = 0, witness_failures = 0;
    std::vector<IdentityInstance> failed;  // at most 20 kept

    bool passed() const { return failures == 0 && witness_failures == 0; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json bad = nlohmann::ordered_json::array();
        for (const auto& f : failed)
            bad.push_back({{"index", f.index}, {"variant", std::string(to_string(f.variant))}, {"boundary", f.boundary},
                           {"x", f.x}, {"t", f.t}, {"lambda", f.lambda}, {"source_rate", f.source_rate},
                           {"particles", f.particles}, {"sinks", f.sinks}, {"chain_length", f.chain_length},
                           {"witness_ok", f.witness_ok}});
        return {{"command", "verify"}, {"clouds", clouds}, {"boundary_instances", boundary_instances},
                {"max_x", max_x}, {"max_t", max_t}, {"max_lambda", max_lambda}, {"seed", seed},
                {"checks", checks}, {"failures", failures}, {"witness_failures", witness_failures},
                {"failed", bad}};
    }
};

/**
 * Random instances with x in (0, max_x], t in {1..max_t}, lambda in (0, max_lambda].
 * Replica i < clouds checks both variants without boundary; replica
 * clouds + j < clouds + boundary_instances draws valid rates for both variants
 * (strict alpha in (0,3), weak beta in (lambda, 4 lambda)) and checks the
 * boundary identity. Every check also extracts and certifies a witness chain.
 */
inline IdentitySuiteReport identity_suite(std::uint64_t clouds, std::uint64_t boundary_instances, double max_x,
                                          std::int64_t max_t, double max_lambda, std::uint64_t seed,
                                          unsigned parallelism = 1) {
    if (!(max_x > 0.0 && max_lambda > 0.0) || max_t < 1)
        throw std::invalid_argument("identity_suite: max_x, max_t, max_lambda must be positive");
    using Outcome = std::vector<IdentityInstance>;
    const auto results = run_replicas<Outcome>(clouds + boundary_instances, seed, parallelism, [&](RngStream& rng, std::uint64_t rep) {
        IdentityInstance base;
        base.index = rep;
        base.x = max_x * rng.uniform();
        base.t = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_t)));
        base.lambda = max_lambda * rng.uniform();
        const PlanarPointSet cloud = sample_poissonized_cloud(base.x, base.t, base.lambda, rng);
        Outcome out;
        for (Order v : {Order::strict, Order::weak}) {
            IdentityInstance inst = base;
            inst.variant = v;
            std::optional<BoundarySample> boundary;
            if (rep >= clouds) {
                inst.boundary = true;
                const BoundaryRates rates = v == Order::strict
                    ? BoundaryRates::strict_from_source(inst.lambda, 3.0 * rng.uniform())
                    : BoundaryRates::weak_from_source(inst.lambda, inst.lambda * (1.0 + 3.0 * rng.uniform()));
                inst.source_rate = rates.source_rate;
                boundary = sample_boundary(inst.x, inst.t, rates, rng);
            }
            const auto res = check_line_identity(cloud, boundary ? &*boundary : nullptr, v, true);
            inst.particles = res.particles;
            inst.sinks = res.sinks;
            inst.chain_length = res.chain_length;
            inst.witness_ok = res.witness && res.witness->certified;
            out.push_back(inst);
        }
        return out;
    });
    IdentitySuiteReport rep;
    rep.clouds = clouds;
    rep.boundary_instances = boundary_instances;
    rep.seed = seed;
    rep.max_x = max_x;
    rep.max_t = max_t;
    rep.max_lambda = max_lambda;
    for (const auto& outcome : results) {
        for (const auto& inst : outcome) {
            ++rep.checks;
            const bool ok = inst.particles + inst.sinks == inst.chain_length;
            if (!ok) ++rep.failures;
            if (!inst.witness_ok) ++rep.witness_failures;
            if ((!ok || !inst.witness_ok) && rep.failed.size() < 20) rep.failed.push_back(inst);
        }
    }
    return rep;
}

struct DepoissonizationReport {
    std::int64_t n = 0, k = 0;
    EstimateReport word;         // E[L_<(S_{k;n})]
    EstimateReport poissonized;  // E[L_<(Pi^(1/n)_{nk,n})]
    double difference = 0.0;
    double budget = 0.0;         // 6 sqrt(n sqrt k) + 8 (stderr sum)
    bool asserted = false;       // false in the k >= n reporting-only regime
    bool within_budget = true;

    nlohmann::ordered_json to_json() const {
        return {{"command", "depoissonization"}, {"n", n}, {"k", k}, {"word", word.to_json()},
                {"poissonized", poissonized.to_json()}, {"difference", difference}, {"budget", budget},
                {"asserted", asserted}, {"within_budget", within_budget}};
    }
};

/// Multiset-permutation mean next to its poissonized counterpart (x = nk, t = n, lambda = 1/n).
inline DepoissonizationReport depoissonization_report(std::int64_t n, std::int64_t k, std::uint64_t reps,
                                                      std::uint64_t seed, unsigned parallelism = 1) {
    if (n < 1 || k < 1) throw std::invalid_argument("depoissonization_report: n, k must be >= 1");
    DepoissonizationReport rep;
    rep.n = n;
    rep.k = k;
    rep.word = estimate_mean_subsequence(n, k, Order::strict, reps, seed, parallelism);
    const double x = static_cast<double>(n * k);
    const double lambda = 1.0 / static_cast<double>(n);
    // separate streams for the poissonized side
    const std::uint64_t pseed = mix64(seed ^ 0x5eedf00dULL);
    const auto values = poissonized_replicates(x, n, lambda, Order::strict, reps, pseed, parallelism);
    rep.poissonized = make_report("estimate_poissonized", pseed, values);
    rep.poissonized.params["x"] = x;
    rep.poissonized.params["t"] = n;
    rep.poissonized.params["lambda"] = lambda;
    rep.poissonized.params["order"] = "strict";
    rep.poissonized.set_predicted(mean_bound(x, static_cast<double>(n), lambda).strict_mean);
    rep.difference = rep.word.mean - rep.poissonized.mean;
    rep.budget = 6.0 * std::sqrt(static_cast<double>(n) * std::sqrt(static_cast<double>(k))) +
                 8.0 * (rep.word.std_error + rep.poissonized.std_error);
    rep.asserted = k < n;
    rep.within_budget = std::fabs(rep.difference) <= rep.budget;
    return rep;
}

}  // namespace ulam
