#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ulam/bounds.hpp"
#include "ulam/rng.hpp"

using namespace ulam;

namespace ulam {
// readable parameter names in test listings
inline void PrintTo(TailKind k, std::ostream* os) { *os << to_string(k); }
}  // namespace ulam

TEST(BoundaryRates, CompletionSatisfiesConstraints) {
    const auto s = BoundaryRates::strict_from_source(1.0, 1.0);
    EXPECT_DOUBLE_EQ(s.sink_param, 0.5);
    EXPECT_LT(s.residual(), 1e-15);
    EXPECT_DOUBLE_EQ(s.sink_mean(), 0.5);
    const auto w = BoundaryRates::weak_from_source(1.0, 2.0);
    EXPECT_DOUBLE_EQ(w.sink_param, 0.5);
    EXPECT_DOUBLE_EQ(w.sink_mean(), 1.0);
    EXPECT_THROW(BoundaryRates::weak_from_source(1.0, 0.5), std::invalid_argument);
    EXPECT_THROW(BoundaryRates::weak_from_source(1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(BoundaryRates::strict_from_source(0.0, 1.0), std::invalid_argument);
    BoundaryRates bad{Order::strict, 1.0, 0.4, 1.0};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(OptimalRates, StrictExamples) {
    const auto r = optimal_rates_strict(1.0, 4.0, 1.0);
    EXPECT_DOUBLE_EQ(r.rates.source_rate, 1.0);
    EXPECT_DOUBLE_EQ(r.rates.sink_param, 0.5);
    EXPECT_DOUBLE_EQ(r.objective, 3.0);
    EXPECT_THROW(optimal_rates_strict(1.0, 1.0, 1.0), std::domain_error);
    EXPECT_THROW(optimal_rates_strict(1.0, 0.5, 1.0), std::domain_error);
    const auto q = optimal_rates_strict(2.0, 8.0, 0.5);
    EXPECT_LT(std::fabs(q.rates.lambda / (q.rates.lambda + q.rates.source_rate) - q.rates.sink_param), 1e-12);
}

TEST(OptimalRates, WeakExamples) {
    const auto r = optimal_rates_weak(1.0, 4.0, 1.0);
    EXPECT_DOUBLE_EQ(r.rates.source_rate, 3.0);
    EXPECT_NEAR(r.rates.sink_param, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.objective, 5.0, 1e-12);
    const auto s = optimal_rates_weak(100.0, 1.0, 0.001);
    EXPECT_GT(s.rates.source_rate, s.rates.lambda);
    EXPECT_THROW(optimal_rates_weak(0.0, 1.0, 1.0), std::domain_error);
    EXPECT_THROW(optimal_rates_weak(1.0, -1.0, 1.0), std::domain_error);
}

TEST(OptimalRates, RandomSweepResiduals) {
    RngStream r = make_rng(11, 0);
    for (int i = 0; i < 10000; ++i) {
        const double x = 0.01 + 100.0 * r.uniform();
        const double lambda = 0.01 + 10.0 * r.uniform();
        const double t = x * lambda * (1.0 + 1e-6 + 50.0 * r.uniform());
        const double root = 2.0 * std::sqrt(x * t * lambda);
        const auto s = optimal_rates_strict(x, t, lambda);
        const auto w = optimal_rates_weak(x, t, lambda);
        ASSERT_LT(s.rates.residual(), 1e-12);
        ASSERT_LT(w.rates.residual(), 1e-12);
        ASSERT_LT(std::fabs(s.objective - (root - x * lambda)) / (root - x * lambda), 1e-10);
        ASSERT_LT(std::fabs(w.objective - (root + x * lambda)) / (root + x * lambda), 1e-10);
        ASSERT_GT(w.rates.source_rate, lambda);
    }
}

TEST(PredictedMean, Values) {
    EXPECT_DOUBLE_EQ(predicted_mean(400, 100, Order::strict), 300.0);
    EXPECT_DOUBLE_EQ(predicted_mean(400, 100, Order::weak), 500.0);
    EXPECT_NEAR(predicted_mean(10000, 1, Order::strict), 200.0, 1.0);
    EXPECT_NEAR(predicted_mean(10000, 1, Order::weak), 200.0, 1.0);
    EXPECT_THROW(predicted_mean(0, 1, Order::strict), std::invalid_argument);
}

TEST(MeanBound, OrderedOnValidDomain) {
    RngStream r = make_rng(12, 0);
    for (int i = 0; i < 1000; ++i) {
        const double x = 50.0 * r.uniform() + 1e-3, lambda = 3.0 * r.uniform() + 1e-3;
        const double t = x * lambda * (1.0 + 10.0 * r.uniform());
        const auto mb = mean_bound(x, t, lambda);
        ASSERT_LE(mb.strict_mean, mb.weak_mean);
        ASSERT_GE(mb.strict_mean, 0.0);
    }
    EXPECT_THROW(mean_bound(0.0, 1.0, 1.0), std::domain_error);
}

TEST(DeltaEps, ValuesAndMonotone) {
    EXPECT_DOUBLE_EQ(delta_eps(0.0), 0.0);
    EXPECT_DOUBLE_EQ(delta_eps(0.75), 0.25);
    EXPECT_DOUBLE_EQ(delta_eps(1.0), 1.0);
    double prev = delta_eps(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double v = delta_eps(i / 1000.0);
        ASSERT_GT(v, prev) << i;
        prev = v;
    }
    EXPECT_THROW(delta_eps(-0.1), std::domain_error);
    EXPECT_THROW(delta_eps(1.1), std::domain_error);
}

TEST(TailBound, ClosedForms) {
    EXPECT_NEAR(tail_bound(TailKind::poisson_lower, {.lambda = 4, .A = 4}), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(tail_bound(TailKind::poisson_upper, {.lambda = 4, .A = 4}), std::exp(-1.0), 1e-15);
    // exponent /3 on the upper side, /2 on the lower side
    EXPECT_NEAR(tail_bound(TailKind::binomial_upper, {.n = 100, .p = 0.5, .eps = 0.2}), std::exp(-2.0 / 3.0), 1e-15);
    EXPECT_NEAR(tail_bound(TailKind::binomial_lower, {.n = 100, .p = 0.5, .eps = 0.2}), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(tail_bound(TailKind::geomsum_upper, {.k = 100, .alpha = 0.5, .eps = 0.5}), std::exp(-6.25), 1e-15);
    EXPECT_NEAR(tail_bound(TailKind::geomsum_lower, {.k = 100, .alpha = 0.5, .eps = 0.5}), std::exp(-6.25), 1e-15);
}

TEST(TailBound, RejectsOutOfRange) {
    EXPECT_THROW(tail_bound(TailKind::binomial_upper, {.n = 10, .p = 0.5, .eps = 1.0}), std::domain_error);
    EXPECT_THROW(tail_bound(TailKind::geomsum_lower, {.k = 10, .alpha = 0.5, .eps = 0.0}), std::domain_error);
    EXPECT_THROW(tail_bound(TailKind::poisson_upper, {.lambda = 0, .A = 1}), std::domain_error);
    EXPECT_THROW(parse_tail_kind("cauchy"), std::invalid_argument);
    EXPECT_EQ(parse_tail_kind("geomsum_upper"), TailKind::geomsum_upper);
}

// Reference values from scipy.stats.
TEST(ExactTail, AgreesWithReferenceCdfs) {
    EXPECT_NEAR(exact_tail_probability(TailKind::poisson_lower, {.lambda = 4, .A = 4}), std::exp(-4.0), 1e-15);
    EXPECT_NEAR(exact_tail_probability(TailKind::poisson_upper, {.lambda = 32, .A = 16}), 0.004913753130907719,
                1e-13);
    EXPECT_NEAR(exact_tail_probability(TailKind::binomial_upper, {.n = 100, .p = 0.5, .eps = 0.2}),
                0.028443966820490392, 1e-13);
    EXPECT_NEAR(exact_tail_probability(TailKind::binomial_lower, {.n = 100, .p = 0.5, .eps = 0.2}),
                0.028443966820490392, 1e-13);
    EXPECT_NEAR(exact_tail_probability(TailKind::geomsum_upper, {.k = 10, .alpha = 0.5, .eps = 0.9}),
                0.04357927665114403, 1e-13);
    EXPECT_NEAR(exact_tail_probability(TailKind::geomsum_lower, {.k = 10, .alpha = 0.5, .eps = 0.9}),
                0.005859375, 1e-15);
}

TEST(TailCertificate, SpotExamplesPass) {
    EXPECT_TRUE(verify_tail_inequality(TailKind::poisson_lower, {{.lambda = 4, .A = 4}}).all_pass());
    EXPECT_TRUE(verify_tail_inequality(TailKind::binomial_upper, {{.n = 100, .p = 0.5, .eps = 0.2}}).all_pass());
    EXPECT_TRUE(verify_tail_inequality(TailKind::geomsum_upper, {{.k = 10, .alpha = 0.5, .eps = 0.9}}).all_pass());
}

// Smallest known violation of the geometric-sum lower bound: exact 0.22516 > 0.19790.
TEST(TailCertificate, GeomSumLowerCounterexample) {
    const auto cert = verify_tail_inequality(TailKind::geomsum_lower, {{.k = 2, .alpha = 0.9, .eps = 0.6}});
    EXPECT_NEAR(cert.rows[0].exact, 0.22515902199999985, 1e-12);
    EXPECT_FALSE(cert.rows[0].pass);
}

TEST(TailCertificate, CsvSchema) {
    const auto cert = verify_tail_inequality(TailKind::poisson_upper, default_tail_grid(TailKind::poisson_upper));
    std::ostringstream os;
    cert.write_csv(os);
    const std::string csv = os.str();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "kind,lambda,A,n,p,k,alpha,eps,exact,bound,pass");
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), cert.rows.size() + 1);
}

TEST(DefaultGrid, CoversStatedRanges) {
    const auto pg = default_tail_grid(TailKind::poisson_lower);
    EXPECT_EQ(pg.size(), 8u * 17u);
    for (const auto& q : pg) {
        EXPECT_GE(q.A, std::sqrt(q.lambda) - 1e-12);
        EXPECT_LE(q.A, 4.0 * q.lambda + 1e-12);
    }
    EXPECT_EQ(default_tail_grid(TailKind::binomial_upper).size(), 7u * 81u);
    EXPECT_EQ(default_tail_grid(TailKind::geomsum_upper).size(), 8u * 81u);
}

class FullGridCertificate : public ::testing::TestWithParam<TailKind> {};

// Exact pass over the whole default grid, no tolerance.
TEST_P(FullGridCertificate, EveryGridPointPasses) {
    const TailKind kind = GetParam();
    const auto cert = verify_tail_inequality(kind, default_tail_grid(kind));
    std::ostringstream first;
    for (const auto& r : cert.rows)
        if (!r.pass) {
            first << " first violation: k=" << r.params.k << " alpha=" << r.params.alpha << " eps=" << r.params.eps
                  << " n=" << r.params.n << " p=" << r.params.p << " lambda=" << r.params.lambda
                  << " A=" << r.params.A << " exact=" << r.exact << " bound=" << r.bound;
            break;
        }
    EXPECT_EQ(cert.failures(), 0u) << to_string(kind) << " violations of " << cert.rows.size() << first.str();
}

INSTANTIATE_TEST_SUITE_P(AllKinds, FullGridCertificate,
                         ::testing::Values(TailKind::poisson_lower, TailKind::poisson_upper, TailKind::binomial_upper,
                                           TailKind::binomial_lower, TailKind::geomsum_upper, TailKind::geomsum_lower),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(RegimeDiagnostics, Values) {
    EXPECT_NEAR(regime_diagnostics(1000000, 3).small_ratio(), 0.054, 1e-12);
    for (std::int64_t n : {1, 100, 12345})
        EXPECT_NEAR(regime_diagnostics(n, 1).small_ratio(), 1.0 / std::sqrt(static_cast<double>(n)), 1e-12);
    const auto d = regime_diagnostics(1000, 400);
    EXPECT_TRUE(std::isfinite(d.log_large_ratio));
    EXPECT_TRUE(std::isfinite(d.log_small_ratio));
    EXPECT_THROW(regime_diagnostics(0, 1), std::invalid_argument);
}

TEST(G1, ExplicitRate) { EXPECT_DOUBLE_EQ(g1(0.5), 0.25 / 12.0); }
