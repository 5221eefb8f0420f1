#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "ulam/montecarlo.hpp"

using namespace ulam;

namespace {

double freq_sigma(double f, std::uint64_t reps) { return std::sqrt(f * (1.0 - f) / static_cast<double>(reps)); }

}  // namespace

TEST(EstimateMeanStatistical, TinyExactValues) {
    const auto s = estimate_mean_subsequence(2, 2, Order::strict, 100000, 1);
    const auto w = estimate_mean_subsequence(2, 2, Order::weak, 100000, 2);
    EXPECT_TRUE(s.within_sigmas(11.0 / 6.0, 4.0)) << s.mean << " +- " << s.std_error;
    EXPECT_TRUE(w.within_sigmas(17.0 / 6.0, 4.0)) << w.mean << " +- " << w.std_error;
}

TEST(EstimateMeanStatistical, PermutationScale) {
    const auto r = estimate_mean_subsequence(10000, 1, Order::strict, 200, 3);
    EXPECT_GE(r.mean / 200.0, 0.90);
    EXPECT_LE(r.mean / 200.0, 1.00);
    ASSERT_TRUE(r.predicted.has_value());
    EXPECT_DOUBLE_EQ(*r.predicted, 199.0);
}

TEST(EstimateMean, ReportFields) {
    const auto r = estimate_mean_subsequence(30, 3, Order::weak, 50, 4);
    EXPECT_EQ(r.reps, 50u);
    EXPECT_EQ(r.seed, 4u);
    ASSERT_TRUE(r.predicted && r.rel_error);
    EXPECT_DOUBLE_EQ(*r.rel_error, std::fabs(r.mean - *r.predicted) / *r.predicted);
    const auto values = subsequence_replicates(30, 3, Order::weak, 50, 4, 1);
    const auto st = sample_stats(values);
    EXPECT_DOUBLE_EQ(r.std_error, std::sqrt(st.variance / 50.0));
    EXPECT_THROW(estimate_mean_subsequence(30, 3, Order::weak, 1, 4), std::invalid_argument);
}

// Same seed, same words: L_< <= L_<= replicate by replicate.
TEST(EstimateMean, StrictDominatedPerReplicate) {
    const auto s = subsequence_replicates(40, 4, Order::strict, 2000, 5, 1);
    const auto w = subsequence_replicates(40, 4, Order::weak, 2000, 5, 1);
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_LE(s[i], w[i]) << i;
    EXPECT_LE(estimate_mean_subsequence(40, 4, Order::strict, 2000, 5).mean,
              estimate_mean_subsequence(40, 4, Order::weak, 2000, 5).mean);
}

TEST(Replicas, ParallelismDoesNotChangeResults) {
    for (unsigned par : {2u, 3u, 8u}) {
        EXPECT_EQ(estimate_mean_subsequence(60, 3, Order::strict, 301, 6, 1).to_json().dump(),
                  estimate_mean_subsequence(60, 3, Order::strict, 301, 6, par).to_json().dump());
        EXPECT_EQ(stationarity_test(10, 1, 1, Order::strict, 20, 101, 6, 1).to_json().dump(),
                  stationarity_test(10, 1, 1, Order::strict, 20, 101, 6, par).to_json().dump());
        EXPECT_EQ(identity_suite(50, 20, 10, 10, 2, 6, 1).to_json().dump(),
                  identity_suite(50, 20, 10, 10, 2, 6, par).to_json().dump());
        EXPECT_EQ(deviation_profile(20, 40, 1, Order::strict, {0.1, 0.3}, 77, 6, 1).to_json().dump(),
                  deviation_profile(20, 40, 1, Order::strict, {0.1, 0.3}, 77, 6, par).to_json().dump());
    }
}

TEST(Replicas, ExceptionsPropagate) {
    auto boom = [](RngStream&, std::uint64_t rep) -> int {
        if (rep == 5) throw std::runtime_error("replica 5");
        return 0;
    };
    EXPECT_THROW(run_replicas<int>(10, 1, 1, boom), std::runtime_error);
    EXPECT_THROW(run_replicas<int>(10, 1, 4, boom), std::runtime_error);
}

TEST(PoissonizedStatistical, MeanBelowBound) {
    const auto s = estimate_poissonized(100, 100, 1.0, Order::strict, 2000, 7);
    EXPECT_DOUBLE_EQ(s.bound, 100.0);
    EXPECT_TRUE(s.within_bound) << s.report.mean << " +- " << s.report.std_error;
    const auto w = estimate_poissonized(1, 4, 1.0, Order::weak, 2000, 8);
    EXPECT_DOUBLE_EQ(w.bound, 5.0);
    EXPECT_TRUE(w.within_bound) << w.report.mean << " +- " << w.report.std_error;
}

TEST(Poissonized, VanishingIntensityAndDomain) {
    const auto z = estimate_poissonized(1, 4, 1e-12, Order::strict, 100, 9);
    EXPECT_EQ(z.report.mean, 0.0);
    EXPECT_THROW(estimate_poissonized(10, 4, 1.0, Order::strict, 100, 9), std::domain_error);
    EXPECT_NO_THROW(estimate_poissonized(10, 4, 1.0, Order::weak, 10, 9));
}

TEST(ChiSquarePoisson, DetectsWrongMean) {
    RngStream r = make_rng(10, 0);
    std::vector<std::uint64_t> good(5000), bad(5000);
    for (auto& v : good) v = r.poisson(50.0);
    for (auto& v : bad) v = r.poisson(53.0);
    const auto g = chi_square_poisson(good, 50.0);
    EXPECT_GT(g.p_value, ulam::testing::four_sigma_p);
    EXPECT_GT(g.dof, 10u);
    EXPECT_LT(chi_square_poisson(bad, 50.0).p_value, 1e-6);
    EXPECT_DOUBLE_EQ(normal_p_value(0.0), 1.0);
    EXPECT_NEAR(normal_p_value(1.959963984540054), 0.05, 1e-12);
}

TEST(StationarityStatistical, StrictVariant) {
    const auto rep = stationarity_test(50, 1.0, 1.0, Order::strict, 200, 2000, 11);
    EXPECT_DOUBLE_EQ(rep.sink_param, 0.5);
    EXPECT_DOUBLE_EQ(rep.target_mean, 50.0);
    EXPECT_TRUE(rep.mean_within(4.0)) << rep.stats.mean;
    EXPECT_GT(rep.chi_square.p_value, 1e-4);
    EXPECT_GT(rep.p_variance, ulam::testing::four_sigma_p);
}

TEST(StationarityStatistical, WeakVariant) {
    const auto rep = stationarity_test(20, 1.0, 2.0, Order::weak, 200, 2000, 12);
    EXPECT_DOUBLE_EQ(rep.sink_param, 0.5);
    EXPECT_DOUBLE_EQ(rep.target_mean, 40.0);
    EXPECT_TRUE(rep.mean_within(4.0)) << rep.stats.mean;
    EXPECT_GT(rep.chi_square.p_value, 1e-4);
    EXPECT_GT(rep.p_variance, ulam::testing::four_sigma_p);
}

TEST(StationarityStatistical, TimeZeroIsInitialLaw) {
    for (Order v : {Order::strict, Order::weak}) {
        const auto rep = stationarity_test(30, 1.0, 1.5, v, 0, 4000, 13);
        EXPECT_TRUE(rep.mean_within(4.0));
        EXPECT_GT(rep.chi_square.p_value, 1e-4);
    }
}

TEST(Stationarity, RejectsInvalidRates) {
    EXPECT_THROW(stationarity_test(20, 1.0, 0.5, Order::weak, 10, 10, 1), std::invalid_argument);
    EXPECT_THROW(stationarity_test(20, 1.0, 1.0, Order::strict, -1, 10, 1), std::invalid_argument);
    EXPECT_THROW(stationarity_test(0, 1.0, 1.0, Order::strict, 1, 10, 1), std::invalid_argument);
}

TEST(Deviation, UpperFrequencyDecreasesInEps) {
    const std::vector<double> grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.4};
    const auto p = deviation_profile(100, 100, 1.0, Order::strict, grid, 1000, 14);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        EXPECT_LE(p.upper_freq[i], p.upper_freq[i - 1]);
        EXPECT_LE(p.lower_freq[i], p.lower_freq[i - 1]);
    }
    for (double f : p.upper_freq) EXPECT_TRUE(f >= 0.0 && f <= 1.0);
    EXPECT_TRUE(p.augmented_upper_freq.empty());  // t = x lambda: no optimal rates
}

TEST(DeviationStatistical, DoublingDoesNotIncreaseUpperFrequency) {
    const std::vector<double> grid{0.02, 0.05, 0.1};
    const std::uint64_t reps = 1000;
    const auto small = deviation_profile(100, 100, 1.0, Order::strict, grid, reps, 15);
    const auto big = deviation_profile(200, 200, 1.0, Order::strict, grid, reps, 16);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double slack = 4.0 * std::hypot(freq_sigma(small.upper_freq[i], reps), freq_sigma(big.upper_freq[i], reps));
        EXPECT_LE(big.upper_freq[i], small.upper_freq[i] + slack) << "eps " << grid[i];
    }
}

TEST(DeviationStatistical, AugmentedStatisticBelowExplicitBound) {
    const std::uint64_t reps = 2000;
    const auto p = deviation_profile(400, 1600, 1.0, Order::strict, {0.5}, reps, 17);
    ASSERT_EQ(p.augmented_upper_freq.size(), 1u);
    const double bound = 2.0 * std::exp(-(0.25 / 12.0) * (800.0 - 400.0));
    EXPECT_DOUBLE_EQ(p.bound_upper[0], bound);
    const double f = p.augmented_upper_freq[0];
    EXPECT_LE(f, bound + 4.0 * std::max(freq_sigma(f, reps), freq_sigma(bound, reps)));
}

TEST(Deviation, Validation) {
    EXPECT_THROW(deviation_profile(10, 5, 1.0, Order::strict, {0.1}, 10, 1), std::domain_error);
    EXPECT_THROW(deviation_profile(10, 20, 1.0, Order::strict, {0.0}, 10, 1), std::domain_error);
    EXPECT_THROW(deviation_profile(10, 20, 1.0, Order::strict, {0.3, 0.2}, 10, 1), std::invalid_argument);
}

TEST(IdentitySuite, SmallRunPasses) {
    const auto rep = identity_suite(300, 100, 15, 15, 2, 18);
    EXPECT_EQ(rep.checks, 800u);
    EXPECT_TRUE(rep.passed()) << rep.to_json().dump();
}

TEST(DepoissonizationStatistical, Examples) {
    const auto a = depoissonization_report(100, 4, 2000, 19);
    EXPECT_TRUE(a.asserted);
    EXPECT_TRUE(a.within_budget) << a.to_json().dump();

    const auto b = depoissonization_report(400, 1, 2000, 20);
    EXPECT_TRUE(b.within_budget);
    const double tight = 4.0 * (b.word.std_error + b.poissonized.std_error) + 6.0 * std::pow(400.0, 0.25);
    EXPECT_LE(std::fabs(b.difference), tight) << b.to_json().dump();

    const auto c = depoissonization_report(50, 50, 200, 21);
    EXPECT_FALSE(c.asserted);
    EXPECT_TRUE(c.to_json().contains("budget"));
}

TEST(Schemas, EstimateReportJsonAndCsv) {
    const auto r = estimate_mean_subsequence(20, 2, Order::strict, 10, 22);
    const auto j = r.to_json();
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"command", "params", "seed", "mean", "stderr", "reps", "predicted",
                                              "rel_error"}));
    std::ostringstream os;
    r.write_csv(os);
    const std::string csv = os.str();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,k,order,mean,stderr,reps,predicted");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Schemas, DeviationProfileJsonAndCsv) {
    const auto p = deviation_profile(10, 40, 1.0, Order::strict, {0.1, 0.2, 0.3}, 20, 23);
    std::ostringstream os;
    p.write_csv(os);
    const std::string csv = os.str();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "eps,upper_freq,lower_freq,augmented_upper_freq,augmented_lower_freq,bound_upper");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    const auto j = p.to_json();
    for (const char* key : {"eps", "upper_freq", "lower_freq", "bound_upper"}) {
        ASSERT_TRUE(j.contains(key)) << key;
        EXPECT_EQ(j.at(key).size(), 3u);
    }
}
