#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace ulam::testing {

// Two-sided tail mass beyond 4 standard deviations.
inline constexpr double four_sigma_p = 6.334e-5;

struct ChiSquare {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Pearson test of counts against cell probabilities; the final cell gets the
// remaining mass so the probabilities may be a truncated pmf.
inline ChiSquare chi_square(const std::vector<double>& observed, std::vector<double> probs) {
    double total = 0.0, mass = 0.0;
    for (double o : observed) total += o;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) mass += probs[i];
    probs.back() = 1.0 - mass;
    ChiSquare c;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = total * probs[i];
        c.statistic += (observed[i] - e) * (observed[i] - e) / e;
    }
    c.p_value = boost::math::gamma_q(0.5 * static_cast<double>(observed.size() - 1), 0.5 * c.statistic);
    return c;
}

template <class Key>
std::vector<double> counts_of(const std::map<Key, std::uint64_t>& m) {
    std::vector<double> v;
    for (const auto& [k, c] : m) v.push_back(static_cast<double>(c));
    return v;
}

}  // namespace ulam::testing
