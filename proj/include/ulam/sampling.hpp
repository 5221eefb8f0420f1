#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ulam/bounds.hpp"
#include "ulam/rng.hpp"
#include "ulam/types.hpp"

namespace ulam {

/// In-place Fisher-Yates with exact bounded draws.
template <class T>
void shuffle(std::vector<T>& v, RngStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

inline MultisetWord sample_uniform_multiset_permutation(std::int64_t n, std::int64_t k, RngStream& rng) {
    if (n < 1 || k < 1) throw std::invalid_argument("sample_uniform_multiset_permutation: n, k must be >= 1");
    MultisetWord w = MultisetWord::sorted(n, k);
    shuffle(w.mutable_letters(), rng);
    return w;
}

inline MultisetWord sample_uniform_permutation(std::int64_t n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("sample_uniform_permutation: n must be >= 1");
    return sample_uniform_multiset_permutation(n, 1, rng);
}

/// `count` i.i.d. uniform positions in (0, x], sorted; duplicates are redrawn.
inline std::vector<double> sample_sorted_uniform(std::size_t count, double x, RngStream& rng) {
    std::vector<double> xs(count);
    for (auto& v : xs) v = x * rng.uniform();
    std::sort(xs.begin(), xs.end());
    while (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) {
        auto dup = std::adjacent_find(xs.begin(), xs.end());
        *dup = x * rng.uniform();
        std::sort(xs.begin(), xs.end());
    }
    return xs;
}

/// Homogeneous PPP of the given intensity on (0, x], as sorted positions.
inline std::vector<double> sample_ppp_line(double x, double intensity, RngStream& rng) {
    const auto count = rng.poisson(intensity * x);
    return sample_sorted_uniform(static_cast<std::size_t>(count), x, rng);
}

/// Rows 1..t, each an independent PPP(lambda) on (0, x].
inline PlanarPointSet sample_poissonized_cloud(double x, std::int64_t t, double lambda, RngStream& rng) {
    if (!(x > 0.0)) throw std::invalid_argument("sample_poissonized_cloud: x must be > 0");
    if (t < 1) throw std::invalid_argument("sample_poissonized_cloud: t must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("sample_poissonized_cloud: lambda must be > 0");
    PlanarPointSet cloud(x, t);
    for (Row r = 1; r <= t; ++r) cloud.set_row(r, sample_ppp_line(x, lambda, rng));
    return cloud;
}

/// Sink multiplicity for one row under the given rates.
inline std::uint32_t sample_sink(const BoundaryRates& rates, RngStream& rng) {
    if (rates.variant == Order::strict) return rng.bernoulli(rates.sink_param) ? 1u : 0u;
    return static_cast<std::uint32_t>(rng.geometric0(rates.sink_param));
}

inline BoundarySample sample_boundary(double x, std::int64_t t, const BoundaryRates& rates, RngStream& rng) {
    rates.validate();
    if (!(x > 0.0)) throw std::invalid_argument("sample_boundary: x must be > 0");
    if (t < 0) throw std::invalid_argument("sample_boundary: t must be >= 0");
    BoundarySample b;
    b.sources = sample_ppp_line(x, rates.source_rate, rng);
    b.sinks.resize(static_cast<std::size_t>(t));
    for (auto& s : b.sinks) s = sample_sink(rates, rng);
    return b;
}

}  // namespace ulam
