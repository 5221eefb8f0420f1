#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "json.hpp"
#include "ulam/types.hpp"

namespace ulam {

struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Two-pass moments, summed in index order so results do not depend on threading.
inline SampleStats sample_stats(std::span<const double> xs) {
    SampleStats s;
    s.n = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double v : xs) sum += v;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double v : xs) ss += (v - s.mean) * (v - s.mean);
        s.variance = ss / static_cast<double>(xs.size() - 1);
        s.std_error = std::sqrt(s.variance / static_cast<double>(xs.size()));
    }
    return s;
}

/// Monte Carlo estimate with its provenance and an optional predicted value.
struct EstimateReport {
    std::string command;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    std::uint64_t seed = 0;
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t reps = 0;
    std::optional<double> predicted;
    std::optional<double> rel_error;

    void set_predicted(double value) {
        predicted = value;
        rel_error = value != 0.0 ? std::optional<double>(std::fabs(mean - value) / std::fabs(value)) : std::nullopt;
    }

    /// |mean - value| <= sigmas * stderr
    bool within_sigmas(double value, double sigmas) const {
        return std::fabs(mean - value) <= sigmas * std_error;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["params"] = params;
        j["seed"] = seed;
        j["mean"] = mean;
        j["stderr"] = std_error;
        j["reps"] = reps;
        j["predicted"] = predicted ? nlohmann::ordered_json(*predicted) : nlohmann::ordered_json(nullptr);
        j["rel_error"] = rel_error ? nlohmann::ordered_json(*rel_error) : nlohmann::ordered_json(nullptr);
        return j;
    }

    /// One header line and one row: every parameter, then mean,stderr,reps,predicted.
    void write_csv(std::ostream& os) const {
        for (const auto& [key, value] : params.items()) os << key << ',';
        os << "mean,stderr,reps,predicted\n";
        for (const auto& [key, value] : params.items()) os << (value.is_string() ? value.get<std::string>() : value.dump()) << ',';
        os << Shortest{mean} << ',' << Shortest{std_error} << ',' << reps << ',';
        if (predicted) os << Shortest{*predicted};
        os << '\n';
    }
};

}  // namespace ulam
