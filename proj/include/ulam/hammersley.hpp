#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ulam/bounds.hpp"
#include "ulam/rng.hpp"
#include "ulam/sampling.hpp"
#include "ulam/subsequences.hpp"
#include "ulam/types.hpp"

namespace ulam {

/// Particles of a semi-discrete Hammersley process on [0, x_max].
struct ParticleState {
    std::vector<double> positions;  // strictly increasing
    std::uint64_t exits = 0;        // particles absorbed at x = 0 so far
    double x_max = 1.0;

    std::size_t count() const noexcept { return positions.size(); }

    void validate() const {
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (!(positions[i] >= 0.0 && positions[i] <= x_max))
                throw std::invalid_argument("ParticleState: position outside [0, x_max]");
            if (i > 0 && !(positions[i - 1] < positions[i]))
                throw std::invalid_argument("ParticleState: positions must be strictly increasing");
        }
    }

    friend bool operator==(const ParticleState&, const ParticleState&) = default;
};

enum class ParticleEvent { move, stay, birth, exit };

inline std::string_view to_string(ParticleEvent e) {
    switch (e) {
        case ParticleEvent::move: return "move";
        case ParticleEvent::stay: return "stay";
        case ParticleEvent::birth: return "birth";
        case ParticleEvent::exit: return "exit";
    }
    return "?";
}

namespace detail {

inline constexpr std::size_t no_particle = static_cast<std::size_t>(-1);

inline void check_row(std::span<const double> row, double x_max) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!(row[i] > 0.0 && row[i] <= x_max)) throw std::invalid_argument("row point outside (0, x_max]");
        if (i > 0 && !(row[i - 1] < row[i])) throw std::invalid_argument("row points must be strictly increasing");
    }
}

struct NoObserver {
    void operator()(ParticleEvent, std::size_t, double) const noexcept {}
};

/*
 * One step of each dynamic. A row point sharing its x with a particle counts
 * as lying just left of it, matching the chain algorithms' tie rule.
 *
 * obs(event, old_index, position) fires in output order; old_index is
 * no_particle for births. Row point labels (the longest chain ending at the
 * point, excluding boundary offsets) go to `labels` when it is non-null.
 */
template <class Obs>
void advance_strict(std::span<const double> old, std::span<const double> row, bool sink, std::vector<double>& out,
                    std::uint64_t& exits, Obs&& obs, std::vector<std::uint64_t>* labels = nullptr) {
    out.clear();
    if (labels) labels->clear();
    std::size_t r = 0;
    std::size_t j = 0;
    auto label_upto = [&](double edge, std::uint64_t value) {
        if (!labels) return;
        while (labels->size() < row.size() && row[labels->size()] <= edge) labels->push_back(value);
    };
    if (sink && !old.empty()) {
        // The sink acts as a row point at x = 0: the leftmost particle leaves
        // and every row point up to it is used up.
        label_upto(old[0], 1);
        while (r < row.size() && row[r] <= old[0]) ++r;
        obs(ParticleEvent::exit, 0, 0.0);
        ++exits;
        j = 1;
    }
    for (; j < old.size(); ++j) {
        label_upto(old[j], j + 1);
        if (r < row.size() && row[r] <= old[j]) {
            out.push_back(row[r]);
            obs(ParticleEvent::move, j, row[r]);
            while (r < row.size() && row[r] <= old[j]) ++r;
        } else {
            out.push_back(old[j]);
            obs(ParticleEvent::stay, j, old[j]);
        }
    }
    // with no particles, a sink is absorbed and blocks the row entirely
    const bool blocked = sink && old.empty();
    label_upto(INFINITY, old.size() + 1);
    if (r < row.size() && !blocked) {
        out.push_back(row[r]);
        obs(ParticleEvent::birth, no_particle, row[r]);
    }
}

template <class Obs>
void advance_weak(std::span<const double> old, std::span<const double> row, std::uint64_t sinks,
                  std::vector<double>& out, std::uint64_t& exits, Obs&& obs,
                  std::vector<std::uint64_t>* labels = nullptr) {
    out.clear();
    const std::size_t gone = static_cast<std::size_t>(std::min<std::uint64_t>(sinks, old.size()));
    for (std::size_t j = 0; j < gone; ++j) obs(ParticleEvent::exit, j, 0.0);
    exits += gone;
    if (labels) labels->clear();
    std::size_t r = 0;
    for (std::size_t j = gone; j < old.size(); ++j) {
        if (r < row.size() && row[r] <= old[j]) {
            out.push_back(row[r]);
            if (labels) labels->push_back(out.size());
            obs(ParticleEvent::move, j, row[r]);
            ++r;
        } else {
            out.push_back(old[j]);
            obs(ParticleEvent::stay, j, old[j]);
        }
    }
    // every unconsumed row point starts a new line
    for (; r < row.size(); ++r) {
        out.push_back(row[r]);
        if (labels) labels->push_back(out.size());
        obs(ParticleEvent::birth, no_particle, row[r]);
    }
}

}  // namespace detail

/// One step of the strict process: optional sink, then the row's points.
inline ParticleState step_strict(const ParticleState& state, std::span<const double> row_points, bool sink_present) {
    detail::check_row(row_points, state.x_max);
    ParticleState next{{}, state.exits, state.x_max};
    detail::advance_strict(state.positions, row_points, sink_present, next.positions, next.exits, detail::NoObserver{});
    return next;
}

/// One step of the weak process: `sink_multiplicity` leftmost particles exit, then the row's points act.
inline ParticleState step_weak(const ParticleState& state, std::span<const double> row_points,
                               std::uint64_t sink_multiplicity) {
    detail::check_row(row_points, state.x_max);
    ParticleState next{{}, state.exits, state.x_max};
    detail::advance_weak(state.positions, row_points, sink_multiplicity, next.positions, next.exits,
                         detail::NoObserver{});
    return next;
}

struct TrajectoryEvent {
    std::int64_t step;
    std::uint64_t particle;  // line id, assigned at birth
    double position;
    ParticleEvent event;
};

/// CSV: step,particle_index,position,event
inline void write_trajectory_csv(std::ostream& os, std::span<const TrajectoryEvent> events) {
    os << "step,particle_index,position,event\n";
    for (const auto& e : events)
        os << e.step << ',' << e.particle << ',' << Shortest{e.position} << ',' << to_string(e.event) << '\n';
}

/**
 * Stepper shared by run_process and the identity checks. Tracks line ids only
 * when trajectories are recorded.
 */
class HammersleyProcess {
public:
    HammersleyProcess(Order variant, double x_max, std::vector<double> sources, bool record_trajectory)
        : variant_(variant), record_(record_trajectory) {
        state_.x_max = x_max;
        state_.positions = std::move(sources);
        state_.validate();
        if (record_) {
            for (double s : state_.positions) {
                ids_.push_back(next_id_);
                trajectory_.push_back({0, next_id_++, s, ParticleEvent::birth});
            }
        }
    }

    /// Feeds the next row; returns the labels of the row points if requested.
    void step(std::span<const double> row, std::uint32_t sinks, std::vector<std::uint64_t>* labels = nullptr) {
        ++time_;
        const std::uint64_t sinks_before = total_sinks_;
        total_sinks_ += sinks;
        if (variant_ == Order::strict && sinks > 1)
            throw std::invalid_argument("strict process: sink multiplicity must be 0 or 1");
        new_ids_.clear();
        auto observe = [this](ParticleEvent e, std::size_t old_index, double pos) {
            if (!record_) return;
            std::uint64_t id;
            if (e == ParticleEvent::birth) {
                id = next_id_++;
            } else {
                id = ids_[old_index];
            }
            if (e != ParticleEvent::exit) new_ids_.push_back(id);
            trajectory_.push_back({time_, id, pos, e});
        };
        if (variant_ == Order::strict)
            detail::advance_strict(state_.positions, row, sinks != 0, scratch_, state_.exits, observe, labels);
        else
            detail::advance_weak(state_.positions, row, sinks, scratch_, state_.exits, observe, labels);
        if (labels) {
            const std::uint64_t offset = variant_ == Order::strict ? sinks_before : total_sinks_;
            for (auto& l : *labels) l += offset;
        }
        std::swap(state_.positions, scratch_);
        if (record_) std::swap(ids_, new_ids_);
    }

    const ParticleState& state() const noexcept { return state_; }
    std::uint64_t total_sinks() const noexcept { return total_sinks_; }
    std::int64_t time() const noexcept { return time_; }
    const std::vector<TrajectoryEvent>& trajectory() const noexcept { return trajectory_; }

private:
    Order variant_;
    bool record_;
    ParticleState state_;
    std::vector<double> scratch_;
    std::int64_t time_ = 0;
    std::uint64_t total_sinks_ = 0;
    std::uint64_t next_id_ = 0;
    std::vector<std::uint64_t> ids_, new_ids_;
    std::vector<TrajectoryEvent> trajectory_;
};

struct RunOptions {
    bool record_trajectory = false;
    bool keep_cloud = true;
};

struct ProcessRun {
    ParticleState final_state;
    std::vector<std::uint64_t> counts;  // particle count after step 1..t
    std::vector<std::uint64_t> exits;   // cumulative exits after step 1..t
    PlanarPointSet cloud;               // empty rows when keep_cloud is off
    BoundarySample boundary;
    std::uint64_t total_sinks = 0;
    std::vector<TrajectoryEvent> trajectory;
};

/**
 * Samples the boundary (if any) and then the cloud row by row, feeding each row
 * to the dynamics. Draw order matches sample_boundary followed by
 * sample_poissonized_cloud on the same stream.
 */
inline ProcessRun run_process(double x, std::int64_t t, double lambda, Order variant,
                              const std::optional<BoundaryRates>& rates, RngStream& rng, RunOptions options = {}) {
    if (!(x > 0.0)) throw std::invalid_argument("run_process: x must be > 0");
    if (t < 1) throw std::invalid_argument("run_process: t must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("run_process: lambda must be > 0");
    ProcessRun run;
    if (rates) {
        if (rates->variant != variant) throw std::invalid_argument("run_process: boundary rates for the other variant");
        if (std::fabs(rates->lambda - lambda) > 1e-12 * lambda)
            throw std::invalid_argument("run_process: boundary rates built for a different lambda");
        run.boundary = sample_boundary(x, t, *rates, rng);
    } else {
        run.boundary.sinks.assign(static_cast<std::size_t>(t), 0);
    }
    run.cloud = PlanarPointSet(x, t);
    HammersleyProcess proc(variant, x, run.boundary.sources, options.record_trajectory);
    run.counts.reserve(static_cast<std::size_t>(t));
    run.exits.reserve(static_cast<std::size_t>(t));
    for (Row r = 1; r <= t; ++r) {
        auto row = sample_ppp_line(x, lambda, rng);
        proc.step(row, run.boundary.sinks_at(r));
        run.counts.push_back(proc.state().count());
        run.exits.push_back(proc.state().exits);
        if (options.keep_cloud) run.cloud.set_row(r, std::move(row));
    }
    run.final_state = proc.state();
    run.total_sinks = proc.total_sinks();
    run.trajectory = proc.trajectory();
    return run;
}

/// A maximal chain rebuilt from the level lines of the particle system.
struct Witness {
    std::vector<ChainElement> chain;  // in chain order
    std::uint64_t sources_used = 0;   // sources(P)
    std::uint64_t sinks_used = 0;     // sinks(P)
    bool certified = false;           // consecutive elements precede each other and length is as claimed
};

struct LineIdentityResult {
    std::uint64_t particles = 0;
    std::uint64_t sinks = 0;
    std::uint64_t chain_length = 0;  // from the chain algorithm
    std::optional<Witness> witness;

    bool holds() const {
        return particles + sinks == chain_length && (!witness || witness->certified);
    }
};

/**
 * Walks back from the top line: each element on line L is preceded by one on
 * line L-1. Labels are the level (line number) of every element, as produced
 * by the particle system.
 */
inline Witness extract_witness(const std::vector<ChainElement>& elements, const std::vector<std::uint64_t>& labels,
                               std::uint64_t claimed, Order order) {
    Witness w;
    if (claimed == 0) {
        w.certified = std::all_of(labels.begin(), labels.end(), [](auto l) { return l == 0; });
        return w;
    }
    std::size_t cur = elements.size();
    for (std::size_t i = 0; i < elements.size(); ++i)
        if (labels[i] == claimed) {
            cur = i;
            break;
        }
    if (cur == elements.size()) return w;
    std::vector<ChainElement> rev{elements[cur]};
    for (std::uint64_t level = claimed; level > 1; --level) {
        std::size_t prev = elements.size();
        for (std::size_t i = 0; i < elements.size(); ++i)
            if (labels[i] == level - 1 && chain_precedes(elements[i], elements[cur], order)) {
                prev = i;
                break;
            }
        if (prev == elements.size()) return w;
        cur = prev;
        rev.push_back(elements[cur]);
    }
    w.chain.assign(rev.rbegin(), rev.rend());
    for (const auto& e : w.chain) {
        if (e.kind == ChainElementKind::source) ++w.sources_used;
        if (e.kind == ChainElementKind::sink) ++w.sinks_used;
    }
    bool ok = w.chain.size() == claimed;
    for (std::size_t i = 1; ok && i < w.chain.size(); ++i) ok = chain_precedes(w.chain[i - 1], w.chain[i], order);
    w.certified = ok;
    return w;
}

/**
 * Runs the deterministic dynamics on a given cloud (and boundary) and compares
 * particles + sinks with the longest chain. With `with_witness`, every element
 * is labelled by its line and a maximal chain is rebuilt and certified.
 */
inline LineIdentityResult check_line_identity(const PlanarPointSet& cloud, const BoundarySample* boundary,
                                              Order variant, bool with_witness = false) {
    std::vector<double> sources;
    if (boundary) {
        boundary->validate(variant, cloud.x_max(), cloud.t_max());
        sources = boundary->sources;
    }
    HammersleyProcess proc(variant, cloud.x_max(), sources, false);

    std::vector<ChainElement> elements;
    std::vector<std::uint64_t> labels;
    std::vector<std::uint64_t> row_labels;
    if (with_witness) {
        for (std::size_t i = 0; i < sources.size(); ++i) {
            elements.push_back({sources[i], 0, ChainElementKind::source});
            labels.push_back(i + 1);
        }
    }
    for (Row r = 1; r <= cloud.t_max(); ++r) {
        const std::uint32_t s = boundary ? boundary->sinks_at(r) : 0;
        if (with_witness) {
            for (std::uint32_t u = 0; u < s; ++u) {
                elements.push_back({0.0, r, ChainElementKind::sink, u});
                labels.push_back(proc.total_sinks() + u + 1);
            }
        }
        proc.step(cloud.row(r), s, with_witness ? &row_labels : nullptr);
        if (with_witness) {
            const auto row = cloud.row(r);
            for (std::size_t i = 0; i < row.size(); ++i) {
                elements.push_back({row[i], r, ChainElementKind::interior});
                labels.push_back(row_labels[i]);
            }
            row_labels.clear();
        }
    }

    LineIdentityResult res;
    res.particles = proc.state().count();
    res.sinks = proc.total_sinks();
    if (boundary)
        res.chain_length = longest_chain_with_boundary(cloud, *boundary, variant);
    else
        res.chain_length = longest_chain(cloud, variant);
    if (with_witness) res.witness = extract_witness(elements, labels, res.particles + res.sinks, variant);
    return res;
}

inline bool verify_line_identity(const PlanarPointSet& cloud, const std::optional<BoundarySample>& boundary,
                                 Order variant, bool with_witness = false) {
    return check_line_identity(cloud, boundary ? &*boundary : nullptr, variant, with_witness).holds();
}

}  // namespace ulam
