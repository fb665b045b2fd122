#pragma once

// Two-pole effective resistance by iterated voltage averaging.
//
// Pole p is held at voltage 1 and pole g at 0. Every other node repeatedly
// takes the conductance-weighted mean of its neighbors' voltages. From the
// zero start the voltages rise monotonically toward the Kirchhoff solution,
// so the current leaving p only falls and the current entering g only rises.
// Their reciprocals bracket the true resistance from below and above, and the
// iteration stops once the bracket is narrower than epsilon.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "resdist/distance_matrix.hpp"
#include "resdist/error.hpp"
#include "resdist/graph.hpp"

namespace resdist {

enum class Sweep {
    Simultaneous, ///< Jacobi order; reads only the previous iterate.
    InPlace       ///< Gauss-Seidel order; reads values updated earlier in the pass.
};

inline std::string_view to_string(Sweep s) {
    return s == Sweep::Simultaneous ? "jacobi" : "gauss-seidel";
}

struct SolverConfig {
    double epsilon = 0.1;
    std::size_t max_iterations = 100000;
    Sweep sweep = Sweep::Simultaneous;

    void validate() const {
        if (!(epsilon > 0.0))
            throw DomainError("epsilon must be positive");
        if (max_iterations < 1)
            throw DomainError("max_iterations must be at least 1");
    }
};

/// Node voltages for one two-pole problem. `active` lists the nodes that are
/// updated (the poles' component minus the poles), in index order.
struct VoltageState {
    std::vector<double> voltages;
    Index pole_p = 0;
    Index pole_g = 0;
    std::size_t iteration = 0;
    std::vector<Index> active;

    /// Zero start over the whole graph: V_p = 1, everything else 0.
    static VoltageState zero_start(const CitationGraph& g, Index p, Index q) {
        std::vector<Index> nodes(g.node_count());
        for (Index i = 0; i < nodes.size(); ++i)
            nodes[i] = i;
        return zero_start(g, p, q, nodes);
    }

    /// Zero start restricted to `component` (sorted node indices).
    static VoltageState zero_start(const CitationGraph& g, Index p, Index q,
                                   std::span<const Index> component) {
        VoltageState s;
        s.voltages.assign(g.node_count(), 0.0);
        s.voltages[p] = 1.0;
        s.pole_p = p;
        s.pole_g = q;
        s.active.reserve(component.size());
        for (Index i : component) {
            if (i != p && i != q)
                s.active.push_back(i);
        }
        return s;
    }
};

struct ResistanceResult {
    double resistance = 0.0; ///< midpoint of the final bounds
    double lower_bound = 0.0;
    double upper_bound = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

inline double averaged_voltage(const CitationGraph& g, std::span<const double> v, Index i) {
    const auto nb = g.neighbors(i);
    const auto wt = g.link_weights(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k)
        acc += wt[k] * v[nb[k]];
    // Rounding can push a weighted mean of values in [0, 1] a hair outside.
    return std::clamp(acc / g.node_weight(i), 0.0, 1.0);
}

} // namespace detail

/// Applies one sweep of V_i <- (1/w_i) sum_j w_ij V_j to every active node.
/// `scratch` is reused across calls by the Jacobi sweep.
inline void iterate_voltages_into(const CitationGraph& g, VoltageState& state, Sweep sweep,
                                  std::vector<double>& scratch) {
    if (sweep == Sweep::Simultaneous) {
        scratch = state.voltages;
        for (Index i : state.active)
            scratch[i] = detail::averaged_voltage(g, state.voltages, i);
        std::swap(scratch, state.voltages);
    } else {
        for (Index i : state.active)
            state.voltages[i] = detail::averaged_voltage(g, state.voltages, i);
    }
    ++state.iteration;
}

inline VoltageState iterate_voltages(const CitationGraph& g, VoltageState state,
                                     Sweep sweep = Sweep::Simultaneous) {
    std::vector<double> scratch;
    iterate_voltages_into(g, state, sweep, scratch);
    return state;
}

struct CurrentBounds {
    double from_p = 0.0; ///< w_p - sum_i w_pi V_i
    double into_g = 0.0; ///< sum_i w_gi V_i
};

inline CurrentBounds current_bounds(const CitationGraph& g, const VoltageState& state) {
    CurrentBounds c;
    {
        const auto nb = g.neighbors(state.pole_p);
        const auto wt = g.link_weights(state.pole_p);
        double drawn = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k)
            drawn += wt[k] * state.voltages[nb[k]];
        c.from_p = g.node_weight(state.pole_p) - drawn;
    }
    {
        const auto nb = g.neighbors(state.pole_g);
        const auto wt = g.link_weights(state.pole_g);
        double arriving = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k)
            arriving += wt[k] * state.voltages[nb[k]];
        c.into_g = arriving;
    }
    return c;
}

/// Snapshot passed to solver observers after each sweep.
struct IterationRecord {
    std::size_t iteration;
    double lower;
    double upper;
};

struct NullObserver {
    void operator()(const IterationRecord&) const noexcept {}
};

/// Iterates from the zero start until upper - lower < epsilon or the
/// iteration budget runs out. `component` must be the sorted component
/// containing both poles. `observer` sees the bounds after every sweep.
template <typename Observer = NullObserver>
ResistanceResult resistance_in_component(const CitationGraph& g, Index p, Index q,
                                         std::span<const Index> component,
                                         const SolverConfig& cfg, Observer&& observer = {}) {
    VoltageState state = VoltageState::zero_start(g, p, q, component);
    std::vector<double> scratch;
    ResistanceResult result;
    constexpr double inf = std::numeric_limits<double>::infinity();
    while (state.iteration < cfg.max_iterations) {
        iterate_voltages_into(g, state, cfg.sweep, scratch);
        const CurrentBounds c = current_bounds(g, state);
        result.lower_bound = c.from_p > 0.0 ? 1.0 / c.from_p : inf;
        result.upper_bound = c.into_g > 0.0 ? 1.0 / c.into_g : inf;
        result.iterations = state.iteration;
        observer(IterationRecord{state.iteration, result.lower_bound, result.upper_bound});
        if (c.into_g > 0.0 && result.upper_bound - result.lower_bound < cfg.epsilon) {
            result.converged = true;
            break;
        }
    }
    // Round-off can cross the bounds by an ulp once they have met.
    if (result.upper_bound < result.lower_bound)
        result.upper_bound = result.lower_bound;
    result.resistance = std::isfinite(result.upper_bound)
                            ? 0.5 * (result.lower_bound + result.upper_bound)
                            : inf;
    return result;
}

template <typename Observer = NullObserver>
ResistanceResult resistance_between(const CitationGraph& g, Index p, Index q,
                                    const SolverConfig& cfg = {}, Observer&& observer = {}) {
    cfg.validate();
    if (p >= g.node_count() || q >= g.node_count())
        throw InputError("pole index out of range");
    if (p == q)
        throw DomainError("poles must be distinct nodes ('" + g.id(p) + "')");
    const auto component = connected_component_of(g, p);
    if (!std::binary_search(component.begin(), component.end(), q))
        throw DisconnectedError("'" + g.id(p) + "' and '" + g.id(q) +
                                "' are not connected; resistance is infinite");
    return resistance_in_component(g, p, q, component, cfg, std::forward<Observer>(observer));
}

inline ResistanceResult resistance_between(const CitationGraph& g, std::string_view p,
                                           std::string_view q, const SolverConfig& cfg = {}) {
    return resistance_between(g, g.index_of(p), g.index_of(q), cfg);
}

namespace detail {

/// Throws DisconnectedError listing which component each node belongs to
/// unless all of `nodes` share one component. Returns that component.
inline std::vector<Index> common_component(const CitationGraph& g, std::span<const Index> nodes) {
    if (nodes.empty())
        return {};
    const auto labels = component_labels(g);
    const Index first = labels[nodes.front()];
    bool ok = true;
    for (Index i : nodes)
        ok = ok && labels[i] == first;
    if (!ok) {
        std::string msg = "papers span several connected components:";
        for (Index i : nodes)
            msg += " " + g.id(i) + "@" + std::to_string(labels[i]);
        throw DisconnectedError(msg);
    }
    return connected_component_of(g, nodes.front());
}

inline unsigned effective_threads(unsigned requested, std::size_t work) {
    if (requested == 0)
        requested = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(requested, std::max<std::size_t>(work, 1)));
}

/// Runs body(k) for k in [0, count) over `threads` workers. The first
/// exception thrown by any worker is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    threads = effective_threads(threads, count);
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k)
            body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed))
                return;
            const std::size_t k = next.fetch_add(1, std::memory_order_relaxed);
            if (k >= count)
                return;
            try {
                body(k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back(worker);
    pool.clear();
    if (error)
        std::rethrow_exception(error);
}

} // namespace detail

/// Resistance for every unordered pair of `papers`, in the order given.
/// Pairs are independent and spread across `threads` workers (0 means
/// hardware concurrency); the output does not depend on scheduling.
inline DistanceMatrix all_pairs_resistance(const CitationGraph& g, std::span<const Index> papers,
                                           const SolverConfig& cfg = {}, unsigned threads = 0) {
    cfg.validate();
    std::vector<std::string> labels;
    labels.reserve(papers.size());
    for (Index i : papers)
        labels.push_back(g.id(i));
    DistanceMatrix out(std::move(labels));
    const auto component = detail::common_component(g, papers);
    const std::size_t n = papers.size();
    std::vector<PairRecord> records(pair_count(n));
    detail::parallel_for(records.size(), threads, [&](std::size_t k) {
        const auto [a, b] = condensed_pair(n, k);
        if (papers[a] == papers[b])
            throw DomainError("paper listed twice: '" + g.id(papers[a]) + "'");
        const auto r = resistance_in_component(g, papers[a], papers[b], component, cfg);
        records[k] = {r.resistance, r.lower_bound, r.upper_bound, r.iterations, r.converged};
    });
    return DistanceMatrix(out.labels(), std::move(records));
}

} // namespace resdist
